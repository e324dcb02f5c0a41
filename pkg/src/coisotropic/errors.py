"""Exception hierarchy shared by all modules."""


class CoisotropicError(Exception):
    """Base class; ``name`` is what reports and the CLI print."""

    @property
    def name(self) -> str:
        return type(self).__name__


class ChartMismatch(CoisotropicError, ValueError):
    pass


class DegreeError(CoisotropicError, ValueError):
    pass


class NotPrecosymplectic(CoisotropicError):
    pass


class NotCosymplectic(CoisotropicError):
    pass


class NoReebVector(CoisotropicError):
    pass


class NotCoisotropic(CoisotropicError):
    pass


class NotLagrangian(CoisotropicError):
    pass


class NotDarboux(CoisotropicError):
    pass


class InvalidComplement(CoisotropicError, ValueError):
    pass


class NotClosed(CoisotropicError):
    pass


class NonvanishingOnM(CoisotropicError):
    pass


class XiNotCoordinate(CoisotropicError):
    pass


class ReebContractionNonzero(CoisotropicError):
    pass


class ReebMismatch(CoisotropicError):
    pass


class DomainViolation(CoisotropicError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class NotCosymplecticOnPath(CoisotropicError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class ToleranceExceeded(CoisotropicError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class ManifestError(CoisotropicError, ValueError):
    """Raised on malformed manifests; ``where`` names the line or field."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where
