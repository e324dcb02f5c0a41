"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`PolyScalar` maps exponent tuples (one entry per variable) to
nonzero :class:`fractions.Fraction` coefficients.  Values are treated as
immutable; every operation returns a new polynomial.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected so that nothing inexact leaks into the exact layer.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class PolyScalar:
    """Polynomial in ``nvars`` variables with Fraction coefficients.

    >>> x = PolyScalar.variable(2, 0)
    >>> y = PolyScalar.variable(2, 1)
    >>> (x + y) ** 2 == x * x + 2 * x * y + y * y
    True
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        self.nvars = int(nvars)
        clean = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.nvars:
                raise ValueError(f"exponent {exp} has length {len(exp)}, expected {self.nvars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = as_fraction(coeff)
            if c:
                clean[exp] = clean.get(exp, 0) + c
        self.terms = {e: c for e, c in clean.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "PolyScalar":
        # trusted constructor: terms already normalized
        obj = cls.__new__(cls)
        obj.nvars = nvars
        obj.terms = terms
        obj._hash = None
        return obj

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "PolyScalar":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars: int, value) -> "PolyScalar":
        c = as_fraction(value)
        return cls._raw(nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "PolyScalar":
        if not 0 <= index < nvars:
            raise IndexError(f"variable {index} out of range for {nvars} variables")
        exp = tuple(1 if i == index else 0 for i in range(nvars))
        return cls._raw(nvars, {exp: Fraction(1)})

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff=1) -> "PolyScalar":
        return cls(len(exp), {tuple(exp): coeff})

    # -- predicates -----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def depends_on(self, index: int) -> bool:
        return any(e[index] for e in self.terms)

    def in_ideal(self, indices: Iterable[int]) -> bool:
        """True if every monomial contains at least one of the given variables."""
        idx = list(indices)
        return all(any(e[i] for i in idx) for e in self.terms)

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "PolyScalar":
        if isinstance(other, PolyScalar):
            if other.nvars != self.nvars:
                raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        return PolyScalar.constant(self.nvars, other)

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return PolyScalar._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return PolyScalar._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PolyScalar):
            try:
                c = as_fraction(other)
            except TypeError:
                return NotImplemented
            if not c:
                return PolyScalar.zero(self.nvars)
            return PolyScalar._raw(self.nvars, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return PolyScalar._raw(self.nvars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = as_fraction(other)
        if not c:
            raise ZeroDivisionError("division of a polynomial by zero")
        return self * (1 / c)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers")
        result = PolyScalar.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, PolyScalar):
            return self.nvars == other.nvars and self.terms == other.terms
        try:
            c = as_fraction(other)
        except TypeError:
            return NotImplemented
        return self == PolyScalar.constant(self.nvars, c)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # -- calculus and substitution ---------------------------------------
    def diff(self, index: int) -> "PolyScalar":
        out = {}
        for e, c in self.terms.items():
            k = e[index]
            if k:
                ne = e[:index] + (k - 1,) + e[index + 1:]
                out[ne] = c * k
        return PolyScalar._raw(self.nvars, out)

    def integrate_unit(self, index: int) -> "PolyScalar":
        """Definite integral over ``[0, 1]`` in variable ``index``; drops that variable."""
        out: dict = {}
        for e, c in self.terms.items():
            ne = e[:index] + e[index + 1:]
            out[ne] = out.get(ne, 0) + c / (e[index] + 1)
        return PolyScalar._raw(self.nvars - 1, {e: c for e, c in out.items() if c})

    def drop_variable(self, index: int) -> "PolyScalar":
        """Remove a variable the polynomial does not depend on."""
        if self.depends_on(index):
            raise ValueError(f"polynomial depends on variable {index}")
        return PolyScalar._raw(self.nvars - 1, {e[:index] + e[index + 1:]: c for e, c in self.terms.items()})

    def reindex(self, nvars: int, mapping: Sequence[int]) -> "PolyScalar":
        """Move variable ``i`` to position ``mapping[i]`` in a ring with ``nvars`` variables."""
        out = {}
        for e, c in self.terms.items():
            ne = [0] * nvars
            for i, k in enumerate(e):
                if k:
                    ne[mapping[i]] += k
            out[tuple(ne)] = c
        return PolyScalar._raw(nvars, out)

    def set_zero(self, indices: Iterable[int]) -> "PolyScalar":
        idx = list(indices)
        return PolyScalar._raw(self.nvars, {e: c for e, c in self.terms.items() if not any(e[i] for i in idx)})

    def substitute(self, values: Sequence["PolyScalar"]) -> "PolyScalar":
        """Compose with polynomials ``values[i]`` replacing variable ``i``."""
        if len(values) != self.nvars:
            raise ValueError(f"need {self.nvars} substitutions, got {len(values)}")
        if not self.terms:
            m = values[0].nvars if values else 0
            return PolyScalar.zero(m)
        m = values[0].nvars
        powers: dict = {}

        def power(i, k):
            key = (i, k)
            if key not in powers:
                powers[key] = values[i] ** k
            return powers[key]

        result = PolyScalar.zero(m)
        for e, c in self.terms.items():
            term = PolyScalar.constant(m, c)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            result = result + term
        return result

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.nvars}")
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= x ** k
            total += v
        return total

    def lambdify(self) -> Callable[[np.ndarray], np.ndarray]:
        """Vectorized float evaluator: ``(N, nvars) -> (N,)``."""
        if not self.terms:
            return lambda pts: np.zeros(np.asarray(pts).shape[0])
        exps = np.array(list(self.terms), dtype=np.int64).reshape(len(self.terms), self.nvars)
        coeffs = np.array([float(c) for c in self.terms.values()])
        used = [i for i in range(self.nvars) if exps[:, i].any()]
        exps = exps[:, used]

        def f(pts):
            pts = np.asarray(pts, dtype=float)
            if not used:
                return np.full(pts.shape[0], coeffs.sum())
            sub = pts[:, used]
            mon = np.prod(sub[:, None, :] ** exps[None, :, :], axis=2)
            return mon @ coeffs

        return f

    # -- display ----------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: item[0], reverse=True)

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"u{i}" for i in range(self.nvars)]
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"PolyScalar({self.to_str()})"
