"""Exact linear algebra of (pre)symplectic and (pre)cosymplectic vector spaces.

Conventions
-----------
* A skew form is stored as its matrix ``M`` with ``f(u, v) = u^T M v``.
* The canonical form of rank ``2p`` is ``sum_i e^i ^ e^{p+i}``, i.e. the
  block matrix ``[[0, I_p], [-I_p, 0]]`` followed by zeros.
* Covectors and vectors are plain tuples of Fractions.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

from . import rational as Q
from .errors import NoReebVector, NotCoisotropic, NotCosymplectic, NotLagrangian, NotPrecosymplectic

__all__ = [
    "SkewForm",
    "CosymplecticLinearData",
    "Subspace",
    "DarbouxBasis",
    "CoisotropyResult",
    "RankCheck",
    "canonical_matrix",
    "skew_rank_kernel",
    "darboux_presymplectic",
    "darboux_precosymplectic",
    "flat",
    "flat_inverse",
    "reeb_linear",
    "symplectic_complement",
    "cosymplectic_complement",
    "is_coisotropic",
    "direct_rank_check",
    "lagrangian_normal_form",
    "canonical_lagrangian_form",
    "volume_coefficient",
]


@dataclass(frozen=True)
class SkewForm:
    mat: tuple

    def __post_init__(self):
        m = Q.matrix(self.mat)
        if not Q.is_skew(m):
            raise ValueError("matrix is not skew-symmetric")
        object.__setattr__(self, "mat", m)

    @property
    def n(self) -> int:
        return len(self.mat)

    def __call__(self, u, v) -> Fraction:
        return Q.bilinear(self.mat, u, v)


@dataclass(frozen=True)
class CosymplecticLinearData:
    omega: SkewForm
    eta: tuple

    def __post_init__(self):
        if not isinstance(self.omega, SkewForm):
            object.__setattr__(self, "omega", SkewForm(self.omega))
        eta = Q.vector(self.eta)
        if len(eta) != self.omega.n:
            raise ValueError(f"eta has length {len(eta)}, omega is {self.omega.n}x{self.omega.n}")
        object.__setattr__(self, "eta", eta)

    @property
    def n(self) -> int:
        return self.omega.n

    def classify(self) -> str:
        """``"cosymplectic"``, ``"precosymplectic"`` (degenerate but admissible) or ``"neither"``."""
        r, kernel = skew_rank_kernel(self.omega)
        if not any(Q.dot(self.eta, v) for v in kernel.basis):
            return "neither"
        return "cosymplectic" if r == self.n - 1 else "precosymplectic"


@dataclass(frozen=True)
class Subspace:
    """Column span of ``basis``; stored as a list of independent column vectors."""

    n: int
    basis: tuple

    def __post_init__(self):
        cols = [Q.vector(c) for c in self.basis]
        if any(len(c) != self.n for c in cols):
            raise ValueError("basis vector of the wrong length")
        if cols and Q.rank(Q.from_columns(cols, self.n)) != len(cols):
            raise ValueError("basis vectors are linearly dependent")
        object.__setattr__(self, "basis", tuple(cols))

    @classmethod
    def span(cls, n: int, vectors: Sequence[Sequence]) -> "Subspace":
        vecs = [Q.vector(v) for v in vectors]
        return cls(n, tuple(Q.independent_columns([v for v in vecs if any(v)], n)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, tuple(Q.unit(n, i) for i in range(n)))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, ())

    @property
    def dim(self) -> int:
        return len(self.basis)

    def matrix(self):
        """``n x dim`` matrix with the basis as columns."""
        return Q.from_columns(self.basis, self.n)

    def contains(self, v: Sequence) -> bool:
        v = Q.vector(v)
        if not any(v):
            return True
        if not self.basis:
            return False
        return Q.rank(Q.from_columns(list(self.basis) + [v], self.n)) == self.dim

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.n == other.n and self.dim == other.dim and self.contains_subspace(other)

    def __hash__(self):
        return hash((self.n, self.dim))

    def intersect(self, other: "Subspace") -> "Subspace":
        # solve A a = B b
        if not self.basis or not other.basis:
            return Subspace.zero(self.n)
        cols = list(self.basis) + [tuple(-x for x in v) for v in other.basis]
        null = Q.nullspace(Q.from_columns(cols, self.n))
        vecs = [tuple(sum((c * b[i] for c, b in zip(z[: self.dim], self.basis)), Fraction(0)) for i in range(self.n)) for z in null]
        return Subspace.span(self.n, vecs)


@dataclass(frozen=True)
class DarbouxBasis:
    """Columns ``(x_1..x_2p[, t], kernel...)``; ``t_index`` is set for cosymplectic data."""

    basis: tuple
    p: int
    k: int
    t_index: int | None = None

    def columns(self) -> list:
        return Q.columns(self.basis)

    @property
    def t_column(self):
        return None if self.t_index is None else self.columns()[self.t_index]


def canonical_matrix(n: int, p: int) -> tuple:
    """``[[0, I_p], [-I_p, 0]]`` padded with zeros to ``n x n``."""
    m = [[Fraction(0)] * n for _ in range(n)]
    for i in range(p):
        m[i][p + i] = Fraction(1)
        m[p + i][i] = Fraction(-1)
    return tuple(tuple(r) for r in m)


def _as_skew(f) -> SkewForm:
    return f if isinstance(f, SkewForm) else SkewForm(f)


def skew_rank_kernel(f) -> tuple:
    """Rank (always even) and kernel of a skew form."""
    f = _as_skew(f)
    kernel = Q.nullspace(f.mat, f.n)
    return f.n - len(kernel), Subspace(f.n, tuple(kernel))


def darboux_presymplectic(f) -> DarbouxBasis:
    """Symplectic Gram-Schmidt with lexicographically smallest pivot pairs.

    Returns ``B`` with ``B^T f B = canonical_matrix(n, p)``.
    """
    f = _as_skew(f)
    n = f.n
    vecs = [list(Q.unit(n, i)) for i in range(n)]
    gram = [list(r) for r in f.mat]  # gram[a][b] = f(vecs[a], vecs[b])
    alive = list(range(n))
    us, ws = [], []
    while True:
        pair = next(((a, b) for a in alive for b in alive if b > a and gram[a][b]), None)
        if pair is None:
            break
        a, b = pair
        scale = 1 / gram[a][b]
        vecs[b] = [x * scale for x in vecs[b]]
        for c in range(n):
            gram[b][c] *= scale
            gram[c][b] *= scale
        alive.remove(a)
        alive.remove(b)
        us.append(a)
        ws.append(b)
        # v <- v - f(v, w) u + f(v, u) w makes v orthogonal to u and w
        for c in alive:
            fvw, fvu = gram[c][b], gram[c][a]
            if fvw:
                vecs[c] = [x - fvw * y for x, y in zip(vecs[c], vecs[a])]
            if fvu:
                vecs[c] = [x + fvu * y for x, y in zip(vecs[c], vecs[b])]
        for c in alive:
            for e in alive:
                gram[c][e] = gram[c][e] - gram[c][b] * gram[a][e] + gram[c][a] * gram[b][e]
        for c in alive:
            gram[c][a] = gram[a][c] = gram[c][b] = gram[b][c] = Fraction(0)
    order = us + ws + alive
    cols = [tuple(vecs[i]) for i in order]
    return DarbouxBasis(Q.from_columns(cols, n), len(us), len(alive))


def _adapted_kernel(data: CosymplecticLinearData):
    """Reeb direction and a basis of ker(omega) cap ker(eta).

    The RREF kernel basis is re-based so the first vector with ``eta != 0``
    (normalized to ``eta = 1``) is the Reeb direction and the others are
    corrected into ``ker eta``.
    """
    _, kernel = skew_rank_kernel(data.omega)
    vals = [Q.dot(data.eta, v) for v in kernel.basis]
    j = next((i for i, v in enumerate(vals) if v), None)
    if j is None:
        return None, list(kernel.basis)
    xi = tuple(x / vals[j] for x in kernel.basis[j])
    rest = [tuple(a - vals[i] * b for a, b in zip(kernel.basis[i], xi)) for i in range(len(vals)) if i != j]
    return xi, rest


def darboux_precosymplectic(data: CosymplecticLinearData) -> DarbouxBasis:
    """Basis ``(x_1..x_2p, t, z_1..z_k)`` putting ``(omega, eta)`` into Darboux form."""
    xi, zs = _adapted_kernel(data)
    if xi is None:
        raise NotPrecosymplectic("eta vanishes on ker(omega): no Reeb direction exists")
    pre = darboux_presymplectic(data.omega)
    cols = pre.columns()[: 2 * pre.p]
    xs = [tuple(a - Q.dot(data.eta, c) * b for a, b in zip(c, xi)) for c in cols]
    basis = Q.from_columns(xs + [xi] + zs, data.n)
    return DarbouxBasis(basis, pre.p, len(zs), t_index=2 * pre.p)


def flat_matrix(data: CosymplecticLinearData) -> tuple:
    """Matrix ``F`` with ``flat(X) = F X``: ``F = M^T + eta eta^T``."""
    m, eta, n = data.omega.mat, data.eta, data.n
    return tuple(tuple(m[i][j] + eta[j] * eta[i] for i in range(n)) for j in range(n))


def flat(data: CosymplecticLinearData, X: Sequence) -> tuple:
    """``i_X omega + eta(X) eta``."""
    return Q.matvec(flat_matrix(data), Q.vector(X))


def flat_inverse(data: CosymplecticLinearData, a: Sequence) -> tuple:
    inv = Q.inverse(flat_matrix(data))
    if inv is None:
        raise NotCosymplectic("flat map is singular: data is not cosymplectic")
    return Q.matvec(inv, Q.vector(a))


def reeb_linear(data: CosymplecticLinearData) -> tuple:
    """Solution of ``omega(xi, .) = 0, eta(xi) = 1``; the Darboux t-column when not unique."""
    xi, _ = _adapted_kernel(data)
    if xi is None:
        raise NoReebVector("omega xi = 0, eta(xi) = 1 is inconsistent")
    return xi


def symplectic_complement(f, W: Subspace) -> Subspace:
    """``{X : f(X, w) = 0 for all w in W}``."""
    f = _as_skew(f)
    rows = [Q.matvec(f.mat, w) for w in W.basis]
    return Subspace(f.n, tuple(Q.nullspace(tuple(rows), f.n)))


def cosymplectic_complement(data: CosymplecticLinearData, W: Subspace) -> Subspace:
    """``{X : eta(X) = 0, omega(X, w) = 0 for all w in W}``."""
    rows = [Q.matvec(data.omega.mat, w) for w in W.basis] + [data.eta]
    return Subspace(data.n, tuple(Q.nullspace(tuple(rows), data.n)))


@dataclass(frozen=True)
class CoisotropyResult:
    coisotropic: bool
    witness: tuple | None = None
    reason: str = ""

    def __bool__(self):
        return self.coisotropic


def is_coisotropic(data: CosymplecticLinearData, W: Subspace) -> CoisotropyResult:
    """Reeb vector in ``W`` and ``W^perp`` (cosymplectic complement) inside ``W``."""
    if data.classify() != "cosymplectic":
        raise NotCosymplectic("coisotropy is defined for cosymplectic data")
    xi = reeb_linear(data)
    if not W.contains(xi):
        return CoisotropyResult(False, xi, "Reeb vector not in subspace")
    for v in cosymplectic_complement(data, W).basis:
        if not W.contains(v):
            return CoisotropyResult(False, v, "complement vector not in subspace")
    return CoisotropyResult(True)


@dataclass(frozen=True)
class RankCheck:
    restricted_rank: int
    predicted: int

    @property
    def match(self) -> bool:
        return self.restricted_rank == self.predicted


def _restricted_rank(m, W: Subspace) -> int:
    B = W.matrix()
    return Q.rank(Q.matmul(Q.transpose(B), Q.matmul(m, B))) if W.dim else 0


def direct_rank_check(data, W: Subspace) -> RankCheck:
    """Rank of the pulled-back form on a coisotropic ``W`` against the predicted value.

    Pass :class:`CosymplecticLinearData` for the cosymplectic statement
    (prediction ``2 dim W - n - 1``) or a nondegenerate :class:`SkewForm`
    for the symplectic one (``2 dim W - n``).
    """
    if isinstance(data, CosymplecticLinearData):
        res = is_coisotropic(data, W)
        if not res:
            raise NotCoisotropic(f"{res.reason}: witness {res.witness}")
        r, kernel = skew_rank_kernel(data.omega)
        # the rank count assumes ker(omega) = span(xi) inside W
        if kernel.dim != 1 or not W.contains_subspace(kernel):
            raise NotCoisotropic("ker(omega) is not the Reeb line inside W")
        return RankCheck(_restricted_rank(data.omega.mat, W), 2 * W.dim - data.n - 1)
    f = _as_skew(data)
    r, _ = skew_rank_kernel(f)
    if r != f.n:
        raise NotCosymplectic("symplectic variant needs a nondegenerate form")
    perp = symplectic_complement(f, W)
    if not W.contains_subspace(perp):
        raise NotCoisotropic("symplectic complement is not contained in W")
    return RankCheck(_restricted_rank(f.mat, W), 2 * W.dim - f.n)


def canonical_lagrangian_form(m: int) -> tuple:
    """Matrix of ``omega_L((l, a), (l', a')) = a'(l) - a(l')`` in coordinates ``(l, a)``."""
    return canonical_matrix(2 * m, m)


def lagrangian_normal_form(f, L: Subspace) -> tuple:
    """Linear iso ``phi: V -> L + L*`` with ``phi^* omega_L = f`` and ``phi|_L = id``.

    Coordinates on ``L + L*`` are (coefficients in ``L.basis``, dual coefficients).
    Returns the ``n x n`` matrix of ``phi``.
    """
    f = _as_skew(f)
    n = f.n
    if n % 2 or skew_rank_kernel(f)[0] != n:
        raise NotLagrangian("ambient form must be nondegenerate")
    m = n // 2
    if L.n != n or L.dim != m:
        raise NotLagrangian(f"dimension {L.dim} is not half of {n}")
    ls = list(L.basis)
    if any(f(a, b) for a in ls for b in ls):
        raise NotLagrangian("form does not vanish on L")
    # complement spanned by unit vectors, greedy in index order
    comp = Q.independent_columns(ls + [Q.unit(n, i) for i in range(n)], n)[m:]
    pair = Q.matrix([[f(l, c) for c in comp] for l in ls])
    inv = Q.inverse(pair)
    # w_j = sum_c comp_c inv[c][j]  gives f(l_i, w_j) = delta_ij
    ws = [tuple(sum((inv[c][j] * comp[c][r] for c in range(m)), Fraction(0)) for r in range(n)) for j in range(m)]
    G = [[f(a, b) for b in ws] for a in ws]
    ws = [
        tuple(w[r] + sum((G[k][j] * ls[k][r] for k in range(m)), Fraction(0)) / 2 for r in range(n))
        for j, w in enumerate(ws)
    ]
    B = Q.from_columns(ls + ws, n)
    return Q.inverse(B)


def volume_coefficient(data: CosymplecticLinearData) -> Fraction:
    """Coefficient of ``eta ^ omega^r`` on ``e^1 ^ ... ^ e^n`` for odd ``n = 2r + 1``.

    Computed as ``r! * Pf([[M, eta^T], [-eta, 0]])``; zero for even ``n``.
    """
    n = data.n
    if n % 2 == 0:
        return Fraction(0)
    r = (n - 1) // 2
    m = data.omega.mat
    border = [list(row) + [data.eta[i]] for i, row in enumerate(m)]
    border.append([-x for x in data.eta] + [Fraction(0)])
    return factorial(r) * Q.pfaffian(tuple(tuple(r_) for r_ in border))
