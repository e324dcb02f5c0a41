"""Coisotropic thickening of a precosymplectic chart structure.

The input lives on a chart ``(x..., t, z...)`` in which ``eta = dt`` and the
characteristic directions ``ker omega ^ ker eta`` are the ``d/dz``.  The output
lives on the chart of the dual bundle, i.e. the input chart extended by one
fiber coordinate ``b_r`` per ``z^r``, and carries

    omega_G = pr^* omega + d(lambda),   lambda = sum_r b_r (dz^r + sum_i A^r_i dx^i),
    eta_G   = pr^* eta,

where ``A`` is the table describing a complement ``G`` of ``K`` that contains
``d/dt``.  The zero section ``b = 0`` is then a coisotropic copy of the input.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import rational as Q
from .coslinalg import (
    CosymplecticLinearData,
    Subspace,
    is_coisotropic,
    reeb_linear,
    skew_rank_kernel,
    volume_coefficient,
)
from .errors import InvalidComplement, NoReebVector, NotClosed, NotCosymplectic, NotDarboux, NotPrecosymplectic
from .forms import Chart, PolyForm, PolyMap, PolyVectorField, d, evaluate, interior, pullback
from .polynomial import PolyScalar, as_fraction
from .report import Check, EquivalenceReport
from .sampling import box_points

__all__ = [
    "PrecosymplecticChartStructure",
    "ComplementChoice",
    "ThickenedStructure",
    "darboux_layout",
    "characteristic_distribution",
    "choose_complement",
    "liouville_form",
    "thickened_structure",
    "verify_embedding",
    "largest_passing_radius",
]

BASE_CAP = 32
FIBER_CAP = 125
TOTAL_CAP = 250


@dataclass(frozen=True)
class PrecosymplecticChartStructure:
    chart: Chart
    omega: PolyForm
    eta: PolyForm
    p: int
    k: int

    def __post_init__(self):
        if self.omega.degree != 2 or self.eta.degree != 1:
            raise ValueError("expected a 2-form omega and a 1-form eta")
        if self.omega.chart != self.chart or self.eta.chart != self.chart:
            raise ValueError("forms live on a different chart")
        if 2 * self.p + self.k + 1 != self.chart.dim:
            raise ValueError(f"dim {self.chart.dim} != 2p + k + 1 with p={self.p}, k={self.k}")
        if not d(self.omega).is_zero():
            raise NotClosed("omega is not closed")
        if not d(self.eta).is_zero():
            raise NotClosed("eta is not closed")

    @classmethod
    def from_forms(cls, chart: Chart, omega: PolyForm, eta: PolyForm) -> "PrecosymplecticChartStructure":
        """Infer ``(p, k)`` from the exact rank of omega at the chart origin."""
        origin = [0] * chart.dim
        data = CosymplecticLinearData(evaluate(omega, origin), evaluate(eta, origin))
        if data.classify() == "neither":
            raise NotPrecosymplectic("eta vanishes on ker omega at the origin")
        r, _ = skew_rank_kernel(data.omega)
        p = r // 2
        return cls(chart, omega, eta, p, chart.dim - 1 - 2 * p)


def darboux_layout(s: PrecosymplecticChartStructure) -> tuple:
    """Split the chart labels into ``(x_labels, t_label, z_labels)``.

    Requires ``eta = dt`` for the chart's time coordinate, ``i_{d/dt} omega = 0``
    and that the coordinates ``u`` with ``i_{d/du} omega = 0`` (other than t)
    number exactly ``k``; those are the ``z``.  Raises NotDarboux otherwise.
    """
    chart = s.chart
    if chart.time_index is None:
        raise NotDarboux("chart has no time coordinate")
    t = chart.time_label
    if s.eta != chart.dx(t):
        raise NotDarboux(f"eta is not d{t}")
    if not interior(chart.partial(t), s.omega).is_zero():
        raise NotDarboux(f"d/d{t} does not lie in ker omega")
    zs = [u for u in chart.names if u != t and interior(chart.partial(u), s.omega).is_zero()]
    xs = [u for u in chart.names if u != t and u not in zs]
    if len(zs) != s.k or len(xs) != 2 * s.p:
        raise NotDarboux(
            f"characteristic directions are not coordinate-spanned: found {len(zs)} kernel coordinates, expected {s.k}"
        )
    return tuple(xs), t, tuple(zs)


def characteristic_distribution(s: PrecosymplecticChartStructure) -> list:
    """Coordinate fields ``d/dz`` spanning ``ker omega ^ ker eta``."""
    _, _, zs = darboux_layout(s)
    return [s.chart.partial(z) for z in zs]


def _fiber_label(z: str, taken: set) -> str:
    label = "b" + z[1:] if z.startswith("z") and len(z) > 1 else "b_" + z
    while label in taken:
        label += "_"
    return label


def thickened_chart(s: PrecosymplecticChartStructure) -> Chart:
    """Input chart followed by one fiber coordinate per ``z``."""
    _, _, zs = darboux_layout(s)
    taken = set(s.chart.names)
    fibers = []
    for z in zs:
        b = _fiber_label(z, taken)
        taken.add(b)
        fibers.append(b)
    return Chart(tuple(s.chart.names) + tuple(fibers), s.chart.time_index)


@dataclass(frozen=True)
class ComplementChoice:
    """A complement ``G`` of ``K`` containing ``d/dt``, encoded by the table ``A[r][i]``.

    ``G`` is spanned by ``d/dx^i - sum_r A^r_i d/dz^r`` and ``d/dt``; the
    projection onto ``K`` along ``G`` sends ``d/dx^i`` to ``sum_r A^r_i d/dz^r``.
    """

    structure: PrecosymplecticChartStructure
    A: tuple
    C: tuple

    @property
    def layout(self):
        return darboux_layout(self.structure)

    @property
    def K_fields(self) -> list:
        return characteristic_distribution(self.structure)

    @property
    def G_fields(self) -> list:
        chart = self.structure.chart
        xs, t, zs = self.layout
        fields = []
        for i, x in enumerate(xs):
            comps = [PolyScalar.zero(chart.dim) for _ in range(chart.dim)]
            comps[chart.index(x)] = PolyScalar.constant(chart.dim, 1)
            for r, z in enumerate(zs):
                comps[chart.index(z)] = -self.A[r][i]
            fields.append(PolyVectorField(chart, comps))
        fields.append(chart.partial(t))
        return fields

    def projection_matrix(self, point) -> tuple:
        """Exact matrix of the projection onto ``K`` along ``G`` at ``point``."""
        chart = self.structure.chart
        xs, _, zs = self.layout
        n = chart.dim
        P = [[Fraction(0)] * n for _ in range(n)]
        for r, z in enumerate(zs):
            zi = chart.index(z)
            P[zi][zi] = Fraction(1)
            for i, x in enumerate(xs):
                P[zi][chart.index(x)] = self.A[r][i].evaluate(point)
        return Q.matrix(P)


def _coerce_entry(value, base: Chart, fiber_labels: Sequence[str], where: str) -> PolyScalar:
    n = base.dim
    if isinstance(value, PolyScalar):
        if value.nvars == n:
            return value
        if value.nvars == n + len(fiber_labels):
            if any(value.depends_on(n + j) for j in range(len(fiber_labels))):
                raise InvalidComplement(f"{where} depends on a fiber coordinate")
            return value.reindex(n, list(range(n)) + [None] * len(fiber_labels))
        raise InvalidComplement(f"{where} is a polynomial in {value.nvars} variables")
    return PolyScalar.constant(n, as_fraction(value))


def choose_complement(s: PrecosymplecticChartStructure, policy="coordinate", C=None) -> ComplementChoice:
    """``policy`` is ``"coordinate"`` (A = 0) or a table.

    A table is either a ``k x 2p`` nested sequence or a mapping
    ``{(z_label, x_label): entry}``; entries are polynomials in the input
    chart (or in the thickened chart, provided they ignore the fiber).
    A nonzero ``C`` (the ``dt`` slot of the projection) is rejected.
    """
    xs, _, zs = darboux_layout(s)
    base = s.chart
    fibers = thickened_chart(s).names[base.dim:]
    zero = PolyScalar.zero(base.dim)
    if C is not None:
        for r, c in enumerate(C):
            c = _coerce_entry(c, base, fibers, f"C[{r}]")
            if not c.is_zero():
                raise InvalidComplement("the projection of d/dt must vanish (C must be zero)")
    if isinstance(policy, str):
        if policy != "coordinate":
            raise InvalidComplement(f"unknown complement policy {policy!r}")
        table = [[zero] * len(xs) for _ in zs]
    elif isinstance(policy, Mapping):
        table = [[zero] * len(xs) for _ in zs]
        for key, value in policy.items():
            z, x = key
            if z not in zs or x not in xs:
                raise InvalidComplement(f"A entry ({z}, {x}) does not index a (z, x) pair")
            table[zs.index(z)][xs.index(x)] = _coerce_entry(value, base, fibers, f"A[{z},{x}]")
    else:
        rows = list(policy)
        if len(rows) != len(zs) or any(len(row) != len(xs) for row in rows):
            raise InvalidComplement(f"A table must be {len(zs)} x {len(xs)}")
        table = [[_coerce_entry(v, base, fibers, f"A[{r}][{i}]") for i, v in enumerate(row)] for r, row in enumerate(rows)]
    return ComplementChoice(s, tuple(tuple(row) for row in table), tuple(zero for _ in zs))


def _projection_map(s: PrecosymplecticChartStructure, big: Chart) -> PolyMap:
    return PolyMap(big, s.chart, big.coords()[: s.chart.dim])


def _lift(f: PolyScalar, big: Chart) -> PolyScalar:
    return f.reindex(big.dim, list(range(f.nvars)))


def liouville_form(c: ComplementChoice) -> PolyForm:
    """``sum_r b_r (dz^r + sum_i A^r_i dx^i)`` on the thickened chart."""
    s = c.structure
    big = thickened_chart(s)
    xs, _, zs = c.layout
    n = s.chart.dim
    lam = PolyForm.zero(big, 1)
    for r, z in enumerate(zs):
        b = big.coord(big.names[n + r])
        inner = big.dx(z)
        for i, x in enumerate(xs):
            inner = inner + _lift(c.A[r][i], big) * big.dx(x)
        lam = lam + b * inner
    return lam


@dataclass(frozen=True)
class ThickenedStructure:
    chart: Chart
    omega_G: PolyForm
    eta_G: PolyForm
    liouville: PolyForm
    base_dim: int
    fiber_dim: int

    @property
    def fiber_labels(self) -> tuple:
        return self.chart.names[self.base_dim:]

    @property
    def base_chart(self) -> Chart:
        return Chart(self.chart.names[: self.base_dim], self.chart.time_index)

    def zero_section(self) -> PolyMap:
        base = self.base_chart
        return PolyMap(base, self.chart, base.coords() + [PolyScalar.zero(base.dim)] * self.fiber_dim)


def thickened_structure(s: PrecosymplecticChartStructure, c: ComplementChoice) -> ThickenedStructure:
    big = thickened_chart(s)
    pr = _projection_map(s, big)
    lam = liouville_form(c)
    omega_G = pullback(pr, s.omega) + d(lam)
    eta_G = pullback(pr, s.eta)
    return ThickenedStructure(big, omega_G, eta_G, lam, s.chart.dim, big.dim - s.chart.dim)


# -- verification --------------------------------------------------------------

def _volume_at(t: ThickenedStructure, point) -> Fraction:
    data = CosymplecticLinearData(evaluate(t.omega_G, point), evaluate(t.eta_G, point))
    return volume_coefficient(data)


def _samples(t: ThickenedStructure, radius, grid: int):
    base = box_points(t.base_dim, radius, grid, cap=BASE_CAP, seed=1)
    fiber = box_points(t.fiber_dim, radius, grid, cap=FIBER_CAP, seed=2)
    pairs = [(bp, fp) for bp in base for fp in fiber]
    if len(pairs) > TOTAL_CAP:
        rng = random.Random(3)
        origin_fiber = tuple(Fraction(0) for _ in range(t.fiber_dim))
        keep = [pr for pr in pairs if pr[1] == origin_fiber]
        rest = [pr for pr in pairs if pr[1] != origin_fiber]
        keep += rng.sample(rest, max(0, TOTAL_CAP - len(keep)))
        pairs = sorted(keep)
    return base, pairs


def _volume_check(t: ThickenedStructure, pairs, same_sign: bool):
    """First failing (point, value) or None; ``same_sign`` also demands the sign of the zero section."""
    zero_fiber = tuple(Fraction(0) for _ in range(t.fiber_dim))
    ref = {}
    for bp, fp in pairs:
        point = bp + fp
        v = _volume_at(t, point)
        if v == 0:
            return point, v
        if same_sign:
            if bp not in ref:
                ref[bp] = v if fp == zero_fiber else _volume_at(t, bp + zero_fiber)
            if (v > 0) != (ref[bp] > 0):
                return point, v
    return None


def largest_passing_radius(t: ThickenedStructure, upper, grid: int, iterations: int = 12) -> Fraction:
    """Bisection for the largest sampled fiber radius at which the volume keeps the zero-section sign."""
    upper = as_fraction(upper)

    def ok(rad):
        base = box_points(t.base_dim, upper, grid, cap=BASE_CAP, seed=1)
        fiber = box_points(t.fiber_dim, rad, grid, cap=FIBER_CAP, seed=2)
        return _volume_check(t, [(bp, fp) for bp in base for fp in fiber], same_sign=True) is None

    if ok(upper):
        return upper
    lo, hi = Fraction(0), upper
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def verify_embedding(t: ThickenedStructure, s: PrecosymplecticChartStructure, radius=Fraction(1, 2), grid: int = 5) -> EquivalenceReport:
    """Certify that the zero section is a coisotropic copy of ``s`` inside ``t``.

    Checks: exact zero-section pullback; nonvanishing volume on the sampled
    box ``|coords| <= radius``; coisotropy of the zero section and ``d/dt`` as
    Reeb field at sampled base points.
    """
    radius = as_fraction(radius)
    report = EquivalenceReport("verify-embedding", box={"radius": radius, "axes": list(t.chart.names)}, grid=grid)
    j = t.zero_section()
    if j.source != s.chart:
        raise ValueError("thickened chart does not extend the structure's chart")
    back_omega = pullback(j, t.omega_G)
    back_eta = pullback(j, t.eta_G)
    same = back_omega == s.omega and back_eta == s.eta
    report.checks.append(Check("zero-section-pullback", same, detail={"omega": back_omega.to_str(), "eta": back_eta.to_str()}))

    base_points, pairs = _samples(t, radius, grid)
    bad = _volume_check(t, pairs, same_sign=False)
    vol_check = Check("volume-nonzero", bad is None, worst_point=None if bad is None else bad[0])
    vol_check.detail["samples"] = len(pairs)
    report.checks.append(vol_check)
    report.info["largest_passing_radius"] = radius if bad is None else largest_passing_radius(t, radius, grid)

    zero_fiber = tuple(Fraction(0) for _ in range(t.fiber_dim))
    tangent = Subspace.span(t.chart.dim, [Q.unit(t.chart.dim, i) for i in range(t.base_dim)])
    time = t.chart.time_index
    coiso = Check("zero-section-coisotropic", True, detail={"samples": len(base_points)})
    reeb = Check("reeb-is-dt", True, detail={"samples": len(base_points)})
    for bp in base_points:
        point = bp + zero_fiber
        data = CosymplecticLinearData(evaluate(t.omega_G, point), evaluate(t.eta_G, point))
        try:
            res = is_coisotropic(data, tangent)
        except NotCosymplectic:
            coiso.passed, coiso.worst_point, coiso.detail["reason"] = False, point, "not cosymplectic"
            break
        if not res:
            coiso.passed, coiso.worst_point, coiso.witness = False, point, res.witness
            break
        try:
            xi = reeb_linear(data)
        except NoReebVector:
            xi = None
        if time is None or xi != Q.unit(t.chart.dim, time):
            reeb.passed, reeb.worst_point, reeb.witness = False, point, xi
            break
    report.checks += [coiso, reeb]
    report.info["base_samples"] = len(base_points)
    report.info["total_samples"] = len(pairs)
    return report
