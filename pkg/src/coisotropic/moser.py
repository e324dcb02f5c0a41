"""Moser-type constructions near a submanifold ``M = {u = 0 for u in vanishing}``.

Symbolic part: relative Poincare primitives built from the scaling homotopy
that contracts the vanishing coordinates.  Numerical part: the two flows that
carry one cosymplectic structure onto another (first matching the 1-forms,
then the 2-forms) and the residual checks certifying the composite.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import (
    DegreeError,
    DomainViolation,
    NonvanishingOnM,
    NotClosed,
    NotCosymplectic,
    NotCosymplecticOnPath,
    ReebContractionNonzero,
    ReebMismatch,
    XiNotCoordinate,
)
from .flow import FlowResult, compose_flows, integrate_flow
from .forms import Chart, PolyForm, PolyMap, PolyVectorField, d, interior, pullback
from .polynomial import PolyScalar, as_fraction
from .report import Check, EquivalenceReport
from .sampling import box_points

__all__ = [
    "SubmanifoldSpec",
    "StructurePath",
    "ReebInterpolation",
    "poincare_primitive",
    "reeb_primitive",
    "interpolation_coefficients",
    "eta_stage",
    "omega_stage",
    "verify_equivalence",
    "coordinate_reeb",
]

FIXED_TOL = 1e-10
SEED_CAP = 729
DEGENERACY = 1e-12


@dataclass(frozen=True)
class SubmanifoldSpec:
    vanishing: tuple

    def __post_init__(self):
        object.__setattr__(self, "vanishing", tuple(self.vanishing))
        if len(set(self.vanishing)) != len(self.vanishing):
            raise ValueError("duplicate vanishing coordinate")

    def indices(self, chart: Chart) -> list:
        idx = [chart.index(u) for u in self.vanishing]
        if chart.time_index is not None and chart.time_index in idx:
            raise ValueError("the time coordinate cannot vanish on M")
        return idx


def _restrict_to_M(w: PolyForm, idx) -> PolyForm:
    """Pullback to ``M``: drop differentials of vanishing coordinates, zero them in coefficients."""
    terms = {}
    for I, f in w.terms.items():
        if any(i in idx for i in I):
            continue
        g = f.set_zero(idx)
        if not g.is_zero():
            terms[I] = g
    return PolyForm._raw(w.chart, w.degree, terms)


def _vanishes_on_M(w: PolyForm, idx) -> bool:
    return all(f.in_ideal(idx) for f in w.terms.values())


def _homotopy_primitive(w: PolyForm, idx) -> PolyForm:
    """``int_0^1 i_{d/ds} h^* w ds`` with ``h(s, u) = u`` scaled by ``s`` on the ``idx`` coordinates."""
    chart = w.chart
    n = chart.dim
    ext = Chart(("__s",) + tuple(chart.names))
    s = ext.coord("__s")
    comps = []
    for i in range(n):
        u = ext.coord(chart.names[i])
        comps.append(s * u if i in idx else u)
    h = PolyMap(ext, chart, comps)
    contracted = interior(ext.partial("__s"), pullback(h, w))
    terms = {}
    for I, f in contracted.terms.items():
        terms[tuple(i - 1 for i in I)] = f.integrate_unit(0)
    return PolyForm(chart, w.degree - 1, terms)


def _check_closed(w: PolyForm):
    if w.degree == 0:
        raise DegreeError("a primitive needs a form of degree >= 1")
    if not d(w).is_zero():
        raise NotClosed("form is not closed")


def poincare_primitive(w: PolyForm, M: SubmanifoldSpec) -> PolyForm:
    """Primitive ``phi`` with ``d(phi) = w`` whose coefficients vanish on ``M``.

    Needs ``w`` closed with zero pullback to ``M``.
    """
    idx = M.indices(w.chart)
    _check_closed(w)
    if not _restrict_to_M(w, idx).is_zero():
        raise NonvanishingOnM("pullback of the form to M is not zero")
    return _homotopy_primitive(w, idx)


def reeb_primitive(w: PolyForm, M: SubmanifoldSpec, xi: PolyVectorField) -> PolyForm:
    """Primitive that also annihilates the coordinate field ``xi``.

    The homotopy only moves the vanishing coordinates, so it commutes with the
    flow of ``xi``; this requires every coefficient of ``w`` to vanish on ``M``.
    """
    label = xi.coordinate_label()
    if label is None:
        raise XiNotCoordinate("xi must be a single coordinate field d/du")
    idx = M.indices(w.chart)
    if w.chart.index(label) in idx:
        raise XiNotCoordinate(f"d/d{label} is normal to M")
    _check_closed(w)
    if not interior(xi, w).is_zero():
        raise ReebContractionNonzero("i_xi w is not zero")
    if not _vanishes_on_M(w, idx):
        raise NonvanishingOnM("some coefficient of the form does not vanish on M")
    return _homotopy_primitive(w, idx)


def coordinate_reeb(omega: PolyForm, eta: PolyForm) -> str | None:
    """Label ``u`` if ``d/du`` is exactly the Reeb field of ``(omega, eta)``."""
    chart = omega.chart
    one = PolyForm.scalar(chart, 1)
    for u in chart.names:
        X = chart.partial(u)
        if interior(X, omega).is_zero() and interior(X, eta) == one:
            return u
    return None


# -- numerical helpers --------------------------------------------------------------

def flat_matrices(omega_vals: np.ndarray, eta_vals: np.ndarray) -> np.ndarray:
    """Batched matrices of ``X -> i_X omega + eta(X) eta``."""
    return np.transpose(omega_vals, (0, 2, 1)) + eta_vals[:, :, None] * eta_vals[:, None, :]


def _solve_flat(omega_vals, eta_vals, rhs, pts, t=None):
    F = flat_matrices(omega_vals, eta_vals)
    det = np.linalg.det(F)
    bad = np.isfinite(det) & (np.abs(det) <= DEGENERACY)
    if bad.any():
        i = int(np.argmax(bad))
        where = f" at t={t:.6g}" if t is not None else ""
        raise NotCosymplecticOnPath(f"structure degenerates{where}", point=pts[i].tolist())
    return np.linalg.solve(F, rhs[:, :, None])[:, :, 0]


def reeb_numeric(omega_fn, eta_fn) -> Callable[[np.ndarray], np.ndarray]:
    def xi(pts):
        eta = eta_fn(pts)
        try:
            return _solve_flat(omega_fn(pts), eta, eta, pts)
        except NotCosymplecticOnPath as exc:
            raise NotCosymplectic(str(exc)) from None

    return xi


def interpolation_coefficients() -> tuple:
    """``(a, b)`` as polynomials in ``(t, e10, e01)`` with ``e10 = eta1(xi0)`` and ``e01 = eta0(xi1)``."""
    t, e10, e01 = (PolyScalar.variable(3, i) for i in range(3))
    a = (1 - t + t * e10) * (1 - t)
    b = (t + (1 - t) * e01) * t
    return a, b


@dataclass
class StructurePath:
    """Linear path ``start + t * difference`` between two forms of equal degree."""

    kind: str
    start: PolyForm
    end: PolyForm
    fixed_eta: PolyForm | None = None

    def __post_init__(self):
        if not d(self.difference).is_zero():
            raise NotClosed("the difference along the path is not closed")

    @property
    def difference(self) -> PolyForm:
        return self.end - self.start

    def at(self, t) -> PolyForm:
        return self.start + self.difference * as_fraction(t)


@dataclass
class ReebInterpolation:
    """``xi_t = a(t) xi0 + b(t) xi1`` and its normalisation ``N_t = xi_t / eta_t(xi_t)``."""

    xi0: Callable
    xi1: Callable
    eta0: Callable
    eta1: Callable

    def __post_init__(self):
        a, b = interpolation_coefficients()
        self._a, self._b = a.lambdify(), b.lambdify()

    def normalized(self, t: float, pts: np.ndarray):
        """Return ``(N_t, eta_t(xi_t))`` at ``pts``."""
        x0, x1 = self.xi0(pts), self.xi1(pts)
        e0, e1 = self.eta0(pts), self.eta1(pts)
        e10 = np.einsum("ni,ni->n", e1, x0)
        e01 = np.einsum("ni,ni->n", e0, x1)
        args = np.stack([np.full(len(pts), t), e10, e01], axis=1)
        xi_t = self._a(args)[:, None] * x0 + self._b(args)[:, None] * x1
        eta_t = (1 - t) * e0 + t * e1
        den = np.einsum("ni,ni->n", eta_t, xi_t)
        return xi_t / den[:, None], den


def _seeds(chart: Chart, radius, grid: int) -> np.ndarray:
    pts = box_points(chart.dim, radius, grid, cap=SEED_CAP, seed=7)
    return np.array([[float(c) for c in p] for p in pts])


def _M_seeds(seeds: np.ndarray, idx) -> np.ndarray:
    on = seeds.copy()
    on[:, idx] = 0.0
    return np.unique(on, axis=0)


def _worst(values: np.ndarray, seeds: np.ndarray):
    values = np.where(np.isfinite(values), values, np.inf)
    i = int(np.argmax(values))
    return float(values[i]), [float(v) for v in seeds[i]]


def _residual_check(name, values, seeds, tol) -> Check:
    res, pt = _worst(values, seeds)
    return Check(name, res < tol, residual=res, worst_point=pt)


def _two_form_residual(J, at_image, at_seed):
    pulled = np.einsum("nki,nkl,nlj->nij", J, at_image, J)
    return np.abs(pulled - at_seed).max(axis=(1, 2))


def _one_form_residual(J, at_image, at_seed):
    return np.abs(np.einsum("nki,nk->ni", J, at_image) - at_seed).max(axis=1)


def _fixed_check(field_stages, M_pts, steps) -> Check:
    if len(M_pts) == 0:
        return Check("fixes-M", True, residual=0.0)
    res = compose_flows(field_stages, M_pts, steps, jacobians=False)
    disp = np.abs(res.endpoints - M_pts).max(axis=1)
    c = _residual_check("fixes-M", disp, M_pts, FIXED_TOL)
    c.detail["samples"] = len(M_pts)
    return c


# -- eta stage --------------------------------------------------------------------------

def _eta_field(eta0, eta1, omega0, omega1, M):
    chart = eta0.chart
    idx = M.indices(chart)
    nu = eta1 - eta0
    if not d(nu).is_zero():
        raise NotClosed("eta1 - eta0 is not closed")
    if not _vanishes_on_M(nu, idx):
        raise NonvanishingOnM("eta0 and eta1 differ at points of M")
    phi = poincare_primitive(nu, M) if not nu.is_zero() else PolyForm.zero(chart, 0)
    phi_fn = phi.lambdify()
    e0, e1 = eta0.lambdify(), eta1.lambdify()
    interp = ReebInterpolation(reeb_numeric(omega0.lambdify(), e0), reeb_numeric(omega1.lambdify(), e1), e0, e1)

    def Z(t, pts):
        N, den = interp.normalized(t, pts)
        bad = np.isfinite(den) & (den <= 0)
        if bad.any():
            i = int(np.argmax(bad))
            raise DomainViolation(f"eta_t(xi_t) <= 0 at t={t:.6g}", point=pts[i].tolist())
        return -phi_fn(pts)[:, None] * N

    return Z, phi, nu, interp


def eta_stage(eta0: PolyForm, eta1: PolyForm, omega0: PolyForm, M: SubmanifoldSpec, grid: int = 5, steps: int = 64,
              omega1: PolyForm | None = None, radius=Fraction(1, 2), tol: float = 1e-5, seeds=None):
    """Flow ``g`` with ``g^* eta1 = eta0`` fixing ``M``; returns ``(FlowResult, report)``.

    ``omega1`` (default ``omega0``) supplies the Reeb field ``xi1`` used in the
    interpolation ``N_t``.
    """
    omega1 = omega0 if omega1 is None else omega1
    Z, phi, nu, interp = _eta_field(eta0, eta1, omega0, omega1, M)
    chart = eta0.chart
    seeds = _seeds(chart, radius, grid) if seeds is None else np.atleast_2d(np.asarray(seeds, dtype=float))
    flow = integrate_flow(Z, seeds, steps)
    report = EquivalenceReport("eta-stage", box={"radius": as_fraction(radius), "axes": list(chart.names)}, grid=grid, steps=steps)
    report.checks.append(Check("primitive-exact", d(phi) == nu, detail={"phi": phi.to_str()}))
    J, img = flow.jacobian_estimates, flow.endpoints
    e0, e1 = eta0.lambdify(), eta1.lambdify()
    report.checks.append(_residual_check("pullback-eta", _one_form_residual(J, e1(img), e0(seeds)), seeds, tol))
    report.checks.append(_fixed_check([Z], _M_seeds(seeds, M.indices(chart)), steps))
    pushed = np.einsum("nij,nj->ni", J, interp.xi0(seeds))
    report.checks.append(_residual_check("reeb-transport", np.abs(pushed - interp.xi1(img)).max(axis=1), seeds, tol))
    report.checks.append(Check("domain", True, detail={"condition": "eta_t(xi_t) > 0 at every RK stage"}))
    report.info["diverged"] = int(flow.diverged.sum())
    return flow, report


# -- omega stage ------------------------------------------------------------------------

def _omega_field(omega0_fn, omega1_fn, eta_fn, phi_fn):
    def Y(t, pts):
        o0 = omega0_fn(pts)
        om = o0 + t * (omega1_fn(pts) - o0)
        return _solve_flat(om, eta_fn(pts), -phi_fn(pts), pts, t)

    return Y


def _check_shared_reeb(omega0, omega1, eta, xi):
    one = PolyForm.scalar(eta.chart, 1)
    if interior(xi, eta) != one:
        raise ReebMismatch("eta(xi) is not 1")
    for name, om in (("omega0", omega0), ("omega1", omega1)):
        if not interior(xi, om).is_zero():
            raise ReebMismatch(f"xi is not in the kernel of {name}")


def omega_stage(omega0: PolyForm, omega1: PolyForm, eta: PolyForm, xi: PolyVectorField, M: SubmanifoldSpec,
                grid: int = 5, steps: int = 64, radius=Fraction(1, 2), tol: float = 1e-5, seeds=None):
    """Flow ``f`` with ``f^* omega1 = omega0`` and ``f^* eta = eta``; returns ``(FlowResult, report)``.

    The field solves ``i_Y omega_t + eta(Y) eta = -phi`` with ``phi`` the
    primitive of ``omega1 - omega0`` that annihilates ``xi``.
    """
    _check_shared_reeb(omega0, omega1, eta, xi)
    w = omega1 - omega0
    phi = reeb_primitive(w, M, xi) if not w.is_zero() else PolyForm.zero(w.chart, 1)
    chart = eta.chart
    o0, o1, e, p = omega0.lambdify(), omega1.lambdify(), eta.lambdify(), phi.lambdify()
    Y = _omega_field(o0, o1, e, p)
    seeds = _seeds(chart, radius, grid) if seeds is None else np.atleast_2d(np.asarray(seeds, dtype=float))
    flow = integrate_flow(Y, seeds, steps)
    report = EquivalenceReport("omega-stage", box={"radius": as_fraction(radius), "axes": list(chart.names)}, grid=grid, steps=steps)
    report.checks.append(Check("primitive-exact", d(phi) == w and interior(xi, phi).is_zero(), detail={"phi": phi.to_str()}))
    J, img = flow.jacobian_estimates, flow.endpoints
    report.checks.append(_residual_check("pullback-omega", _two_form_residual(J, o1(img), o0(seeds)), seeds, tol))
    report.checks.append(_residual_check("pullback-eta", _one_form_residual(J, e(img), e(seeds)), seeds, tol))
    report.checks.append(_fixed_check([Y], _M_seeds(seeds, M.indices(chart)), steps))
    eta_of_Y = max(np.abs(np.einsum("ni,ni->n", e(seeds), Y(t, seeds))).max() for t in (0.0, 0.5, 1.0))
    report.checks.append(Check("eta-of-Y", eta_of_Y < 1e-12, residual=float(eta_of_Y)))
    report.info["diverged"] = int(flow.diverged.sum())
    return flow, report


# -- composite ------------------------------------------------------------------------------

def _gauss(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return (x + 1) / 2, w / 2


def _numeric_transport(Z, omega0_fn, steps: int):
    """``q -> ((g^{-1})^* omega0)(q)`` using the backward eta-flow and finite-difference Jacobians."""

    def omega_bar(pts):
        back = integrate_flow(Z, pts, steps, t0=1.0, t1=0.0)
        J = back.jacobian_estimates
        return np.einsum("nki,nkl,nlj->nij", J, omega0_fn(back.endpoints), J)

    return omega_bar


def chebyshev_surrogate(fn, lo, hi, nodes: int):
    """Tensor Chebyshev interpolant of ``fn`` on the box ``[lo, hi]``.

    ``fn`` maps ``(N, n)`` points to ``(N, ...)`` values; the returned callable
    has the same signature and is cheap to evaluate.
    """
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    n = len(lo)
    x = np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)  # Chebyshev points of the first kind
    V = np.polynomial.chebyshev.chebvander(x, nodes - 1)
    Vinv = np.linalg.inv(V)
    mid, half = (hi + lo) / 2, (hi - lo) / 2
    grid = np.stack(np.meshgrid(*([x] * n), indexing="ij"), axis=-1).reshape(-1, n)
    vals = fn(mid + half * grid)
    tail = vals.shape[1:]
    coeffs = vals.reshape((nodes,) * n + tail)
    for axis in range(n):
        coeffs = np.moveaxis(np.tensordot(Vinv, coeffs, axes=([1], [axis])), 0, axis)

    def surrogate(pts):
        pts = np.atleast_2d(np.asarray(pts, float))
        u = (pts - mid) / half
        out = coeffs
        for axis in range(n):
            Va = np.polynomial.chebyshev.chebvander(u[:, axis], nodes - 1)  # (N, nodes)
            if axis == 0:
                out = np.tensordot(Va, out, axes=([1], [0]))  # (N, rest...)
            else:
                out = np.einsum("nk,nk...->n...", Va, out)
        return out

    return surrogate


def _numeric_primitive(w_fn, idx, n: int, nodes: int = 10):
    """Homotopy primitive of a 2-form given pointwise, by Gauss quadrature in the scaling parameter."""
    s_nodes, weights = _gauss(nodes)
    mask = np.zeros(n)
    mask[idx] = 1.0

    def phi(pts):
        pts = np.atleast_2d(pts)
        out = np.zeros_like(pts)
        normal = pts * mask  # d/ds of the homotopy
        for s, wt in zip(s_nodes, weights):
            scale = 1.0 + (s - 1.0) * mask
            vals = w_fn(pts * scale)
            out += wt * np.einsum("ni,nij->nj", normal, vals) * scale
        return out

    return phi


def _surrogate_box(flow: FlowResult, radius):
    """Bounding box of the eta-flow trajectories, widened by a quarter of the radius."""
    traj = flow.trajectories.reshape(-1, flow.trajectories.shape[-1])
    traj = traj[np.isfinite(traj).all(axis=1)]
    margin = 0.25 * float(as_fraction(radius))
    return traj.min(axis=0) - margin, traj.max(axis=0) + margin


def verify_equivalence(struct0: tuple, struct1: tuple, M: SubmanifoldSpec, grid: int = 5, steps: int = 64,
                       tol: float = 1e-5, radius=Fraction(1, 2), transport: str = "auto", quadrature: int = 10) -> EquivalenceReport:
    """Build ``psi = f o g`` carrying ``struct0`` to ``struct1`` near ``M`` and certify it on a grid.

    ``transport`` picks how ``(g^{-1})^* omega0`` is obtained: ``"exact"``
    (both Reeb fields are the same coordinate field, so ``g`` preserves
    ``omega0``), ``"numeric"`` (backward flow) or ``"auto"``.
    """
    (omega0, eta0), (omega1, eta1) = struct0, struct1
    chart = omega0.chart
    idx = M.indices(chart)
    for label, form in (("omega", omega1 - omega0), ("eta", eta1 - eta0)):
        if not _vanishes_on_M(form, idx):
            raise NonvanishingOnM(f"the two {label} forms differ at points of M")
    seeds = _seeds(chart, radius, grid)
    o0, o1, e0, e1 = omega0.lambdify(), omega1.lambdify(), eta0.lambdify(), eta1.lambdify()
    for name, (o, e) in (("struct0", (o0, e0)), ("struct1", (o1, e1))):
        det = np.linalg.det(flat_matrices(o(seeds), e(seeds)))
        if (np.abs(det) <= DEGENERACY).any():
            i = int(np.argmax(np.abs(det) <= DEGENERACY))
            raise NotCosymplectic(f"{name} is not cosymplectic at {seeds[i].tolist()}")

    report = EquivalenceReport("equivalence", box={"radius": as_fraction(radius), "axes": list(chart.names)}, grid=grid, steps=steps)
    g_flow, g_report = eta_stage(eta0, eta1, omega0, M, grid, steps, omega1=omega1, radius=radius, tol=tol, seeds=seeds)
    Z, *_ = _eta_field(eta0, eta1, omega0, omega1, M)
    for c in g_report.checks:
        c.name = "eta-stage/" + c.name
        report.checks.append(c)

    u0, u1 = coordinate_reeb(omega0, eta0), coordinate_reeb(omega1, eta1)
    exact = u0 is not None and u0 == u1
    if transport == "exact" and not exact:
        raise XiNotCoordinate("exact transport needs both Reeb fields to be the same coordinate field")
    use_exact = exact and transport != "numeric"
    report.info["transport"] = "exact" if use_exact else "numeric"

    if use_exact:
        xi = chart.partial(u1)
        _, f_report = omega_stage(omega0, omega1, eta1, xi, M, grid, steps, radius=radius, tol=tol, seeds=g_flow.endpoints)
        w = omega1 - omega0
        phi = reeb_primitive(w, M, xi) if not w.is_zero() else PolyForm.zero(chart, 1)
        Y = _omega_field(o0, o1, e1, phi.lambdify())
        for c in f_report.checks:
            c.name = "omega-stage/" + c.name
            report.checks.append(c)
    else:
        u = coordinate_reeb(omega1, eta1)
        if u is None:
            report.checks.append(Check("transported-reeb", False, detail={"reason": "xi1 is not a coordinate field"}))
            return report
        lo, hi = _surrogate_box(g_flow, radius)
        nodes = max(6, min(16, int(round(4096 ** (1 / chart.dim)))))
        obar = chebyshev_surrogate(_numeric_transport(Z, o0, steps), lo, hi, nodes)
        report.info["surrogate"] = {"nodes_per_axis": nodes, "lower": lo.tolist(), "upper": hi.tolist()}
        img = g_flow.endpoints
        xi1 = reeb_numeric(o1, e1)(img)
        xibar = reeb_numeric(obar, e1)(img)
        check = _residual_check("transported-reeb", np.abs(xibar - xi1).max(axis=1), seeds, tol)
        report.checks.append(check)
        if not check.passed:
            report.info["note"] = "Reeb field of the transported structure differs from xi1; second stage skipped"
            return report
        phi = _numeric_primitive(lambda p: o1(p) - obar(p), idx, chart.dim, quadrature)
        Y = _omega_field(obar, o1, e1, phi)

    psi = compose_flows([Z, Y], seeds, steps)
    J, img = psi.jacobian_estimates, psi.endpoints
    report.checks.append(_residual_check("pullback-omega", _two_form_residual(J, o1(img), o0(seeds)), seeds, tol))
    report.checks.append(_residual_check("pullback-eta", _one_form_residual(J, e1(img), e0(seeds)), seeds, tol))
    M_pts = _M_seeds(seeds, idx)
    fixed = _fixed_check([Z, Y], M_pts, steps)
    fixed.passed = fixed.residual < 1e-8
    report.checks.append(fixed)
    report.info["diverged"] = int(psi.diverged.sum())
    return report
