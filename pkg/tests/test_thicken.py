import random
from fractions import Fraction

import pytest

from coisotropic import rational as Q
from coisotropic.coslinalg import SkewForm, skew_rank_kernel
from coisotropic.errors import InvalidComplement, NotClosed, NotDarboux
from coisotropic.forms import Chart, PolyForm, PolyMap, d, evaluate, interior, pullback, wedge
from coisotropic.polynomial import PolyScalar
from coisotropic.thicken import (
    PrecosymplecticChartStructure,
    characteristic_distribution,
    choose_complement,
    darboux_layout,
    liouville_form,
    thickened_structure,
    verify_embedding,
)

from conftest import darboux_structure, random_A_table


def local_formula(s, c, T):
    """Term-by-term expansion: pr*omega + sum db_r ^ (dz^r + A dx) + sum b_r (dA/dx dx + dA/dz dz) ^ dx^i."""
    big = T.chart
    n = s.chart.dim
    xs, _, zs = darboux_layout(s)
    pr = PolyMap(big, s.chart, big.coords()[:n])
    out = pullback(pr, s.omega)
    lift = lambda f: f.reindex(big.dim, list(range(n)))
    for r, z in enumerate(zs):
        b_label = big.names[n + r]
        inner = big.dx(z)
        for i, x in enumerate(xs):
            inner = inner + lift(c.A[r][i]) * big.dx(x)
        out = out + wedge(big.dx(b_label), inner)
        bracket = PolyForm.zero(big, 2)
        for i, x in enumerate(xs):
            A = lift(c.A[r][i])
            grad = PolyForm.zero(big, 1)
            for u in xs + zs:
                grad = grad + A.diff(big.index(u)) * big.dx(u)
            bracket = bracket + wedge(grad, big.dx(x))
        out = out + big.coord(b_label) * bracket
    return out


# -- examples ---------------------------------------------------------------------

def test_characteristic_distribution_examples():
    s = darboux_structure(1, 1)
    assert characteristic_distribution(s) == [s.chart.partial("z1")]
    assert characteristic_distribution(darboux_structure(1, 0)) == []
    s = darboux_structure(0, 2)
    assert characteristic_distribution(s) == [s.chart.partial("z1"), s.chart.partial("z2")]


def test_not_darboux():
    c = Chart(("x1", "x2", "t", "z1"), 2)
    x1 = c.coord("x1")
    eta = c.dx("t") + x1 * c.dx("x1")
    s = PrecosymplecticChartStructure(c, wedge(c.dx("x1"), c.dx("x2")), eta, 1, 1)
    with pytest.raises(NotDarboux):
        characteristic_distribution(s)
    # kernel direction mixes z1 and x2
    om = wedge(c.dx("x1"), c.dx("x2") + c.dx("z1"))
    s = PrecosymplecticChartStructure(c, om, c.dx("t"), 1, 1)
    with pytest.raises(NotDarboux):
        characteristic_distribution(s)


def test_structure_must_be_closed():
    c = Chart(("x1", "x2", "t"), 2)
    with pytest.raises(NotClosed):
        PrecosymplecticChartStructure(c, c.coord("t") * wedge(c.dx("x1"), c.dx("x2")), c.dx("t"), 1, 0)


def test_from_forms_infers_pk():
    s = darboux_structure(1, 2)
    s2 = PrecosymplecticChartStructure.from_forms(s.chart, s.omega, s.eta)
    assert (s2.p, s2.k) == (1, 2)


def test_coordinate_complement():
    s = darboux_structure(1, 1)
    c = choose_complement(s)
    assert all(a.is_zero() for row in c.A for a in row)
    assert s.chart.partial("t") in c.G_fields


def test_custom_complement_fields_and_projection():
    s = darboux_structure(1, 1)
    x1 = s.chart.coord("x1")
    c = choose_complement(s, {("z1", "x1"): x1 * x1})
    ch = s.chart
    assert c.G_fields == [ch.partial("x1") - ch.partial("z1") * (x1 * x1), ch.partial("x2"), ch.partial("t")]
    rng = random.Random(0)
    for _ in range(5):
        pt = [Fraction(rng.randint(-4, 4), 3) for _ in range(4)]
        P = c.projection_matrix(pt)
        assert Q.matmul(P, P) == P
        assert Q.matvec(P, Q.unit(4, 0)) == (0, 0, 0, pt[0] ** 2)
        for g in c.G_fields:
            assert not any(Q.matvec(P, g.evaluate(pt)))


def test_complement_rejections():
    s = darboux_structure(1, 1)
    t = s.chart.coord("t")
    with pytest.raises(InvalidComplement):
        choose_complement(s, C=[t])
    big = thickened_structure(s, choose_complement(s)).chart
    with pytest.raises(InvalidComplement):
        choose_complement(s, {("z1", "x1"): big.coord("b1")})
    # b-free polynomials on the thickened chart are accepted
    c = choose_complement(s, {("z1", "x1"): big.coord("x2")})
    assert c.A[0][0] == s.chart.coord("x2")
    with pytest.raises(InvalidComplement):
        choose_complement(s, [[0]])


def test_liouville_examples():
    s = darboux_structure(1, 1)
    lam = liouville_form(choose_complement(s))
    big = lam.chart
    assert lam == big.coord("b1") * big.dx("z1")
    assert liouville_form(choose_complement(darboux_structure(1, 0))).is_zero()
    lam = liouville_form(choose_complement(s, {("z1", "x1"): s.chart.coord("x1")}))
    assert lam == big.coord("b1") * (big.dx("z1") + big.coord("x1") * big.dx("x1"))


def test_thickened_examples():
    s = darboux_structure(1, 1)
    T = thickened_structure(s, choose_complement(s))
    big = T.chart
    assert big.names == ("x1", "x2", "t", "z1", "b1")
    assert T.omega_G == wedge(big.dx("x1"), big.dx("x2")) + wedge(big.dx("b1"), big.dx("z1"))
    assert T.eta_G == big.dx("t")
    s0 = darboux_structure(0, 1)
    T0 = thickened_structure(s0, choose_complement(s0))
    assert T0.chart.dim == 3 and T0.omega_G == wedge(T0.chart.dx("b1"), T0.chart.dx("z1"))
    assert not wedge(T0.eta_G, T0.omega_G).is_zero()
    c = choose_complement(s, {("z1", "x1"): s.chart.coord("x2")})
    T = thickened_structure(s, c)
    extra = T.omega_G - (wedge(big.dx("x1"), big.dx("x2")) + wedge(big.dx("b1"), big.dx("z1") + big.coord("x2") * big.dx("x1")))
    assert extra == big.coord("b1") * wedge(big.dx("x2"), big.dx("x1"))


def test_verify_embedding_coordinate():
    s = darboux_structure(1, 1)
    rep = verify_embedding(thickened_structure(s, choose_complement(s)), s, radius=1, grid=3)
    assert rep.passed
    assert [c.name for c in rep.checks] == ["zero-section-pullback", "volume-nonzero", "zero-section-coisotropic", "reeb-is-dt"]


def test_verify_embedding_degenerate_radius():
    s = darboux_structure(1, 1)
    T = thickened_structure(s, choose_complement(s, {("z1", "x1"): s.chart.coord("x2")}))
    # omega_G = (1 - b1) dx1^dx2 + ..., degenerate at b1 = 1
    rep = verify_embedding(T, s, radius=1, grid=3)
    assert not rep.check("volume-nonzero").passed
    assert rep.check("volume-nonzero").worst_point[-1] == 1
    largest = rep.info["largest_passing_radius"]
    assert Fraction(9, 10) < largest < 1
    assert verify_embedding(T, s, radius=largest, grid=3).passed


def test_k_zero_reduces_to_input():
    s = darboux_structure(2, 0)
    T = thickened_structure(s, choose_complement(s))
    assert T.chart == s.chart and T.omega_G == s.omega and T.fiber_dim == 0
    assert verify_embedding(T, s, grid=3).passed


# -- invariants over random tables ---------------------------------------------------

def _cases(seed, count, with_time):
    rng = random.Random(seed)
    for _ in range(count):
        p, k = rng.randint(0, 3), rng.randint(1, 3)
        s = darboux_structure(p, k)
        c = choose_complement(s, random_A_table(rng, s, with_time=with_time))
        yield rng, s, c, thickened_structure(s, c)


def test_closed_and_zero_section_identity():
    for _, s, c, T in _cases(10, 25, with_time=True):
        assert d(T.omega_G).is_zero()
        j = T.zero_section()
        assert pullback(j, T.omega_G) == s.omega and pullback(j, T.eta_G) == s.eta
        assert T.omega_G == pullback(PolyMap(T.chart, s.chart, T.chart.coords()[: s.chart.dim]), s.omega) + d(T.liouville)


def test_matches_local_formula_for_time_free_tables():
    for _, s, c, T in _cases(11, 25, with_time=False):
        assert T.omega_G == local_formula(s, c, T)
        dt = T.chart.partial("t")
        assert interior(dt, T.omega_G).is_zero()
        assert interior(dt, T.eta_G) == PolyForm.scalar(T.chart, 1)


def test_time_dependent_tables_add_dt_terms():
    """With t in A the displayed expansion misses exactly sum_r b_r dA/dt dt^dx^i."""
    for _, s, c, T in _cases(12, 25, with_time=True):
        big = T.chart
        n = s.chart.dim
        xs, t, zs = darboux_layout(s)
        missing = PolyForm.zero(big, 2)
        for r in range(len(zs)):
            b = big.coord(big.names[n + r])
            for i, x in enumerate(xs):
                dA = c.A[r][i].reindex(big.dim, list(range(n))).diff(big.index(t))
                missing = missing + (b * dA) * wedge(big.dx(t), big.dx(x))
        assert T.omega_G - local_formula(s, c, T) == missing


def test_rank_on_zero_section():
    for rng, s, c, T in _cases(13, 15, with_time=True):
        base = [Fraction(rng.randint(-3, 3), 4) for _ in range(s.chart.dim)]
        pt = base + [0] * T.fiber_dim
        r, _ = skew_rank_kernel(SkewForm(evaluate(T.omega_G, pt)))
        assert r == 2 * s.p + 2 * s.k


def test_coisotropy_witness_argument():
    """A vector leaving the zero section with B_mu != 0 pairs to a nonzero value with d/dz^mu."""
    for rng, s, c, T in _cases(14, 15, with_time=True):
        n = s.chart.dim
        pt = [Fraction(rng.randint(-3, 3), 4) for _ in range(n)] + [0] * T.fiber_dim
        M = evaluate(T.omega_G, pt)
        _, _, zs = darboux_layout(s)
        for mu, z in enumerate(zs):
            Y = [Fraction(rng.randint(-3, 3), 2) for _ in range(n)] + [0] * T.fiber_dim
            Y[n + mu] = Fraction(1)
            Y[T.chart.time_index] = Fraction(0)
            X = Q.unit(T.chart.dim, T.chart.index(z))
            assert Q.bilinear(M, X, Y) != 0


def test_random_tables_verify():
    for _, s, c, T in _cases(15, 6, with_time=True):
        assert verify_embedding(T, s, grid=3).passed
