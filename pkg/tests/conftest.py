import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest

from coisotropic.forms import Chart, PolyForm
from coisotropic.polynomial import PolyScalar


def random_fraction(rng, num=3, den=3):
    return Fraction(rng.randint(-num, num), rng.randint(1, den))


def random_poly(rng, nvars, max_deg=2, max_terms=3):
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        exp = [0] * nvars
        for _ in range(rng.randint(0, max_deg)):
            exp[rng.randrange(nvars)] += 1
        terms[tuple(exp)] = random_fraction(rng)
    return PolyScalar(nvars, terms)


def random_form(rng, chart, degree, max_terms=3, max_deg=2):
    terms = {}
    combos = list(combinations(range(chart.dim), degree))
    if not combos:
        return PolyForm.zero(chart, degree)
    for _ in range(rng.randint(0, max_terms)):
        terms[rng.choice(combos)] = random_poly(rng, chart.dim, max_deg)
    return PolyForm(chart, degree, terms)


def random_chart(rng, dim):
    return Chart(tuple(f"u{i}" for i in range(dim)))


def perm_sign(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def form_on_vectors(form, point, vectors):
    """Independent oracle: sum_I f_I(p) det[v_j(I_i)]."""
    total = Fraction(0)
    for I, f in form.terms.items():
        val = f.evaluate(point)
        det = Fraction(0)
        for perm in permutations(range(len(I))):
            prod = Fraction(perm_sign(perm))
            for row, col in enumerate(perm):
                prod *= vectors[col][I[row]]
            det += prod
        total += val * det
    return total


def wedge_on_vectors(a, b, point, vectors):
    """Alternating-sum definition of (a ^ b)(v_1..v_{k+l})."""
    k, l = a.degree, b.degree
    total = Fraction(0)
    for perm in permutations(range(k + l)):
        vs = [vectors[i] for i in perm]
        total += perm_sign(perm) * form_on_vectors(a, point, vs[:k]) * form_on_vectors(b, point, vs[k:])
    fact = 1
    for i in range(2, k + 1):
        fact *= i
    for i in range(2, l + 1):
        fact *= i
    return total / fact


@pytest.fixture
def rng():
    return random.Random(20240607)


def random_invertible(rng, n, num=2):
    from coisotropic import rational as Q

    while True:
        m = Q.matrix([[random_fraction(rng, num, 2) for _ in range(n)] for _ in range(n)])
        if Q.inverse(m) is not None:
            return m


def random_skew_of_rank(rng, n, p):
    """P^T C P with C canonical of rank 2p and P random invertible."""
    from coisotropic import rational as Q
    from coisotropic.coslinalg import canonical_matrix

    P = random_invertible(rng, n)
    return Q.matmul(Q.transpose(P), Q.matmul(canonical_matrix(n, p), P))


def random_cosymplectic_pair(rng, p, k):
    """Push the Darboux pair (sum dx^i^dx^{p+i}, dt) in dim 2p+1+k through a random basis change.

    Returns (data, B) where B has the Darboux columns (x-block, t, z-block).
    """
    from coisotropic import rational as Q
    from coisotropic.coslinalg import CosymplecticLinearData, canonical_matrix

    n = 2 * p + 1 + k
    B = random_invertible(rng, n)
    Binv = Q.inverse(B)
    C = canonical_matrix(n, p)
    M = Q.matmul(Q.transpose(Binv), Q.matmul(C, Binv))
    eta = Q.matvec(Q.transpose(Binv), Q.unit(n, 2 * p))
    return CosymplecticLinearData(M, eta), B


def darboux_structure(p, k, omega_extra=None):
    """Darboux chart (x1..x2p, t, z1..zk) with omega = sum dx^i ^ dx^{p+i}, eta = dt."""
    from coisotropic.forms import canonical_two_form
    from coisotropic.thicken import PrecosymplecticChartStructure

    names = tuple(f"x{i + 1}" for i in range(2 * p)) + ("t",) + tuple(f"z{r + 1}" for r in range(k))
    chart = Chart(names, 2 * p)
    omega = canonical_two_form(chart, names[: 2 * p])
    return PrecosymplecticChartStructure(chart, omega, chart.dx("t"), p, k)


def random_A_table(rng, s, scale=Fraction(1, 4), with_time=True):
    """Random k x 2p table of small polynomials in (x, t, z) of degree <= 2."""
    n = s.chart.dim
    allowed = [i for i, u in enumerate(s.chart.names) if with_time or u != "t"]
    table = []
    for _ in range(s.k):
        row = []
        for _ in range(2 * s.p):
            terms = {}
            for _ in range(rng.randint(0, 3)):
                exp = [0] * n
                for _ in range(rng.randint(0, 2)):
                    exp[rng.choice(allowed)] += 1
                terms[tuple(exp)] = Fraction(rng.randint(-2, 2), 2) * scale
            row.append(PolyScalar(n, terms))
        table.append(row)
    return table


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
