"""Exact linear algebra over the rationals.

Matrices are tuples of row tuples of Fractions; vectors are tuples.  The
routines are plain Gaussian elimination: sizes here are small (n <= 16) and
exactness matters more than speed.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .polynomial import as_fraction

Matrix = tuple
Vector = tuple


def matrix(rows: Sequence[Sequence]) -> Matrix:
    rows = [tuple(as_fraction(x) for x in r) for r in rows]
    if rows and len({len(r) for r in rows}) != 1:
        raise ValueError("ragged matrix")
    return tuple(rows)


def vector(values: Sequence) -> Vector:
    return tuple(as_fraction(x) for x in values)


def zeros(n: int, m: int | None = None) -> Matrix:
    m = n if m is None else m
    return tuple((Fraction(0),) * m for _ in range(n))


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def unit(n: int, i: int) -> Vector:
    return tuple(Fraction(int(j == i)) for j in range(n))


def shape(a: Matrix) -> tuple:
    return (len(a), len(a[0]) if a else 0)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt) for row in a)


def matvec(a: Matrix, v: Sequence) -> Vector:
    return tuple(sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a)


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(u, v)), Fraction(0))


def bilinear(a: Matrix, u: Sequence, v: Sequence) -> Fraction:
    """``u^T a v``."""
    return dot(u, matvec(a, v))


def columns(a: Matrix) -> list:
    return [tuple(c) for c in transpose(a)]


def from_columns(cols: Sequence[Sequence], n: int | None = None) -> Matrix:
    if not cols:
        return tuple(() for _ in range(n or 0))
    return transpose(tuple(tuple(c) for c in cols))


def is_skew(a: Matrix) -> bool:
    n = len(a)
    return all(len(r) == n for r in a) and all(a[i][j] == -a[j][i] for i in range(n) for j in range(n))


def rref(a: Matrix):
    """Reduced row echelon form; returns (rows, pivot columns)."""
    rows = [list(r) for r in a]
    nrows, ncols = shape(a)
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        pr = next((i for i in range(r, nrows) if rows[i][c]), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return tuple(tuple(x) for x in rows), tuple(pivots)


def rank(a: Matrix) -> int:
    if not a or not a[0]:
        return 0
    return len(rref(a)[1])


def nullspace(a: Matrix, ncols: int | None = None) -> list:
    """Basis of ``{x : a x = 0}`` from the RREF free columns (one unit entry per free column)."""
    n = ncols if ncols is not None else shape(a)[1]
    if not a:
        return [unit(n, i) for i in range(n)]
    R, piv = rref(a)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(R, piv):
            v[pc] = -row[f]
        basis.append(tuple(v))
    return basis


def solve(a: Matrix, b: Sequence):
    """One solution of ``a x = b`` (free variables zero), or None if inconsistent."""
    n = shape(a)[1]
    aug = tuple(tuple(row) + (as_fraction(bi),) for row, bi in zip(a, b))
    R, piv = rref(aug)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, pc in zip(R, piv):
        x[pc] = row[n]
    return tuple(x)


def inverse(a: Matrix):
    """Inverse of a square matrix, or None if singular."""
    n = len(a)
    aug = tuple(tuple(row) + unit(n, i) for i, row in enumerate(a))
    R, piv = rref(aug)
    if tuple(p for p in piv if p < n) != tuple(range(n)):
        return None
    return tuple(tuple(r[n:]) for r in R)


def independent_columns(cols: Sequence[Sequence], n: int) -> list:
    """Greedy maximal independent subset, preserving order."""
    kept: list = []
    r = 0
    for c in cols:
        trial = kept + [tuple(c)]
        rr = rank(from_columns(trial, n))
        if rr > r:
            kept = trial
            r = rr
    return kept


def pfaffian(a: Matrix) -> Fraction:
    """Pfaffian of a skew matrix by skew-symmetric elimination (Parlett-Reid style pivoting)."""
    n = len(a)
    if n % 2:
        return Fraction(0)
    m = [list(r) for r in a]
    result = Fraction(1)
    for k in range(0, n - 1, 2):
        # pivot: bring a nonzero entry into position (k, k+1)
        piv = next((j for j in range(k + 1, n) if m[k][j]), None)
        if piv is None:
            return Fraction(0)
        if piv != k + 1:
            # swap rows/cols k+1 and piv: flips the sign
            m[k + 1], m[piv] = m[piv], m[k + 1]
            for row in m:
                row[k + 1], row[piv] = row[piv], row[k + 1]
            result = -result
        pv = m[k][k + 1]
        result *= pv
        # eliminate couplings of rows k, k+1 with the rest
        for i in range(k + 2, n):
            ci = m[k][i] / pv  # coefficient on row k+1
            di = m[k + 1][i] / pv  # coefficient on row k
            if not ci and not di:
                continue
            # row_i <- row_i - ci*row_{k+1} + di*row_k (congruence keeps skewness)
            for j in range(k, n):
                m[i][j] = m[i][j] - ci * m[k + 1][j] + di * m[k][j]
            for j in range(k, n):
                m[j][i] = -m[i][j]
    return result
