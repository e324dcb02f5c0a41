"""Deterministic sample grids on boxes ``[-r, r]^m`` (exact rationals)."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .polynomial import as_fraction


def axis(radius, grid: int) -> list:
    """``grid`` equally spaced rationals on ``[-radius, radius]``; a single point is the origin."""
    r = as_fraction(radius)
    if grid < 1:
        raise ValueError("grid must be at least 1")
    if grid == 1:
        return [Fraction(0)]
    return [-r + 2 * r * i / (grid - 1) for i in range(grid)]


def box_points(dim: int, radius, grid: int, cap: int | None = None, seed: int = 0) -> list:
    """Tensor grid of ``dim`` axes, or a seeded subsample of at most ``cap`` points.

    The subsample always keeps the origin and the box corners when they fit.
    """
    ax = axis(radius, grid)
    if dim == 0:
        return [()]
    total = len(ax) ** dim
    if cap is None or total <= cap:
        return [tuple(p) for p in itertools.product(ax, repeat=dim)]
    rng = random.Random(seed)
    chosen = {tuple(Fraction(0) for _ in range(dim))} if grid % 2 else set()
    r = as_fraction(radius)
    if 2**dim + len(chosen) <= cap // 2:
        chosen.update(itertools.product((-r, r), repeat=dim))
    while len(chosen) < cap:
        chosen.add(tuple(rng.choice(ax) for _ in range(dim)))
    return sorted(chosen)
