"""Fixed-step RK4 integration of time-dependent vector fields over a batch of seeds."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .forms import PolyVectorField

__all__ = ["FlowResult", "integrate_flow", "compose_flows", "as_field"]

JACOBIAN_STEP = 1e-5
DIVERGENCE_LIMIT = 1e6


@dataclass
class FlowResult:
    seeds: np.ndarray  # (N, n)
    trajectories: np.ndarray  # (N, steps + 1, n); NaN after divergence
    step_count: int
    jacobian_estimates: np.ndarray | None  # (N, n, n) at the final time
    diverged: np.ndarray  # (N,) bool
    t0: float = 0.0
    t1: float = 1.0

    @property
    def endpoints(self) -> np.ndarray:
        return self.trajectories[:, -1, :]

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.step_count + 1)


def as_field(field) -> Callable[[float, np.ndarray], np.ndarray]:
    """Accept ``f(t, pts)`` callables or autonomous PolyVectorFields."""
    if isinstance(field, PolyVectorField):
        fn = field.lambdify()
        return lambda t, pts: fn(pts)
    return field


def _rk4(f, pts, t0, t1, steps, keep=True):
    h = (t1 - t0) / steps
    x = np.array(pts, dtype=float)
    traj = [x.copy()] if keep else None
    alive = np.ones(len(x), dtype=bool)
    for i in range(steps):
        t = t0 + i * h
        k1 = f(t, x)
        k2 = f(t + h / 2, x + h / 2 * k1)
        k3 = f(t + h / 2, x + h / 2 * k2)
        k4 = f(t + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        bad = ~np.isfinite(x).all(axis=1) | (np.abs(x).max(axis=1, initial=0.0) > DIVERGENCE_LIMIT)
        if bad.any():
            alive &= ~bad
            x[bad] = np.nan
        if keep:
            traj.append(x.copy())
    return x, (np.stack(traj, axis=1) if keep else None), alive


def integrate_flow(field, seeds, steps: int = 64, t0: float = 0.0, t1: float = 1.0, jacobians: bool = True, h: float = JACOBIAN_STEP) -> FlowResult:
    """Integrate ``dp/dt = field(t, p)`` from ``t0`` to ``t1`` for every seed.

    Jacobians of the time-``t1`` map are central differences over seed
    perturbations of size ``h``; a seed whose trajectory leaves the ball of
    radius 1e6 is flagged in ``diverged`` and its values become NaN.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    f = as_field(field)
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    N, n = seeds.shape
    with np.errstate(all="ignore"):
        _, traj, alive = _rk4(f, seeds, t0, t1, steps)
        jac = None
        if jacobians:
            offsets = np.concatenate([np.eye(n) * h, -np.eye(n) * h])  # (2n, n)
            perturbed = (seeds[:, None, :] + offsets[None, :, :]).reshape(-1, n)
            ends, _, _ = _rk4(f, perturbed, t0, t1, steps, keep=False)
            ends = ends.reshape(N, 2 * n, n)
            # jac[s, i, j] = d x_i / d seed_j
            jac = np.transpose((ends[:, :n, :] - ends[:, n:, :]) / (2 * h), (0, 2, 1))
    return FlowResult(seeds, traj, steps, jac, ~alive, t0, t1)


def compose_flows(fields, seeds, steps: int = 64, jacobians: bool = True, h: float = JACOBIAN_STEP) -> FlowResult:
    """Run each field over ``[0, 1]`` in turn; the result describes the composite map.

    Trajectories are concatenated (stage boundaries share a sample) and the
    Jacobian is a central difference of the whole composite.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    N, n = seeds.shape
    fs = [as_field(f) for f in fields]
    with np.errstate(all="ignore"):
        x, parts, alive = seeds, [], np.ones(N, dtype=bool)
        for k, f in enumerate(fs):
            x, traj, ok = _rk4(f, x, 0.0, 1.0, steps)
            alive &= ok
            parts.append(traj if k == 0 else traj[:, 1:, :])
        jac = None
        if jacobians:
            offsets = np.concatenate([np.eye(n) * h, -np.eye(n) * h])
            y = (seeds[:, None, :] + offsets[None, :, :]).reshape(-1, n)
            for f in fs:
                y, _, _ = _rk4(f, y, 0.0, 1.0, steps, keep=False)
            y = y.reshape(N, 2 * n, n)
            jac = np.transpose((y[:, :n, :] - y[:, n:, :]) / (2 * h), (0, 2, 1))
    return FlowResult(seeds, np.concatenate(parts, axis=1), steps * len(fs), jac, ~alive, 0.0, float(len(fs)))
