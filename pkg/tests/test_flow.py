import numpy as np
import pytest

from coisotropic.flow import compose_flows, integrate_flow
from coisotropic.forms import Chart, PolyVectorField

LINE = Chart(("x",))
PLANE = Chart(("x", "y"))


def test_zero_field_is_constant():
    seeds = np.array([[0.3, -0.2], [1.0, 2.0]])
    res = integrate_flow(PolyVectorField.zero(PLANE), seeds, 8)
    assert np.array_equal(res.trajectories, np.repeat(seeds[:, None, :], 9, axis=1))
    np.testing.assert_allclose(res.jacobian_estimates, np.broadcast_to(np.eye(2), (2, 2, 2)), atol=1e-12)


def test_constant_field_translates_exactly():
    res = integrate_flow(PLANE.partial("x"), [[0.25, 0.5]], 3)
    np.testing.assert_allclose(res.endpoints, [[1.25, 0.5]], atol=1e-15)


def test_linear_field_fourth_order():
    field = PolyVectorField(LINE, [LINE.coord("x")])
    steps = [8, 16, 32, 64]
    errs = [abs(integrate_flow(field, [[1.0]], s).endpoints[0, 0] - np.e) for s in steps]
    slope = -np.polyfit(np.log(steps), np.log(errs), 1)[0]
    assert abs(slope - 4) <= 0.2


def test_jacobian_of_linear_flow():
    field = PolyVectorField(PLANE, [PLANE.coord("x"), -2 * PLANE.coord("y")])
    res = integrate_flow(field, [[0.1, 0.2]], 64)
    np.testing.assert_allclose(res.jacobian_estimates[0], np.diag([np.e, np.exp(-2)]), rtol=1e-7)


def test_time_dependent_callable_and_backward():
    f = lambda t, p: np.stack([t * np.ones(len(p))], axis=1)
    fwd = integrate_flow(f, [[0.0]], 16)
    assert fwd.endpoints[0, 0] == pytest.approx(0.5, abs=1e-14)
    back = integrate_flow(f, fwd.endpoints, 16, t0=1.0, t1=0.0)
    assert back.endpoints[0, 0] == pytest.approx(0.0, abs=1e-14)


def test_divergence_guard():
    x = LINE.coord("x")
    field = PolyVectorField(LINE, [x * x])  # blows up at t = 1/x0
    res = integrate_flow(field, [[2.0], [0.1]], 64)
    assert res.diverged.tolist() == [True, False]
    assert np.isnan(res.endpoints[0, 0])
    assert res.endpoints[1, 0] == pytest.approx(0.1 / 0.9, rel=1e-8)


def test_composite_jacobian_is_product():
    f1 = PolyVectorField(PLANE, [PLANE.coord("y"), 0])
    f2 = PolyVectorField(PLANE, [0, PLANE.coord("x")])
    res = compose_flows([f1, f2], [[0.3, 0.7]], 32)
    A = np.array([[1, 1], [0, 1]])
    B = np.array([[1, 0], [1, 1]])
    np.testing.assert_allclose(res.jacobian_estimates[0], B @ A, atol=1e-8)
    assert res.trajectories.shape == (1, 65, 2)
