"""Kernel tests: eigen, Newton, RK4, quadrature, finite differences."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from selfsim.errors import NoConvergence, NotStrictlyHyperbolic, SingularJacobian, ToleranceNotMet
from selfsim.numerics import (
    directional_derivative,
    eig_real,
    fd_gradient,
    fd_hessian,
    newton_solve,
    ode_rk4,
    quad_adaptive,
)


def test_eig_real_diagonal():
    d = eig_real(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(d.values, [-1.0, 2.0, 3.0])
    assert np.allclose(np.abs(d.right), np.eye(3)[:, [1, 2, 0]])


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=5, unique=True), st.integers(0, 2**31 - 1))
def test_eig_real_reconstructs_similar_matrix(vals, seed):
    vals = np.array(vals)
    if np.min(np.diff(np.sort(vals))) < 1e-3:
        return
    rng = np.random.default_rng(seed)
    m = vals.shape[0]
    P = np.eye(m) + 0.3 * rng.standard_normal((m, m))
    if abs(np.linalg.det(P)) < 1e-2:
        return
    A = P @ np.diag(vals) @ np.linalg.inv(P)
    d = eig_real(A)
    assert np.allclose(d.values, np.sort(vals), atol=1e-8)
    assert np.allclose(A @ d.right, d.right * d.values, atol=1e-8)
    assert np.allclose(d.left @ d.right, np.eye(m), atol=1e-10)
    assert np.allclose(np.linalg.norm(d.right, axis=0), 1.0)


def test_eig_real_rejects_repeated_and_complex():
    with pytest.raises(NotStrictlyHyperbolic):
        eig_real(np.eye(2))
    with pytest.raises(NotStrictlyHyperbolic):
        eig_real(np.array([[0.0, -1.0], [1.0, 0.0]]))


def test_eig_real_rejects_large_dimension():
    with pytest.raises(ValueError):
        eig_real(np.diag(np.arange(9.0)))


def test_newton_sqrt2():
    x = newton_solve(lambda x: x**2 - 2.0, [1.0])
    assert x[0] == pytest.approx(math.sqrt(2.0), abs=1e-12)


def test_newton_with_jacobian_system():
    F = lambda x: np.array([x[0] + x[1] - 3.0, x[0] * x[1] - 2.0])
    J = lambda x: np.array([[1.0, 1.0], [x[1], x[0]]])
    x = newton_solve(F, [0.5, 3.0], jac=J)
    assert np.allclose(np.sort(x), [1.0, 2.0], atol=1e-12)


def test_newton_failures():
    with pytest.raises(NoConvergence):
        newton_solve(lambda x: x**2 + 1.0, [0.5], max_iter=20)
    with pytest.raises(SingularJacobian):
        newton_solve(lambda x: np.array([1.0 + 0 * x[0]]), [0.0], jac=lambda x: np.zeros((1, 1)))


def test_rk4_exponential_fourth_order():
    errs = []
    for n in (10, 20, 40):
        _, path = ode_rk4(lambda s, y: y, [1.0], (0.0, 1.0), n)
        errs.append(abs(path[-1, 0] - math.e))
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(16.0, rel=0.1)


def test_rk4_rotation_preserves_norm():
    _, path = ode_rk4(lambda s, y: np.array([-y[1], y[0]]), [1.0, 0.0], (0.0, 2 * math.pi), 400)
    assert np.allclose(path[-1], [1.0, 0.0], atol=1e-8)


@pytest.mark.parametrize(
    "g, a, b, exact",
    [
        (np.sin, 0.0, math.pi, 2.0),
        (lambda x: x**7 - 3 * x**2, -1.0, 2.0, (2**8 - 1) / 8 - (8 + 1)),
        (np.sqrt, 0.0, 1.0, 2.0 / 3.0),
        (lambda x: 1.0 / (1.0 + 25 * x**2), -1.0, 1.0, 2.0 * math.atan(5.0) / 5.0),
    ],
)
def test_quad_adaptive_closed_forms(g, a, b, exact):
    assert quad_adaptive(g, a, b, tol=1e-12) == pytest.approx(exact, abs=1e-10)


def test_quad_adaptive_jump_with_breakpoint_hint():
    g = lambda x: np.where(x < 0.3, 1.0, 2.0)
    assert quad_adaptive(g, 0.0, 1.0, points=[0.3], vectorized=True) == pytest.approx(0.3 + 1.4, abs=1e-13)


def test_quad_adaptive_vector_valued_and_reversed():
    g = lambda x: np.stack([x, x**2], axis=-1)
    val = quad_adaptive(g, 1.0, 0.0, vectorized=True)
    assert np.allclose(val, [-0.5, -1.0 / 3.0], atol=1e-13)


def test_quad_adaptive_gives_up():
    with pytest.raises(ToleranceNotMet):
        quad_adaptive(lambda x: 1.0 / x, 1e-300, 1.0, tol=1e-14, max_depth=5)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=4))
def test_fd_gradient_quadratic(x):
    x = np.array(x)
    Q = np.diag(np.arange(1.0, x.shape[0] + 1))
    grad = fd_gradient(lambda v: 0.5 * v @ Q @ v + v.sum(), x)
    assert np.allclose(grad, Q @ x + 1.0, atol=1e-8)


def test_fd_hessian_linear_is_zero():
    H = fd_hessian(lambda v: 3.0 * v[0] - 2.0 * v[1] + 0.5 * v[2], np.array([1.0, -2.0, 0.3]))
    assert np.max(np.abs(H)) <= 1e-8


def test_fd_hessian_smooth():
    g = lambda v: math.exp(v[0]) * math.sin(v[1])
    x = np.array([0.3, 0.7])
    e, s, c = math.exp(0.3), math.sin(0.7), math.cos(0.7)
    exact = np.array([[e * s, e * c], [e * c, -e * s]])
    assert np.allclose(fd_hessian(g, x), exact, atol=1e-8)


def test_directional_derivative():
    g = lambda v: v[0] ** 2 * v[1]
    assert directional_derivative(g, np.array([1.0, 2.0]), np.array([0.0, 1.0])) == pytest.approx(1.0, abs=1e-8)
