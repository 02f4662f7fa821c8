"""Small-dimension numerical kernels.

Dense eigendecomposition is delegated to LAPACK through ``numpy.linalg``;
Newton iteration, RK4, Gauss-Kronrod quadrature and finite differences are
implemented here because the callers need their exact error semantics.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .config import DEFAULT
from .errors import (
    NoConvergence,
    NotStrictlyHyperbolic,
    SingularJacobian,
    StepFailure,
    ToleranceNotMet,
)

MAX_DIM = 8


@dataclass(frozen=True)
class EigenDecomp:
    """Real eigensystem of a strictly hyperbolic matrix.

    ``right[:, a]`` is the unit right eigenvector for ``values[a]``;
    ``left[a, :]`` is the matching left eigenvector, scaled so that
    ``left @ right == I``.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def flipped(self, signs: np.ndarray) -> "EigenDecomp":
        """Return a copy with r^a and l^a multiplied by ``signs[a]``."""
        signs = np.asarray(signs, dtype=float)
        return EigenDecomp(self.values, self.right * signs, self.left * signs[:, None])


def _check_dim(m: int) -> None:
    if not 1 <= m <= MAX_DIM:
        raise ValueError(f"dimension {m} outside supported range 1..{MAX_DIM}")


def eig_real(A, gap: float = DEFAULT.gap) -> EigenDecomp:
    """Eigendecomposition of a real matrix with distinct real eigenvalues.

    Raises
    ------
    NotStrictlyHyperbolic
        If two eigenvalues are closer than ``gap`` or any eigenvalue has an
        imaginary part larger than ``gap``.
    """
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    _check_dim(m)
    if A.shape != (m, m):
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(A)):
        raise NotStrictlyHyperbolic("matrix has non-finite entries")
    w, R = np.linalg.eig(A)
    if np.iscomplexobj(w):
        if np.max(np.abs(w.imag)) > gap:
            raise NotStrictlyHyperbolic(f"complex eigenvalues {w}")
        w = w.real
        R = R.real
    order = np.argsort(w)
    w = w[order]
    R = R[:, order]
    if m > 1 and np.min(np.diff(w)) <= gap:
        raise NotStrictlyHyperbolic(f"eigenvalues not separated by {gap}: {w}")
    R = R / np.linalg.norm(R, axis=0)
    idx = np.argmax(np.abs(R), axis=0)
    signs = np.sign(R[idx, np.arange(m)])
    R = R * signs
    try:
        L = np.linalg.inv(R)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - excluded by gap check
        raise NotStrictlyHyperbolic("eigenvector matrix singular") from exc
    return EigenDecomp(w, R, L)


def _fd_jacobian(F, x, fx):
    n = x.shape[0]
    J = np.empty((fx.shape[0], n))
    for j in range(n):
        h = max(1e-7, 1e-7 * abs(x[j]))
        xp = x.copy()
        xp[j] += h
        h = xp[j] - x[j]
        J[:, j] = (np.asarray(F(xp), dtype=float) - fx) / h
    return J


def newton_solve(
    F: Callable[[np.ndarray], np.ndarray],
    x0,
    tol: float = DEFAULT.newton_tol,
    max_iter: int = DEFAULT.newton_max_iter,
    jac: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Solve ``F(x) = 0`` by Newton's method.

    Convergence is declared when ``max|F(x)| <= tol``. Without ``jac`` the
    Jacobian is built from forward differences with step
    ``max(1e-7, 1e-7 |x_j|)``.
    """
    x = np.array(x0, dtype=float, ndmin=1)
    for _ in range(max_iter + 1):
        fx = np.asarray(F(x), dtype=float).reshape(-1)
        if not np.all(np.isfinite(fx)):
            raise NoConvergence("residual became non-finite")
        if np.max(np.abs(fx)) <= tol:
            return x
        J = jac(x) if jac is not None else _fd_jacobian(F, x, fx)
        J = np.asarray(J, dtype=float).reshape(fx.shape[0], x.shape[0])
        try:
            dx = np.linalg.solve(J, fx)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(dx)):
            raise SingularJacobian("Newton step is non-finite")
        x = x - dx
    raise NoConvergence(f"no convergence after {max_iter} iterations, |F|={np.max(np.abs(fx)):.3e}")


def ode_rk4(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    s_span: tuple[float, float],
    n_steps: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Classical fourth-order Runge-Kutta on a uniform grid.

    Returns the nodes ``s`` (shape ``(n_steps+1,)``) and the sampled path
    (shape ``(n_steps+1, m)``).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    s0, s1 = float(s_span[0]), float(s_span[1])
    y = np.array(y0, dtype=float, ndmin=1)
    h = (s1 - s0) / n_steps
    nodes = s0 + h * np.arange(n_steps + 1)
    nodes[-1] = s1
    path = np.empty((n_steps + 1, y.shape[0]))
    path[0] = y

    def f(s, v):
        out = np.asarray(rhs(s, v), dtype=float)
        if not np.all(np.isfinite(out)):
            raise StepFailure(f"non-finite right-hand side at s={s}")
        return out

    for i in range(n_steps):
        s = nodes[i]
        k1 = f(s, y)
        k2 = f(s + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(s + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(s + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        path[i + 1] = y
    return nodes, path


# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[7] = _WG[3]
_GW[[9, 11, 13]] = _WG[2::-1]


def _gk15(g, a, b, vectorized):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c + h * _NODES
    if vectorized:
        vals = np.asarray(g(x), dtype=float)
    else:
        vals = np.stack([np.asarray(g(t), dtype=float) for t in x])
    if not np.all(np.isfinite(vals)):
        raise ToleranceNotMet("integrand is non-finite")
    k = h * np.tensordot(_KW, vals, axes=(0, 0))
    gs = h * np.tensordot(_GW, vals, axes=(0, 0))
    return k, float(np.max(np.abs(k - gs))) if np.ndim(k) else abs(float(k - gs))


def quad_adaptive(
    g: Callable,
    a: float,
    b: float,
    tol: float = DEFAULT.quad_tol,
    points: Sequence[float] | None = None,
    vectorized: bool = False,
    max_depth: int = DEFAULT.quad_max_depth,
):
    """Adaptive Gauss-Kronrod (7/15) quadrature of a scalar- or array-valued
    integrand.

    ``points`` are breakpoint hints (e.g. kinks or jumps) that always become
    panel boundaries. With ``vectorized=True`` the integrand is called once per
    panel with an array of 15 abscissae and must return values stacked along
    axis 0.
    """
    a = float(a)
    b = float(b)
    if a == b:
        probe = g(np.array([a])) if vectorized else g(a)
        probe = np.asarray(probe, dtype=float)
        return np.zeros_like(probe[0] if vectorized else probe)
    if a > b:
        return -quad_adaptive(g, b, a, tol, points, vectorized, max_depth)
    cuts = sorted({a, b, *(float(p) for p in (points or ()) if a < p < b)})
    # global adaptive strategy: always bisect the panel with the largest error
    heap = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, err = _gk15(g, lo, hi, vectorized)
        heapq.heappush(heap, (-err, lo, hi, 0, val))
    total_err = sum(-item[0] for item in heap)
    while total_err > tol:
        neg_err, lo, hi, depth, _ = heapq.heappop(heap)
        if depth >= max_depth:
            raise ToleranceNotMet(f"refinement limit reached on [{lo}, {hi}] (error {total_err:.2e})")
        mid = 0.5 * (lo + hi)
        total_err += neg_err
        for l2, h2 in ((lo, mid), (mid, hi)):
            val, err = _gk15(g, l2, h2, vectorized)
            total_err += err
            heapq.heappush(heap, (-err, l2, h2, depth + 1, val))
    return sum(item[4] for item in sorted(heap, key=lambda item: item[1]))


def _steps(x, rel):
    return rel * np.maximum(1.0, np.abs(x))


def fd_gradient(g: Callable[[np.ndarray], float], x, rel_step: float = DEFAULT.fd_rel_step) -> np.ndarray:
    """Central-difference gradient of a scalar function; error O(h^2)."""
    x = np.array(x, dtype=float, ndmin=1)
    h = _steps(x, rel_step)
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        grad[i] = (float(g(xp)) - float(g(xm))) / (xp[i] - xm[i])
    return grad


_D1 = ((-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0))
_D2 = ((-2.0, -1.0 / 12.0), (-1.0, 16.0 / 12.0), (0.0, -30.0 / 12.0), (1.0, 16.0 / 12.0), (2.0, -1.0 / 12.0))


def fd_hessian(g: Callable[[np.ndarray], float], x, rel_step: float = DEFAULT.fd_hessian_rel_step) -> np.ndarray:
    """Fourth-order central-difference Hessian of a scalar function.

    The step is ``rel_step * max(1, |x_i|)``. A second-order stencil at the
    gradient step would leave roundoff of order ``eps |g| / h^2 ~ 1e-6``;
    the wider fourth-order stencil keeps both roundoff and truncation near
    ``1e-10`` for O(1) data.
    """
    x = np.array(x, dtype=float, ndmin=1)
    n = x.shape[0]
    h = _steps(x, rel_step)
    H = np.empty((n, n))

    def at(i, si, j=None, sj=0.0):
        y = x.copy()
        y[i] += si * h[i]
        if j is not None:
            y[j] += sj * h[j]
        return float(g(y))

    g0 = float(g(x))
    for i in range(n):
        H[i, i] = sum(w * (g0 if k == 0.0 else at(i, k)) for k, w in _D2) / h[i] ** 2
        for j in range(i + 1, n):
            val = sum(wi * wj * at(i, ki, j, kj) for ki, wi in _D1 for kj, wj in _D1)
            H[i, j] = H[j, i] = val / (h[i] * h[j])
    return H


def directional_derivative(g: Callable[[np.ndarray], float], x, direction, rel_step: float = DEFAULT.fd_rel_step) -> float:
    """Central difference of ``g`` along ``direction`` (not normalized)."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(direction, dtype=float)
    h = rel_step * max(1.0, float(np.max(np.abs(x))))
    return (float(g(x + h * d)) - float(g(x - h * d))) / (2.0 * h)
