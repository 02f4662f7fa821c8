"""Isentropic Euler equations in two space dimensions.

States are ``U = (rho, m, n)`` with momentum ``(m, n)``. Every array
function here accepts a single state of shape ``(3,)`` or a batch of shape
``(..., 3)`` and works along the last axis. Units are fixed so that the
sound speed is 1 at density 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import NonPhysical, Subsonic
from .numerics import quad_adaptive


class PressureLaw:
    """Barotropic pressure law ``p(rho)``.

    Subclasses supply ``p``, ``c2 = p'`` and ``dc2 = p''``; the internal
    energy ``e(rho)`` defaults to quadrature of ``p / rho^2`` from 1.
    Shifting ``e`` by a constant adds a multiple of ``rho`` to the entropy,
    which is removed anyway by the affine normalization of the entropy.
    """

    def p(self, rho):
        raise NotImplementedError

    def c2(self, rho):
        raise NotImplementedError

    def dc2(self, rho):
        raise NotImplementedError

    def c(self, rho):
        return np.sqrt(self.c2(rho))

    def c_rho(self, rho):
        """Derivative of the sound speed, ``c' = p'' / (2 c)``."""
        return self.dc2(rho) / (2.0 * self.c(rho))

    def internal_energy(self, rho):
        rho_arr = np.asarray(rho, dtype=float)
        flat = [
            float(quad_adaptive(lambda r: self.p(r) / r**2, 1.0, float(x), tol=1e-13))
            for x in rho_arr.reshape(-1)
        ]
        return np.asarray(flat).reshape(rho_arr.shape)


@dataclass(frozen=True)
class GammaLaw(PressureLaw):
    """``p = rho^gamma / gamma`` so that ``c(1) = 1`` and ``c_rho(1) = (gamma - 1) / 2``."""

    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def p(self, rho):
        return np.asarray(rho, dtype=float) ** self.gamma / self.gamma

    def c2(self, rho):
        return np.asarray(rho, dtype=float) ** (self.gamma - 1.0)

    def dc2(self, rho):
        return (self.gamma - 1.0) * np.asarray(rho, dtype=float) ** (self.gamma - 2.0)

    def internal_energy(self, rho):
        rho = np.asarray(rho, dtype=float)
        g = self.gamma
        if g == 1.0:
            return np.log(rho)
        return rho ** (g - 1.0) / (g * (g - 1.0))


class CallableLaw(PressureLaw):
    """Pressure law from user callables.

    ``dp`` and ``d2p`` default to central differences of ``p``. The
    structural conditions ``c^2 > 0`` and ``c_rho > -1`` are checked on
    ``check_range`` at construction.
    """

    def __init__(
        self,
        p: Callable,
        dp: Callable | None = None,
        d2p: Callable | None = None,
        check_range: tuple[float, float] = (0.5, 2.0),
    ):
        self._p = p
        self._dp = dp
        self._d2p = d2p
        grid = np.linspace(*check_range, 65)
        if np.any(self.c2(grid) <= 0):
            raise NonPhysical("pressure law has p'(rho) <= 0 on the check range")
        if np.any(self.c_rho(grid) <= -1):
            raise NonPhysical("pressure law violates c_rho > -1 on the check range")

    def p(self, rho):
        return np.asarray(self._p(np.asarray(rho, dtype=float)), dtype=float)

    def c2(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self._dp is not None:
            return np.asarray(self._dp(rho), dtype=float)
        h = 1e-6 * np.maximum(1.0, rho)
        return (self.p(rho + h) - self.p(rho - h)) / (2 * h)

    def dc2(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self._d2p is not None:
            return np.asarray(self._d2p(rho), dtype=float)
        h = 1e-4 * np.maximum(1.0, rho)
        return (self.c2(rho + h) - self.c2(rho - h)) / (2 * h)


DEFAULT_LAW = GammaLaw(1.4)


@dataclass(frozen=True)
class EulerState:
    """Conserved Euler state with derived primitive quantities."""

    rho: float
    m: float
    n: float
    law: PressureLaw = DEFAULT_LAW

    def __post_init__(self):
        if not self.rho > 0:
            raise NonPhysical(f"density must be positive, got {self.rho}")

    @classmethod
    def from_array(cls, U, law: PressureLaw = DEFAULT_LAW) -> "EulerState":
        rho, m, n = (float(x) for x in np.asarray(U, dtype=float))
        return cls(rho, m, n, law)

    @classmethod
    def from_primitive(cls, rho, u, v, law: PressureLaw = DEFAULT_LAW) -> "EulerState":
        return cls(rho, rho * u, rho * v, law)

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.m, self.n])

    @property
    def u(self) -> float:
        return self.m / self.rho

    @property
    def v(self) -> float:
        return self.n / self.rho

    @property
    def c(self) -> float:
        return float(self.law.c(self.rho))

    @property
    def mach(self) -> float:
        """Axial Mach number ``u / c``."""
        return self.u / self.c


def _as_U(U):
    if isinstance(U, EulerState):
        return U.as_array()
    U = np.asarray(U, dtype=float)
    if U.shape[-1] != 3:
        raise ValueError("Euler states have 3 components")
    if np.any(U[..., 0] <= 0):
        raise NonPhysical("density must be positive")
    return U


def euler_fluxes(U, law: PressureLaw = DEFAULT_LAW) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(f^x(U), f^y(U))``."""
    U = _as_U(U)
    rho, m, n = U[..., 0], U[..., 1], U[..., 2]
    p = law.p(rho)
    fx = np.stack([m, m * m / rho + p, m * n / rho], axis=-1)
    fy = np.stack([n, m * n / rho, n * n / rho + p], axis=-1)
    return fx, fy


def euler_jacobians(U, law: PressureLaw = DEFAULT_LAW) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(f^x_U, f^y_U)`` with shape ``(..., 3, 3)``."""
    U = _as_U(U)
    rho, m, n = U[..., 0], U[..., 1], U[..., 2]
    u = m / rho
    v = n / rho
    c2 = law.c2(rho)
    zero = np.zeros_like(rho)
    one = np.ones_like(rho)
    Ax = np.stack([
        np.stack([zero, one, zero], axis=-1),
        np.stack([c2 - u * u, 2 * u, zero], axis=-1),
        np.stack([-u * v, v, u], axis=-1),
    ], axis=-2)
    Ay = np.stack([
        np.stack([zero, zero, one], axis=-1),
        np.stack([-u * v, v, u], axis=-1),
        np.stack([c2 - v * v, zero, 2 * v], axis=-1),
    ], axis=-2)
    return Ax, Ay


class EulerFields(NamedTuple):
    """Generalized eigenvalues of ``(f^y_U, f^x_U)`` and eigenvectors in ``U``."""

    lam_minus: np.ndarray
    lam_0: np.ndarray
    lam_plus: np.ndarray
    r_minus: np.ndarray
    r_0: np.ndarray
    r_plus: np.ndarray

    def values(self) -> np.ndarray:
        return np.stack([self.lam_minus, self.lam_0, self.lam_plus], axis=-1)

    def vectors(self) -> np.ndarray:
        """Eigenvectors as columns, shape ``(..., 3, 3)``."""
        return np.stack([self.r_minus, self.r_0, self.r_plus], axis=-1)


def _check_supersonic(rho, m, n, a):
    if np.any(m * m + n * n <= a * a) or np.any(m <= a):
        raise Subsonic("state is not supersonic in the x direction (need m > rho c)")


def euler_eigen_fields(U, law: PressureLaw = DEFAULT_LAW) -> EulerFields:
    """Closed-form roots of ``det(f^y_U - lam f^x_U) = 0`` and eigenvectors.

    ``r_0 = (0, m, n)``. The vectors ``r_pm`` are scaled so that at
    ``(1, M, 0)`` with ``c = 1`` they equal ``(+-M, +-(M^2 - 1), sqrt(M^2 - 1))``.
    """
    U = _as_U(U)
    rho, m, n = U[..., 0], U[..., 1], U[..., 2]
    c2 = law.c2(rho)
    c = np.sqrt(c2)
    a = rho * c
    _check_supersonic(rho, m, n, a)
    S = np.sqrt(m * m + n * n - a * a)
    D = m * m - a * a
    lam_p = (m * n + a * S) / D
    lam_m = (m * n - a * S) / D
    lam_0 = n / m
    u = m / rho
    v = n / rho

    def vec(lam, sign):
        b = c2 - v * v + lam * u * v
        raw = np.stack([lam * (lam * u - v), b, lam * b], axis=-1)
        return raw * (sign * (u * u / c2 - 1.0) / c2)[..., None]

    r0 = np.stack([np.zeros_like(m), m, n], axis=-1)
    return EulerFields(lam_m, lam_0, lam_p, vec(lam_m, -1.0), r0, vec(lam_p, 1.0))


def _lambda_pm_gradient(U, law, sign):
    rho, m, n = U[..., 0], U[..., 1], U[..., 2]
    c = law.c(rho)
    a = rho * c
    da = c + rho * law.c_rho(rho)
    S = np.sqrt(m * m + n * n - a * a)
    D = m * m - a * a
    N = m * n + sign * a * S
    dN = np.stack([sign * da * (S * S - a * a) / S, n + sign * a * m / S, m + sign * a * n / S], axis=-1)
    dD = np.stack([-2 * a * da, 2 * m, np.zeros_like(m)], axis=-1)
    return (dN * D[..., None] - N[..., None] * dD) / (D * D)[..., None]


def euler_lambda_gradient(U, family: int, law: PressureLaw = DEFAULT_LAW) -> np.ndarray:
    """Analytic ``grad_U lam`` for family ``-1``, ``0`` or ``+1``."""
    U = _as_U(U)
    rho, m, n = U[..., 0], U[..., 1], U[..., 2]
    _check_supersonic(rho, m, n, rho * law.c(rho))
    if family == 0:
        return np.stack([np.zeros_like(m), -n / (m * m), 1.0 / m], axis=-1)
    if family not in (-1, 1):
        raise ValueError("family must be -1, 0 or +1")
    return _lambda_pm_gradient(U, law, float(family))


def euler_gnl_indicator(U, family: int, law: PressureLaw = DEFAULT_LAW):
    """``grad_U lam . r`` with the eigenvector scaling of :func:`euler_eigen_fields`.

    At ``(1, M, 0)`` the plus and minus families give
    ``M^3 (1 + c_rho(1)) / (M^2 - 1)^{3/2}``; the contact family gives 0.
    """
    fields = euler_eigen_fields(U, law)
    r = {-1: fields.r_minus, 0: fields.r_0, 1: fields.r_plus}[family]
    grad = euler_lambda_gradient(U, family, law)
    return np.sum(grad * r, axis=-1)


def euler_entropy_pair(U, law: PressureLaw = DEFAULT_LAW) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(eta, psi^x, psi^y)`` with ``eta = rho e(rho) + |m, n|^2 / (2 rho)``."""
    U = _as_U(U)
    rho, m, n = U[..., 0], U[..., 1], U[..., 2]
    eta = rho * law.internal_energy(rho) + 0.5 * (m * m + n * n) / rho
    h = eta + law.p(rho)
    return eta, h * m / rho, h * n / rho


def euler_entropy_grad(U, law: PressureLaw = DEFAULT_LAW) -> np.ndarray:
    """``eta_U = (e + p / rho - |v|^2 / 2, u, v)``."""
    U = _as_U(U)
    rho, m, n = U[..., 0], U[..., 1], U[..., 2]
    u = m / rho
    v = n / rho
    first = law.internal_energy(rho) + law.p(rho) / rho - 0.5 * (u * u + v * v)
    return np.stack([first, u, v], axis=-1)


def euler_entropy_hessian(U, law: PressureLaw = DEFAULT_LAW) -> np.ndarray:
    """``eta_UU``, symmetric positive definite for ``rho > 0``."""
    U = _as_U(U)
    rho, m, n = U[..., 0], U[..., 1], U[..., 2]
    u = m / rho
    v = n / rho
    inv = 1.0 / rho
    zero = np.zeros_like(rho)
    return np.stack([
        np.stack([(law.c2(rho) + u * u + v * v) * inv, -u * inv, -v * inv], axis=-1),
        np.stack([-u * inv, inv, zero], axis=-1),
        np.stack([-v * inv, zero, inv], axis=-1),
    ], axis=-2)


def euler_U_from_V(V, law: PressureLaw = DEFAULT_LAW, rho_guess=1.0, tol: float = 1e-14, max_iter: int = 60) -> np.ndarray:
    """Invert ``V = f^x(U)`` on the supersonic branch.

    With ``m = V_1`` the density solves ``m^2 / rho + p(rho) = V_2``. That
    function is decreasing for ``rho c < m``; Newton's method is run
    elementwise from ``rho_guess`` and kept on that branch.
    """
    V = np.asarray(V, dtype=float)
    m = V[..., 0]
    target = V[..., 1]
    if np.any(m <= 0):
        raise Subsonic("inverse map needs positive x-momentum")
    rho = np.broadcast_to(np.asarray(rho_guess, dtype=float), m.shape).copy()
    # move the guess onto the supersonic branch, where g is convex and
    # decreasing and Newton converges monotonically
    for _ in range(60):
        sub = law.c2(rho) - m * m / (rho * rho) >= 0
        if not np.any(sub):
            break
        rho = np.where(sub, 0.5 * rho, rho)
    for _ in range(max_iter):
        g = m * m / rho + law.p(rho) - target
        dg = law.c2(rho) - m * m / (rho * rho)
        if np.any(dg >= 0):
            raise Subsonic("inverse map reached the sonic point")
        step = g / dg
        new = rho - step
        # stay positive: halve toward zero instead of crossing it
        new = np.where(new <= 0, 0.5 * rho, new)
        done = np.abs(new - rho) <= tol * np.maximum(1.0, np.abs(rho))
        rho = new
        if np.all(done):
            break
    else:
        raise Subsonic("inverse map did not converge")
    n = V[..., 2] * rho / m
    return np.stack([rho, m, n], axis=-1)


@dataclass(frozen=True)
class MachGeometry:
    """Mach angle and the six sector center rays of a supersonic background."""

    mach: float
    mu: float

    @property
    def forward_centers(self) -> tuple[float, float, float]:
        """Angles (radians, from +x) of the forward sector center rays."""
        return (-self.mu, 0.0, self.mu)

    @property
    def backward_centers(self) -> tuple[float, float, float]:
        return (math.pi - self.mu, math.pi, math.pi + self.mu)

    def center_slopes(self) -> tuple[float, float, float]:
        """Values of ``xi = y / x`` on the center rays."""
        t = math.tan(self.mu)
        return (-t, 0.0, t)


def mach_geometry(M: float) -> MachGeometry:
    """``mu = arcsin(1 / M)`` for ``M > 1``."""
    if not M > 1:
        raise Subsonic(f"Mach number {M} is not supersonic")
    return MachGeometry(float(M), math.asin(1.0 / M))


def rotate_state(U, theta: float) -> np.ndarray:
    """Rotate the momentum of ``U`` by ``theta`` (counterclockwise)."""
    U = _as_U(U)
    cs, sn = math.cos(theta), math.sin(theta)
    m, n = U[..., 1], U[..., 2]
    return np.stack([U[..., 0], cs * m - sn * n, sn * m + cs * n], axis=-1)


def align_with_x(U) -> tuple[np.ndarray, float]:
    """Rotate ``U`` so its velocity points along +x; return the state and the angle used."""
    U = _as_U(U)
    theta = -math.atan2(float(U[2]), float(U[1]))
    return rotate_state(U, theta), theta


def euler_raw(
    gamma: float = 1.4,
    mach: float = 2.0,
    rho0: float = 1.0,
    epsilon: float = 0.05,
    law: PressureLaw | None = None,
):
    """Raw Euler system around ``U_bar = (rho0, rho0 M c(rho0), 0)``."""
    from .system import RawSystem  # noqa: PLC0415 - keep euler importable on its own

    law = GammaLaw(gamma) if law is None else law
    if not mach > 1:
        raise Subsonic(f"background Mach number {mach} must exceed 1")
    c0 = float(law.c(rho0))
    U_bar = np.array([rho0, rho0 * mach * c0, 0.0])

    def eigen(U):
        fields = euler_eigen_fields(U, law)
        return fields.values(), fields.vectors()

    def lam_grad(U, a):
        return euler_lambda_gradient(U, a - 1, law)

    params = {"model": "euler", "mach": float(mach), "rho0": float(rho0), "epsilon": float(epsilon)}
    if isinstance(law, GammaLaw):
        params["gamma"] = float(law.gamma)
    return RawSystem(
        fx=lambda U: euler_fluxes(U, law)[0],
        fy=lambda U: euler_fluxes(U, law)[1],
        eta=lambda U: euler_entropy_pair(U, law)[0],
        psix=lambda U: euler_entropy_pair(U, law)[1],
        psiy=lambda U: euler_entropy_pair(U, law)[2],
        U_bar=U_bar,
        epsilon=float(epsilon),
        fx_jac=lambda U: euler_jacobians(U, law)[0],
        fy_jac=lambda U: euler_jacobians(U, law)[1],
        eta_grad=lambda U: euler_entropy_grad(U, law),
        eta_hess=lambda U: euler_entropy_hessian(U, law),
        to_U=lambda V: euler_U_from_V(V, law, rho_guess=rho0),
        eigen=eigen,
        lam_grad=lam_grad,
        vectorized=True,
        name="euler",
        params=params,
    )


def euler_system(
    gamma: float = 1.4,
    mach: float = 2.0,
    rho0: float = 1.0,
    epsilon: float = 0.05,
    law: PressureLaw | None = None,
    tol=None,
    calibrate: bool = True,
):
    """Validated :class:`~selfsim.system.SystemDef` for isentropic Euler.

    Families are indexed 0 (minus), 1 (contact), 2 (plus).
    """
    from .config import DEFAULT  # noqa: PLC0415
    from .system import make_system  # noqa: PLC0415

    raw = euler_raw(gamma, mach, rho0, epsilon, law)
    return make_system(raw, DEFAULT if tol is None else tol, calibrate=calibrate)
