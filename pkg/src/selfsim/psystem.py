"""The p-system as a two-field test instance.

With ``f^x(U) = U`` the steady equations ``U_x + f(U)_y = 0`` are the
Lagrangian p-system ``tau_t - u_z = 0, u_t + p(tau)_z = 0`` with ``x`` as
time. ``p(tau) = tau^{-gamma}`` gives two genuinely nonlinear fields with
speeds ``-+ sqrt(-p'(tau))``.
"""

from __future__ import annotations

import numpy as np

from .config import DEFAULT
from .system import RawSystem, SystemDef, make_system


def psystem_raw(gamma: float = 1.4, tau0: float = 1.0, u0: float = 0.0, epsilon: float = 0.05) -> RawSystem:
    g = float(gamma)

    def p(tau):
        return tau ** (-g)

    def P(tau):
        # antiderivative of -p, so that eta = u^2/2 + P(tau) is convex
        return tau ** (1.0 - g) / (g - 1.0)

    def fx(U):
        return np.asarray(U, dtype=float).copy()

    def fy(U):
        U = np.asarray(U, dtype=float)
        return np.stack([-U[..., 1], p(U[..., 0])], axis=-1)

    def fx_jac(U):
        U = np.asarray(U, dtype=float)
        return np.broadcast_to(np.eye(2), U.shape[:-1] + (2, 2)).copy()

    def fy_jac(U):
        U = np.asarray(U, dtype=float)
        tau = U[..., 0]
        zero = np.zeros_like(tau)
        return np.stack([
            np.stack([zero, -np.ones_like(tau)], axis=-1),
            np.stack([-g * tau ** (-g - 1.0), zero], axis=-1),
        ], axis=-2)

    def eta(U):
        U = np.asarray(U, dtype=float)
        return 0.5 * U[..., 1] ** 2 + P(U[..., 0])

    def psiy(U):
        U = np.asarray(U, dtype=float)
        return U[..., 1] * p(U[..., 0])

    return RawSystem(
        fx=fx,
        fy=fy,
        eta=eta,
        psix=eta,
        psiy=psiy,
        U_bar=np.array([tau0, u0], dtype=float),
        epsilon=float(epsilon),
        fx_jac=fx_jac,
        fy_jac=fy_jac,
        to_U=lambda V: np.asarray(V, dtype=float).copy(),
        vectorized=True,
        name="psystem",
        params={"model": "psystem", "gamma": g, "tau0": float(tau0), "u0": float(u0), "epsilon": float(epsilon)},
    )


def psystem(gamma: float = 1.4, tau0: float = 1.0, u0: float = 0.0, epsilon: float = 0.05, tol=None, calibrate: bool = True) -> SystemDef:
    """Validated p-system around ``(tau0, u0)``."""
    return make_system(psystem_raw(gamma, tau0, u0, epsilon), DEFAULT if tol is None else tol, calibrate=calibrate)
