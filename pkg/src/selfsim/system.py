"""Generic strictly hyperbolic systems in the steady self-similar variables.

A system is given in conserved variables ``U`` by two flux functions
``f^x, f^y`` and an entropy-flux triple ``(eta, psi^x, psi^y)``. Steady
self-similar solutions depend on ``xi = y / x`` only, and after the change of
variables ``V = f^x(U)`` they satisfy the one-dimensional Riemann-type system

    (f(V) - xi V)_xi + V = 0,      f(V) = f^y(U(V)).

:func:`make_system` performs this reduction around a background state and
checks the structural hypotheses (strict hyperbolicity, entropy
compatibility, definite entropy forms, GNL/LD dichotomy) on a sampled ball.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import (
    DegenerateForm,
    EntropyPairMismatch,
    MixedNonlinearity,
    NoConvergence,
    NotInvertible,
    NotStrictlyHyperbolic,
    SelfsimError,
)
from .numerics import (
    EigenDecomp,
    MAX_DIM,
    eig_real,
    fd_gradient,
    fd_hessian,
    newton_solve,
    quad_adaptive,
)


class Kind(str, enum.Enum):
    GNL = "GNL"
    LD = "LD"


@dataclass(frozen=True)
class FieldInfo:
    """Classification of one characteristic family (0-based index)."""

    family: int
    kind: Kind
    admissible_sign: int
    center: float
    rate_min: float
    rate_max: float

    @property
    def forward_halfplane(self) -> str:
        return "x>0" if self.admissible_sign > 0 else "x<0"

    def is_forward(self, halfplane: str) -> bool:
        """True if the sector of this family in ``halfplane`` is a forward sector."""
        return halfplane == self.forward_halfplane


def halfplane_sign(halfplane: str) -> int:
    if halfplane == "x>0":
        return 1
    if halfplane == "x<0":
        return -1
    raise ValueError(f"halfplane must be 'x>0' or 'x<0', got {halfplane!r}")


@dataclass(frozen=True)
class RawSystem:
    """User description of a system in conserved variables.

    With ``vectorized=True`` every callable accepts a batch ``(..., m)``.
    Optional closed forms: ``fx_jac``/``fy_jac`` (flux Jacobians),
    ``eta_grad``/``eta_hess``, ``to_U`` (inverse of ``f^x``), ``eigen``
    (returns generalized eigenvalues ``(..., m)`` and eigenvectors in ``U``
    as columns ``(..., m, m)``) and ``lam_grad(U, a)`` (``grad_U lam^a``).
    """

    fx: Callable
    fy: Callable
    eta: Callable
    psix: Callable
    psiy: Callable
    U_bar: np.ndarray
    epsilon: float
    fx_jac: Callable | None = None
    fy_jac: Callable | None = None
    eta_grad: Callable | None = None
    eta_hess: Callable | None = None
    to_U: Callable | None = None
    eigen: Callable | None = None
    lam_grad: Callable | None = None
    vectorized: bool = False
    name: str = "custom"
    params: dict = field(default_factory=dict)


def _batched(fn, vectorized):
    if vectorized:
        return fn

    def wrapped(X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return np.asarray(fn(X), dtype=float)
        flat = X.reshape(-1, X.shape[-1])
        out = np.stack([np.asarray(fn(x), dtype=float) for x in flat])
        return out.reshape(X.shape[:-1] + out.shape[1:])

    return wrapped


def _fd_jac_batch(fn, X, rel=1e-6):
    X = np.asarray(X, dtype=float)
    m = X.shape[-1]
    cols = []
    for j in range(m):
        h = rel * np.maximum(1.0, np.abs(X[..., j]))
        E = np.zeros_like(X)
        E[..., j] = h
        cols.append((fn(X + E) - fn(X - E)) / (2 * h)[..., None])
    return np.stack(cols, axis=-1)


def _sort_orient(values, R, ref, gap):
    """Sort eigenpairs and check their separation; columns are normalized and oriented by ``ref``."""
    if np.iscomplexobj(values):
        if np.max(np.abs(values.imag)) > gap:
            raise NotStrictlyHyperbolic("complex characteristic speeds")
        values = values.real
        R = R.real
    order = np.argsort(values, axis=-1)
    values = np.take_along_axis(values, order, axis=-1)
    R = np.take_along_axis(R, order[..., None, :], axis=-1)
    if values.shape[-1] > 1 and np.min(np.diff(values, axis=-1)) <= gap:
        raise NotStrictlyHyperbolic("characteristic speeds not separated")
    R = R / np.linalg.norm(R, axis=-2, keepdims=True)
    if ref is None:
        idx = np.argmax(np.abs(R), axis=-2)
        signs = np.sign(np.take_along_axis(R, idx[..., None, :], axis=-2))
    else:
        signs = np.sign(np.sum(R * ref, axis=-2, keepdims=True))
        signs[signs == 0] = 1.0
    return values, R * signs


@dataclass(frozen=True)
class SystemDef:
    """Reduced system in ``V = f^x(U)`` coordinates around ``V_bar``.

    Construct with :func:`make_system`. Eigenvectors are unit vectors in
    ``V`` oriented like ``r_ref`` (the eigenvectors at ``V_bar``, flipped
    so that ``lam_V . r > 0`` for GNL families).
    """

    raw: RawSystem
    dim: int
    U_bar: np.ndarray
    V_bar: np.ndarray
    epsilon: float
    w: np.ndarray
    e_const: float
    q_const: float
    r_ref: np.ndarray
    fields: tuple[FieldInfo, ...] = ()
    delta_s: float = 0.0
    delta_L: float = 0.0
    lam_spread: tuple[float, ...] = ()
    entropy_pair_residual: float = 0.0
    tol: Tolerances = DEFAULT

    # -- change of variables -------------------------------------------------
    def to_V(self, U) -> np.ndarray:
        return _batched(self.raw.fx, self.raw.vectorized)(np.asarray(U, dtype=float))

    def to_U(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=float)
        if self.raw.to_U is not None:
            return np.asarray(self.raw.to_U(V), dtype=float)
        fx = _batched(self.raw.fx, self.raw.vectorized)
        jac = self._fx_jac

        def single(v):
            return newton_solve(lambda u: fx(u) - v, self.U_bar, jac=lambda u: jac(u), tol=1e-13)

        if V.ndim == 1:
            return single(V)
        flat = V.reshape(-1, self.dim)
        return np.stack([single(v) for v in flat]).reshape(V.shape)

    def _fx_jac(self, U):
        if self.raw.fx_jac is not None:
            return _batched(self.raw.fx_jac, self.raw.vectorized)(U)
        return _fd_jac_batch(_batched(self.raw.fx, self.raw.vectorized), U)

    def _fy_jac(self, U):
        if self.raw.fy_jac is not None:
            return _batched(self.raw.fy_jac, self.raw.vectorized)(U)
        return _fd_jac_batch(_batched(self.raw.fy, self.raw.vectorized), U)

    # -- flux, Jacobian, entropy ---------------------------------------------
    def flux(self, V) -> np.ndarray:
        return _batched(self.raw.fy, self.raw.vectorized)(self.to_U(V))

    def jacobian(self, V) -> np.ndarray:
        """``A(V) = f_V = f^y_U (f^x_U)^{-1}``."""
        U = self.to_U(V)
        Ax = self._fx_jac(U)
        Ay = self._fy_jac(U)
        return np.swapaxes(np.linalg.solve(np.swapaxes(Ax, -1, -2), np.swapaxes(Ay, -1, -2)), -1, -2)

    def entropy(self, V):
        """``e(V)``, normalized so that ``e(V_bar) = 0`` and ``e_V(V_bar) = 0``."""
        V = np.asarray(V, dtype=float)
        U = self.to_U(V)
        return _batched(self.raw.psix, self.raw.vectorized)(U) - V @ self.w - self.e_const

    def entropy_flux(self, V):
        """``q(V)``, normalized with the same affine entropy as :meth:`entropy`."""
        U = self.to_U(V)
        fy = _batched(self.raw.fy, self.raw.vectorized)(U)
        return _batched(self.raw.psiy, self.raw.vectorized)(U) - fy @ self.w - self.q_const

    def entropy_grad(self, V) -> np.ndarray:
        """``e_V = eta_U - w``."""
        U = self.to_U(V)
        if self.raw.eta_grad is not None:
            g = _batched(self.raw.eta_grad, self.raw.vectorized)(U)
        else:
            eta = _batched(self.raw.eta, self.raw.vectorized)
            g = np.apply_along_axis(lambda u: fd_gradient(eta, u), -1, U)
        return g - self.w

    def entropy_hessian(self, V) -> np.ndarray:
        """``e_VV = eta_UU (f^x_U)^{-1}``; finite differences if no closed form."""
        V = np.asarray(V, dtype=float)
        if self.raw.eta_hess is None:
            return fd_hessian(lambda v: float(self.entropy(v)), V)
        U = self.to_U(V)
        H = _batched(self.raw.eta_hess, self.raw.vectorized)(U)
        Ax = self._fx_jac(U)
        return np.swapaxes(np.linalg.solve(np.swapaxes(Ax, -1, -2), np.swapaxes(H, -1, -2)), -1, -2)

    # -- eigenstructure ------------------------------------------------------
    def eigen_batch(self, V) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues ``(..., m)`` and oriented unit right eigenvectors ``(..., m, m)``."""
        V = np.asarray(V, dtype=float)
        ref = None if self.r_ref is None else self.r_ref
        if self.raw.eigen is not None:
            U = self.to_U(V)
            vals, RU = self.raw.eigen(U)
            R = self._fx_jac(U) @ RU
            return _sort_orient(np.asarray(vals), R, ref, self.tol.gap)
        vals, R = np.linalg.eig(self.jacobian(V))
        return _sort_orient(vals, R, ref, self.tol.gap)

    def eigen(self, V) -> EigenDecomp:
        vals, R = self.eigen_batch(np.asarray(V, dtype=float))
        return EigenDecomp(vals, R, np.linalg.inv(R))

    def lam(self, V, a: int):
        return self.eigen_batch(V)[0][..., a]

    def r(self, V, a: int) -> np.ndarray:
        return self.eigen_batch(V)[1][..., :, a]

    def lam_grad(self, V, a: int) -> np.ndarray:
        """``grad_V lam^a`` (closed form when the raw system provides one)."""
        V = np.asarray(V, dtype=float)
        if self.raw.lam_grad is not None:
            U = self.to_U(V)
            gU = np.asarray(self.raw.lam_grad(U, a), dtype=float)
            Ax = self._fx_jac(U)
            return np.linalg.solve(np.swapaxes(Ax, -1, -2), gU[..., None])[..., 0]
        if V.ndim == 1:
            return fd_gradient(lambda v: float(self.lam(v, a)), V)
        return np.stack([self.lam_grad(v, a) for v in V.reshape(-1, self.dim)]).reshape(V.shape)

    def gnl_rate(self, V, a: int):
        """``lam^a_V . r^a`` with the oriented unit eigenvector."""
        return np.sum(self.lam_grad(V, a) * self.r(V, a), axis=-1)

    def form(self, V, a: int, b: int | None = None):
        """Entropy form ``e_VV r^a r^b`` (``b`` defaults to ``a``)."""
        V = np.asarray(V, dtype=float)
        b = a if b is None else b
        if V.ndim > 1:
            return np.array([self.form(v, a, b) for v in V.reshape(-1, self.dim)]).reshape(V.shape[:-1])
        R = self.eigen_batch(V)[1]
        return float(R[:, a] @ self.entropy_hessian(V) @ R[:, b])

    def hat_A(self, V_plus, V_minus) -> np.ndarray:
        return averaged_jacobian(self, V_plus, V_minus)

    def hat_eigen(self, V_plus, V_minus) -> EigenDecomp:
        return hat_eigen(self, V_plus, V_minus)

    # -- geometry ------------------------------------------------------------
    def distance(self, V):
        return np.linalg.norm(np.asarray(V, dtype=float) - self.V_bar, axis=-1)

    def in_ball(self, V, slack: float = 1e-12) -> bool:
        return bool(np.all(self.distance(V) <= self.epsilon * (1.0 + slack)))

    def field(self, a: int) -> FieldInfo:
        return self.fields[a]

    def replace(self, **changes) -> "SystemDef":
        return dataclasses.replace(self, **changes)


def averaged_jacobian(sys: SystemDef, V_plus, V_minus) -> np.ndarray:
    """``hat A = int_0^1 A(V^- + t (V^+ - V^-)) dt`` by adaptive quadrature."""
    Vp = np.asarray(V_plus, dtype=float)
    Vm = np.asarray(V_minus, dtype=float)
    dV = Vp - Vm
    if not np.any(dV):
        return sys.jacobian(Vm)
    # symmetric parametrization about the midpoint keeps the swap exact
    mid = 0.5 * (Vp + Vm)
    return quad_adaptive(
        lambda t: sys.jacobian(mid[None, :] + t[:, None] * dV[None, :]),
        -0.5,
        0.5,
        tol=sys.tol.quad_tol,
        vectorized=True,
    )


def hat_eigen(sys: SystemDef, V_plus, V_minus) -> EigenDecomp:
    """Eigen-decomposition of the averaged Jacobian, oriented like the system."""
    A = averaged_jacobian(sys, V_plus, V_minus)
    vals, R = np.linalg.eig(A)
    vals, R = _sort_orient(vals, R, sys.r_ref, sys.tol.gap)
    return EigenDecomp(vals, R, np.linalg.inv(R))


def hat_eigen_batch(sys: SystemDef, V_plus, V_minus) -> tuple[np.ndarray, np.ndarray]:
    """Batched version of :func:`hat_eigen` for stacks of state pairs (one GK15 panel each)."""
    from .numerics import _GW, _KW, _NODES  # noqa: PLC0415 - private rule tables

    Vp = np.atleast_2d(np.asarray(V_plus, dtype=float))
    Vm = np.atleast_2d(np.asarray(V_minus, dtype=float))
    mid = 0.5 * (Vp + Vm)
    dV = Vp - Vm
    pts = mid[:, None, :] + 0.5 * _NODES[None, :, None] * dV[:, None, :]
    A = sys.jacobian(pts)
    Ak = 0.5 * np.tensordot(_KW, A, axes=(0, 1))
    Ag = 0.5 * np.tensordot(_GW, A, axes=(0, 1))
    if np.max(np.abs(Ak - Ag)) > sys.tol.quad_tol:
        Ak = np.stack([averaged_jacobian(sys, p, m) for p, m in zip(Vp, Vm)])
    vals, R = np.linalg.eig(Ak)
    return _sort_orient(vals, R, sys.r_ref, sys.tol.gap)


def entropy_hessian_form(sys: SystemDef, V, a: int) -> float:
    """``e_VV(V) r^a(V) r^a(V)``; raises :class:`DegenerateForm` if it vanishes."""
    val = sys.form(V, a)
    if abs(val) < sys.tol.degenerate_form_tol:
        raise DegenerateForm(f"e_VV r r = {val:.3e} for family {a}")
    return val


def classify_fields(sys: SystemDef) -> list[FieldInfo]:
    """Field classification computed by :func:`make_system`."""
    return list(sys.fields)


def sample_ball(center, radius: float, n_random: int, seed: int, extra_dirs=()) -> np.ndarray:
    """Lattice directions ``{-1,0,1}^m`` scaled to the sphere, seeded uniform
    points inside the ball, and ``center +- radius * d`` for each ``extra_dirs``."""
    center = np.asarray(center, dtype=float)
    m = center.shape[0]
    pts = [center]
    for k in itertools.product((-1.0, 0.0, 1.0), repeat=m):
        k = np.array(k)
        nk = np.linalg.norm(k)
        if nk > 0:
            pts.append(center + radius * k / nk)
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n_random, m))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = radius * rng.random(n_random) ** (1.0 / m)
    pts.extend(center + rad[:, None] * g)
    for d in extra_dirs:
        d = np.asarray(d, dtype=float)
        d = d / np.linalg.norm(d)
        pts.append(center + radius * d)
        pts.append(center - radius * d)
    return np.array(pts)


def _validate(sys: SystemDef, tol: Tolerances) -> SystemDef:
    """Sample ``P_eps`` and check the structural hypotheses; return the completed system."""
    m = sys.dim
    eps = sys.epsilon
    grads = [sys.lam_grad(sys.V_bar, a) for a in range(m)]
    dirs = [g for g in grads if np.linalg.norm(g) > 0]
    pts = sample_ball(sys.V_bar, eps, tol.n_random_samples, tol.sample_seed, dirs)
    vals, R = sys.eigen_batch(pts)

    # entropy-pair compatibility q_V = e_V A
    resid = 0.0
    A = sys.jacobian(pts)
    eV = sys.entropy_grad(pts)
    for k in range(pts.shape[0]):
        qV = fd_gradient(lambda v: float(sys.entropy_flux(v)), pts[k])
        resid = max(resid, float(np.max(np.abs(qV - eV[k] @ A[k]))))
    if resid > tol.entropy_pair_tol:
        raise EntropyPairMismatch(f"|q_V - e_V f_V| = {resid:.3e}")

    fields = []
    for a in range(m):
        rates = np.array([float(sys.gnl_rate(p, a)) for p in pts])
        forms = sys.form(pts, a)
        if np.any(np.abs(forms) < tol.degenerate_form_tol):
            raise DegenerateForm(f"e_VV r r vanishes for family {a}")
        if not (np.all(forms > 0) or np.all(forms < 0)):
            raise DegenerateForm(f"e_VV r r changes sign for family {a}")
        if np.all(np.abs(rates) <= tol.ld_tol):
            kind = Kind.LD
        elif np.all(rates > tol.ld_tol):
            kind = Kind.GNL
        else:
            raise MixedNonlinearity(
                f"family {a}: lam_V . r ranges over [{rates.min():.3e}, {rates.max():.3e}]"
            )
        fields.append(
            FieldInfo(
                family=a,
                kind=kind,
                admissible_sign=int(np.sign(forms[0])),
                center=float(vals[0, a]),
                rate_min=float(rates.min()),
                rate_max=float(rates.max()),
            )
        )

    spread = tuple(float(np.max(np.abs(vals[:, a] - vals[0, a]))) for a in range(m))

    # spectral slack of the averaged Jacobian: random triples plus extremal ones
    rng = np.random.default_rng(tol.sample_seed + 1)
    n = tol.n_hat_triples
    idx = rng.integers(0, pts.shape[0], size=(n, 3))
    V0, Vp, Vm = pts[idx[:, 0]], pts[idx[:, 1]], pts[idx[:, 2]]
    ext = []
    for d in dirs:
        d = d / np.linalg.norm(d)
        ext.append((sys.V_bar + eps * d, sys.V_bar - eps * d, sys.V_bar - eps * d))
        ext.append((sys.V_bar - eps * d, sys.V_bar + eps * d, sys.V_bar + eps * d))
    if ext:
        e0, ep, em = (np.array(x) for x in zip(*ext))
        V0, Vp, Vm = np.vstack([V0, e0]), np.vstack([Vp, ep]), np.vstack([Vm, em])
    hat_vals, _ = hat_eigen_batch(sys, Vp, Vm)
    lam0 = sys.eigen_batch(V0)[0]
    delta_s = float(np.max(np.abs(lam0 - hat_vals)))

    gnl_rates = [f.rate_min for f in fields if f.kind is Kind.GNL]
    delta_L = 0.25 * 0.5 * min(gnl_rates) if gnl_rates else 0.0
    return sys.replace(
        fields=tuple(fields),
        delta_s=delta_s,
        delta_L=delta_L,
        lam_spread=spread,
        entropy_pair_residual=resid,
    )


def make_system(raw: RawSystem, tol: Tolerances = DEFAULT, calibrate: bool = True) -> SystemDef:
    """Reduce ``raw`` to ``V`` coordinates and validate it on ``P_eps``.

    The entropy is normalized by the affine entropy ``w . U`` with
    ``w = eta_U(U_bar)``. ``eps`` is halved (at most ``tol.eps_halvings``
    times) while a sampled hypothesis fails; the final value is stored on
    the returned system. With ``calibrate`` the Lax margin ``delta_L`` is
    verified on constructed shocks (see :func:`selfsim.waves.calibrate_delta_L`).

    Raises
    ------
    NotInvertible
        ``f^x_U(U_bar)`` is singular.
    NotStrictlyHyperbolic
        ``A(V_bar)`` has complex or repeated eigenvalues.
    EntropyPairMismatch
        ``|q_V - e_V f_V|`` exceeds ``tol.entropy_pair_tol``.
    """
    U_bar = np.asarray(raw.U_bar, dtype=float)
    m = U_bar.shape[0]
    if not 1 <= m <= MAX_DIM:
        raise ValueError(f"dimension {m} not supported")
    fx = _batched(raw.fx, raw.vectorized)
    fy = _batched(raw.fy, raw.vectorized)
    Ax = (
        np.asarray(_batched(raw.fx_jac, raw.vectorized)(U_bar), dtype=float)
        if raw.fx_jac is not None
        else _fd_jac_batch(fx, U_bar)
    )
    if not np.all(np.isfinite(Ax)) or np.linalg.matrix_rank(Ax, tol=1e-12 * max(1.0, np.abs(Ax).max())) < m:
        raise NotInvertible("f^x_U(U_bar) is singular; rotate coordinates first")
    if raw.eta_grad is not None:
        w = np.asarray(_batched(raw.eta_grad, raw.vectorized)(U_bar), dtype=float)
    else:
        w = fd_gradient(_batched(raw.eta, raw.vectorized), U_bar)
    V_bar = np.asarray(fx(U_bar), dtype=float)
    e_const = float(_batched(raw.psix, raw.vectorized)(U_bar)) - float(w @ V_bar)
    q_const = float(_batched(raw.psiy, raw.vectorized)(U_bar)) - float(w @ fy(U_bar))

    base = SystemDef(
        raw=raw, dim=m, U_bar=U_bar, V_bar=V_bar, epsilon=float(raw.epsilon), w=w,
        e_const=e_const, q_const=q_const, r_ref=None, tol=tol,
    )
    # strict hyperbolicity at the background is not negotiable
    eig_real(base.jacobian(V_bar), tol.gap)
    _, R0 = base.eigen_batch(V_bar)
    base = base.replace(r_ref=R0)
    signs = np.ones(m)
    for a in range(m):
        rate = float(base.gnl_rate(V_bar, a))
        if rate < -tol.ld_tol:
            signs[a] = -1.0
    base = base.replace(r_ref=R0 * signs)

    eps = float(raw.epsilon)
    last: Exception | None = None
    for _ in range(tol.eps_halvings + 1):
        try:
            sys = _validate(base.replace(epsilon=eps), tol)
            break
        except (NotStrictlyHyperbolic, MixedNonlinearity, DegenerateForm, NoConvergence) as exc:
            last = exc
        except SelfsimError as exc:
            if isinstance(exc, EntropyPairMismatch):
                raise
            last = exc
        eps *= 0.5
    else:
        raise last  # type: ignore[misc]
    if calibrate and any(f.kind is Kind.GNL for f in sys.fields):
        from .waves import calibrate_delta_L  # noqa: PLC0415 - waves depends on this module

        sys = calibrate_delta_L(sys)
    return sys


def describe(sys: SystemDef) -> dict:
    """Summary numbers used by the CLI and the docs."""
    return {
        "name": sys.raw.name,
        "dim": sys.dim,
        "epsilon": sys.epsilon,
        "V_bar": sys.V_bar.tolist(),
        "delta_s": sys.delta_s,
        "delta_L": sys.delta_L,
        "fields": [
            {
                "family": f.family,
                "kind": f.kind.value,
                "center": f.center,
                "admissible_sign": f.admissible_sign,
                "forward_halfplane": f.forward_halfplane,
                "rate_min": f.rate_min,
                "rate_max": f.rate_max,
            }
            for f in sys.fields
        ],
    }

