"""Elementary waves: simple-wave and shock curves, fans, contacts.

Conventions
-----------
Families are 0-based and eigenvectors are the oriented unit vectors of the
system, so ``lam_V . r > 0`` on GNL families. Along a simple-wave curve the
parameter ``s`` is arc length. Along a shock curve ``V^+ - V^- = s hat r``,
so ``|s| = |[V]|``.

In a forward sector admissible shocks have ``s <= 0``; in a backward sector
``s >= 0``. Fans always have ``s >= 0`` in the direction of increasing
``xi``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import LeftBall, NoConvergence, NotAJump, NotGNL, NotLD, NotStrictlyHyperbolic
from .system import Kind, SystemDef, hat_eigen_batch, halfplane_sign


class WaveKind(str, enum.Enum):
    SHOCK = "shock"
    SIMPLE = "simple_wave"
    CONTACT = "contact"


@dataclass(frozen=True)
class Wave:
    """One elementary wave.

    ``speed`` is the jump speed for shocks and contacts and the pair
    ``(lam(V^-), lam(V^+))`` for simple waves.
    """

    family: int
    kind: WaveKind
    V_minus: np.ndarray
    V_plus: np.ndarray
    s: float
    speed: float | tuple[float, float]

    @property
    def jump_size(self) -> float:
        return float(np.linalg.norm(self.V_plus - self.V_minus))

    def to_dict(self) -> dict:
        speed = list(self.speed) if isinstance(self.speed, tuple) else self.speed
        return {
            "family": self.family,
            "kind": self.kind.value,
            "V_minus": [float(x) for x in self.V_minus],
            "V_plus": [float(x) for x in self.V_plus],
            "s": float(self.s),
            "speed": speed,
        }


@dataclass(frozen=True)
class LaxReport:
    satisfied: bool
    margin: float
    direction: str
    jump_size: float


def admissible_shock_sign(sys: SystemDef, a: int, halfplane: str) -> int:
    """``-1`` if the family's sector in ``halfplane`` is forward, ``+1`` if backward."""
    forward = sys.fields[a].admissible_sign * halfplane_sign(halfplane) > 0
    return -1 if forward else 1


def _check_ball(sys, V, what):
    if not sys.in_ball(V):
        raise LeftBall(f"{what} left P_eps (|V - V_bar| = {float(sys.distance(V)):.4g} > {sys.epsilon:.4g})")


def _n_steps(sys, s, per_eps, minimum=1):
    return max(minimum, int(math.ceil(per_eps * abs(s) / sys.epsilon)))


def simple_wave_path(sys: SystemDef, V_minus, a: int, s: float, n_steps: int | None = None):
    """RK4 integration of ``dV/ds = r^a(V)`` from ``V_minus``.

    Returns ``(s_nodes, V_nodes, r_nodes)``; ``r_nodes`` are the eigenvectors
    at the nodes (used for Hermite interpolation).
    """
    V = np.array(V_minus, dtype=float)
    _check_ball(sys, V, "start state")
    if n_steps is None:
        n_steps = _n_steps(sys, s, sys.tol.fan_steps_per_eps)
    h = s / n_steps
    nodes = np.linspace(0.0, s, n_steps + 1)
    path = np.empty((n_steps + 1, sys.dim))
    tangents = np.empty_like(path)
    path[0] = V

    def rhs(v):
        if not sys.in_ball(v, slack=1e-9):
            raise LeftBall(f"simple-wave curve of family {a} left P_eps")
        try:
            return sys.r(v, a)
        except NotStrictlyHyperbolic as exc:
            raise LeftBall(str(exc)) from exc

    k1 = rhs(V)
    tangents[0] = k1
    for i in range(n_steps):
        k2 = rhs(V + 0.5 * h * k1)
        k3 = rhs(V + 0.5 * h * k2)
        k4 = rhs(V + h * k3)
        V = V + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        _check_ball(sys, V, f"simple-wave curve of family {a}")
        path[i + 1] = V
        k1 = rhs(V)
        tangents[i + 1] = k1
    return nodes, path, tangents


def simple_wave_curve(sys: SystemDef, V_minus, a: int, s: float) -> np.ndarray:
    """``R^a(V^-, s)``: the point at arc length ``s`` on the integral curve of ``r^a``."""
    if s == 0:
        return np.array(V_minus, dtype=float)
    return simple_wave_path(sys, V_minus, a, s)[1][-1]


def _hermite(t, h, y0, y1, d0, d1):
    """Cubic Hermite on ``[0, h]`` at ``t``; ``y`` may carry trailing axes."""
    u = (t / h)[..., None] if np.ndim(y0) > np.ndim(t) else t / h
    h00 = 2 * u**3 - 3 * u**2 + 1
    h10 = u**3 - 2 * u**2 + u
    h01 = -2 * u**3 + 3 * u**2
    h11 = u**3 - u**2
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1


def _hermite_deriv(t, h, y0, y1, d0, d1):
    u = (t / h)[..., None] if np.ndim(y0) > np.ndim(t) else t / h
    return ((6 * u**2 - 6 * u) * y0 + (3 * u**2 - 4 * u + 1) * h * d0 + (-6 * u**2 + 6 * u) * y1 + (3 * u**2 - 2 * u) * h * d1) / h


@dataclass(frozen=True)
class Fan:
    """Centered wave ``W(xi) = R^a(V_start, s(xi))`` on ``[xi_start, xi_end]``.

    The integral curve is tabulated by RK4 and interpolated by cubic Hermite
    polynomials using the exact tangents ``r^a`` and ``d lam / ds = lam_V . r``.
    """

    family: int
    V_start: np.ndarray
    s: float
    s_nodes: np.ndarray
    V_nodes: np.ndarray
    r_nodes: np.ndarray
    lam_nodes: np.ndarray
    rate_nodes: np.ndarray
    inverse_tol: float = 1e-11

    @property
    def xi_start(self) -> float:
        return float(self.lam_nodes[0])

    @property
    def xi_end(self) -> float:
        return float(self.lam_nodes[-1])

    @property
    def V_end(self) -> np.ndarray:
        return self.V_nodes[-1]

    def _locate(self, s):
        h = self.s_nodes[1] - self.s_nodes[0]
        k = np.clip((s / h).astype(int), 0, len(self.s_nodes) - 2)
        return k, h

    def V_of_s(self, s):
        s = np.asarray(s, dtype=float)
        if self.s == 0:
            return np.broadcast_to(self.V_start, s.shape + (self.V_start.shape[0],)).copy()
        k, h = self._locate(s)
        t = s - self.s_nodes[k]
        return _hermite(t, h, self.V_nodes[k], self.V_nodes[k + 1], self.r_nodes[k], self.r_nodes[k + 1])

    def lam_of_s(self, s):
        s = np.asarray(s, dtype=float)
        if self.s == 0:
            return np.full(s.shape, self.xi_start)
        k, h = self._locate(s)
        t = s - self.s_nodes[k]
        return _hermite(t, h, self.lam_nodes[k], self.lam_nodes[k + 1], self.rate_nodes[k], self.rate_nodes[k + 1])

    def s_of_xi(self, xi):
        """Invert ``s -> lam(s)`` by safeguarded Newton (bisection fallback)."""
        xi = np.asarray(xi, dtype=float)
        if self.s == 0:
            return np.zeros(xi.shape)
        xi_c = np.clip(xi, self.xi_start, self.xi_end)
        k = np.clip(np.searchsorted(self.lam_nodes, xi_c) - 1, 0, len(self.s_nodes) - 2)
        base = self.s_nodes[k]
        h = self.s_nodes[1] - self.s_nodes[0]
        coeffs = (self.lam_nodes[k], self.lam_nodes[k + 1], self.rate_nodes[k], self.rate_nodes[k + 1])
        lo = np.zeros_like(xi_c)
        hi = np.full_like(xi_c, h)
        dl = coeffs[1] - coeffs[0]
        t = h * np.clip((xi_c - coeffs[0]) / np.where(dl > 0, dl, 1.0), 0.0, 1.0)
        for _ in range(80):
            f = _hermite(t, h, *coeffs) - xi_c
            lo = np.where(f < 0, t, lo)
            hi = np.where(f > 0, t, hi)
            df = _hermite_deriv(t, h, *coeffs)
            new = t - f / np.where(df > 0, df, 1.0)
            bad = (new < lo) | (new > hi) | ~(df > 0)
            new = np.where(bad, 0.5 * (lo + hi), new)
            done = (np.abs(new - t) <= 1e-3 * self.inverse_tol) | (f == 0)
            t = np.where(f == 0, t, new)
            if np.all(done):
                break
        s = base + t
        return s

    def __call__(self, xi):
        return self.V_of_s(self.s_of_xi(xi))

    def derivative(self, xi):
        """``dW/dxi = r / (lam_V . r)`` at the interpolated point."""
        s = self.s_of_xi(xi)
        k, h = self._locate(s)
        t = s - self.s_nodes[k]
        dV = _hermite_deriv(t, h, self.V_nodes[k], self.V_nodes[k + 1], self.r_nodes[k], self.r_nodes[k + 1])
        dl = _hermite_deriv(t, h, self.lam_nodes[k], self.lam_nodes[k + 1], self.rate_nodes[k], self.rate_nodes[k + 1])
        return dV / np.asarray(dl)[..., None]

    def to_wave(self) -> Wave:
        return Wave(self.family, WaveKind.SIMPLE, self.V_start.copy(), self.V_end.copy(), self.s, (self.xi_start, self.xi_end))


def wave_fan(sys: SystemDef, V_minus, a: int, s: float) -> Fan:
    """Fan of GNL family ``a`` and strength ``s >= 0`` starting from ``V_minus``."""
    if sys.fields[a].kind is not Kind.GNL:
        raise NotGNL(f"family {a} is linearly degenerate; use contact_wave")
    if s < 0:
        raise ValueError("fans have s >= 0 in the direction of increasing xi")
    V_minus = np.array(V_minus, dtype=float)
    if s == 0:
        lam0 = float(sys.lam(V_minus, a))
        r0 = sys.r(V_minus, a)
        return Fan(a, V_minus, 0.0, np.zeros(2), np.stack([V_minus, V_minus]), np.stack([r0, r0]),
                   np.array([lam0, lam0]), np.ones(2), sys.tol.fan_inverse_tol)
    n = _n_steps(sys, s, sys.tol.fan_steps_per_eps, sys.tol.fan_min_nodes)
    nodes, path, tangents = simple_wave_path(sys, V_minus, a, s, n)
    lam = sys.lam(path, a)
    rate = np.asarray(sys.gnl_rate(path, a), dtype=float).reshape(-1)
    return Fan(a, V_minus, float(s), nodes, path, tangents, np.asarray(lam, dtype=float), rate, sys.tol.fan_inverse_tol)


def rh_residual(sys: SystemDef, V_minus, V_plus, xi: float) -> float:
    V_minus = np.asarray(V_minus, dtype=float)
    V_plus = np.asarray(V_plus, dtype=float)
    fp, fm = sys.flux(np.stack([V_plus, V_minus]))
    return float(np.max(np.abs(fp - fm - xi * (V_plus - V_minus))))


def _hat_pair(sys, V_plus, V_minus, a):
    vals, R = hat_eigen_batch(sys, V_plus, V_minus)
    return float(vals[0, a]), R[0, :, a]


def _shock_solve(sys, V_minus, a, s, guess, tol, max_iter=60):
    """Fixed-point iteration ``V^+ = V^- + s hat r(V^+, V^-)``.

    The map is a contraction with constant ``O(|s|)`` inside the ball, so
    a good predictor converges in a handful of sweeps.
    """
    Vp = np.array(guess, dtype=float)
    for _ in range(max_iter):
        _, r_hat = _hat_pair(sys, Vp, V_minus, a)
        new = V_minus + s * r_hat
        if not np.all(np.isfinite(new)):
            raise NoConvergence("shock iteration produced non-finite values")
        if not sys.in_ball(new, slack=1e-6):
            raise LeftBall(f"shock curve of family {a} left P_eps at s={s:.4g}")
        err = float(np.max(np.abs(new - Vp)))
        Vp = new
        if err <= tol:
            return Vp
    raise NoConvergence(f"shock curve iteration stalled at s={s:.4g} (last update {err:.2e})")


def shock_curve_path(sys: SystemDef, V_minus, a: int, s: float, step: float | None = None):
    """Continuation along the shock curve from 0 to ``s``.

    Returns arrays ``(s_nodes, V_plus_nodes, xi_nodes)``. The step defaults
    to ``eps * tol.shock_step_fraction``; each step uses a quadratic
    extrapolation predictor and a fixed-point corrector.
    """
    V_minus = np.array(V_minus, dtype=float)
    _check_ball(sys, V_minus, "start state")
    lam0 = float(sys.lam(V_minus, a))
    if s == 0:
        return np.zeros(1), V_minus[None, :].copy(), np.array([lam0])
    step = sys.epsilon * sys.tol.shock_step_fraction if step is None else step
    n = max(1, int(math.ceil(abs(s) / step)))
    nodes = np.linspace(0.0, s, n + 1)
    pts = [V_minus.copy()]
    xis = [lam0]
    tangents = [sys.r(V_minus, a)]
    tol = 1e-15 * max(1.0, float(np.max(np.abs(V_minus))))
    for i in range(1, n + 1):
        if i == 1:
            guess = V_minus + nodes[1] * tangents[0]
        elif i == 2:
            guess = 2 * pts[-1] - pts[-2]
        else:
            guess = 3 * pts[-1] - 3 * pts[-2] + pts[-3]
        Vp = _shock_solve(sys, V_minus, a, nodes[i], guess, max(tol, 1e-14))
        xi, _ = _hat_pair(sys, Vp, V_minus, a)
        pts.append(Vp)
        xis.append(xi)
    path = np.array(pts)
    xis = np.array(xis)
    _check_ball(sys, path[-1], f"shock curve of family {a}")
    res = rh_residual(sys, V_minus, path[-1], xis[-1])
    if res > sys.tol.rh_tol:
        raise NoConvergence(f"shock state misses Rankine-Hugoniot by {res:.2e}")
    return nodes, path, xis


def shock_curve(sys: SystemDef, V_minus, a: int, s: float, guess=None) -> tuple[np.ndarray, float]:
    """``(S^a(V^-, s), xi)`` with ``V^+ - V^- = s hat r^a(V^+, V^-)`` and ``xi = hat lam^a``.

    A direct fixed-point solve from ``guess`` (default ``V^- + s r^a(V^-)``)
    is tried first; continuation from ``s = 0`` is the fallback.
    """
    V_minus = np.array(V_minus, dtype=float)
    if s == 0:
        _check_ball(sys, V_minus, "start state")
        return V_minus, float(sys.lam(V_minus, a))
    if abs(s) <= 0.25 * sys.epsilon:
        _check_ball(sys, V_minus, "start state")
        g = V_minus + s * sys.r(V_minus, a) if guess is None else np.asarray(guess, dtype=float)
        tol = max(1e-15 * max(1.0, float(np.max(np.abs(V_minus)))), 1e-14)
        try:
            Vp = _shock_solve(sys, V_minus, a, s, g, tol, max_iter=40)
        except (NoConvergence, LeftBall):
            Vp = None
        if Vp is not None and sys.in_ball(Vp):
            xi, _ = _hat_pair(sys, Vp, V_minus, a)
            if rh_residual(sys, V_minus, Vp, xi) <= sys.tol.rh_tol:
                return Vp, float(xi)
    _, path, xis = shock_curve_path(sys, V_minus, a, s)
    return path[-1], float(xis[-1])


def shock_wave(sys: SystemDef, V_minus, a: int, s: float) -> Wave:
    Vp, xi = shock_curve(sys, V_minus, a, s)
    return Wave(a, WaveKind.SHOCK, np.array(V_minus, dtype=float), Vp, float(s), xi)


def contact_wave(sys: SystemDef, V_minus, a: int, s: float) -> Wave:
    """Contact discontinuity of the LD family ``a``: ``V^+ = R^a(V^-, s)``, ``xi = lam^a(V^-)``."""
    if sys.fields[a].kind is not Kind.LD:
        raise NotLD(f"family {a} is genuinely nonlinear")
    V_minus = np.array(V_minus, dtype=float)
    xi = float(sys.lam(V_minus, a))
    Vp = simple_wave_curve(sys, V_minus, a, s)
    res = rh_residual(sys, V_minus, Vp, xi)
    if res > sys.tol.rh_tol:
        raise NoConvergence(f"contact misses Rankine-Hugoniot by {res:.2e}")
    return Wave(a, WaveKind.CONTACT, V_minus, Vp, float(s), xi)


def entropy_dissipation(sys: SystemDef, V_minus, V_plus, xi: float) -> float:
    """``E = [q] - xi [e]``; admissible jumps have ``E <= 0`` for ``x > 0``."""
    res = rh_residual(sys, V_minus, V_plus, xi)
    if res > sys.tol.jump_rh_tol:
        raise NotAJump(f"Rankine-Hugoniot residual {res:.2e} exceeds {sys.tol.jump_rh_tol:.0e}")
    V = np.stack([np.asarray(V_plus, dtype=float), np.asarray(V_minus, dtype=float)])
    q = sys.entropy_flux(V)
    e = sys.entropy(V)
    return float((q[0] - q[1]) - xi * (e[0] - e[1]))


def lax_check(sys: SystemDef, wave: Wave, direction: str, delta_L: float | None = None) -> LaxReport:
    """Uniform Lax condition with margin ``delta_L |[V]|``.

    forward:  ``lam(V^-) - d|[V]| >= xi >= lam(V^+) + d|[V]|``
    backward: ``lam(V^-) + d|[V]| <= xi <= lam(V^+) - d|[V]|``
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    d = sys.delta_L if delta_L is None else delta_L
    J = wave.jump_size
    if J == 0:
        return LaxReport(True, 0.0, direction, 0.0)
    lam_m, lam_p = sys.lam(np.stack([wave.V_minus, wave.V_plus]), wave.family)
    xi = float(wave.speed if not isinstance(wave.speed, tuple) else wave.speed[0])
    if direction == "forward":
        margin = min(lam_m - d * J - xi, xi - lam_p - d * J)
    else:
        margin = min(xi - lam_m - d * J, lam_p - d * J - xi)
    return LaxReport(bool(margin >= 0), float(margin), direction, J)


def calibrate_delta_L(sys: SystemDef) -> SystemDef:
    """Verify the candidate ``delta_L`` on forward and backward shocks; halve on failure.

    Shocks of strength ``eps/64 .. eps/4`` are built from ``V_bar`` and from
    states at distance ``eps/2`` along ``+-r^a`` and ``+-grad lam^a``.
    """
    eps = sys.epsilon
    d = sys.delta_L
    cases = []
    for f in sys.fields:
        if f.kind is not Kind.GNL:
            continue
        a = f.family
        g = sys.lam_grad(sys.V_bar, a)
        dirs = [sys.r(sys.V_bar, a), g / np.linalg.norm(g)]
        bases = [sys.V_bar] + [sys.V_bar + sgn * 0.5 * eps * u for u in dirs for sgn in (1.0, -1.0)]
        for V0 in bases:
            for mag in (eps / 64, eps / 16, eps / 4):
                for sign, direction in ((-1.0, "forward"), (1.0, "backward")):
                    cases.append((shock_wave(sys, V0, a, sign * mag), direction))
    for _ in range(sys.tol.lax_halvings + 1):
        if all(lax_check(sys, w, direction, d).satisfied for w, direction in cases):
            return sys.replace(delta_L=d)
        d *= 0.5
    raise NoConvergence("no Lax margin survived calibration")


def tabulate_curves(sys: SystemDef, V_minus, a: int, s_values) -> list[dict]:
    """Rows ``s, S(s), xi_S, E, R(s), lam(R)`` for the CSV export.

    For LD families the shock columns use the shock-curve construction too
    and ``R`` is the contact curve.
    """
    V_minus = np.array(V_minus, dtype=float)
    rows = []
    for s in s_values:
        s = float(s)
        Vs, xi = shock_curve(sys, V_minus, a, s)
        E = entropy_dissipation(sys, V_minus, Vs, xi)
        Vr = simple_wave_curve(sys, V_minus, a, s)
        rows.append({"s": s, "S": Vs, "xi_S": xi, "E": E, "R": Vr, "xi_R": float(sys.lam(Vr, a))})
    return rows


def curves_csv(sys: SystemDef, rows: list[dict], family: int) -> str:
    m = sys.dim
    buf = io.StringIO()
    buf.write(f"# shock curve S and simple-wave curve R of family {family} (0-based) in V = f^x(U) coordinates\n")
    buf.write("# s: curve parameter (|s| = |[V]| on S, arc length on R); xi_S: shock speed y/x; E = [q] - xi[e]; xi_R = lam(R)\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["s"] + [f"S_{i + 1}" for i in range(m)] + ["xi_S", "E"] + [f"R_{i + 1}" for i in range(m)] + ["xi_R"])
    for row in rows:
        writer.writerow(
            [repr(row["s"])]
            + [repr(float(x)) for x in row["S"]]
            + [repr(row["xi_S"]), repr(row["E"])]
            + [repr(float(x)) for x in row["R"]]
            + [repr(row["xi_R"])]
        )
    return buf.getvalue()
