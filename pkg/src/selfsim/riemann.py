"""Lax construction of small-data Riemann problems in ``V``-coordinates.

The composition map sends strengths ``(s_0, ..., s_{m-1})`` to the state
reached from ``V_L`` by one wave of each family in ascending order: a shock
for ``s <= 0`` and a fan for ``s > 0`` in genuinely nonlinear families, a
contact in linearly degenerate ones. Strengths are found by a quasi-Newton
iteration started from ``s = 0`` with the exact Jacobian ``[r^a(V_L)]``
there and Broyden updates afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BackwardProblem, LeftBall, NoConvergence, OutOfBall
from .profile import Constant, FanPiece, Profile
from .system import Kind, SystemDef
from .waves import shock_curve, simple_wave_curve, wave_fan

MAX_ITER = 30
MAX_DAMPING = 12


@dataclass(frozen=True)
class RiemannResult:
    strengths: np.ndarray
    states: np.ndarray
    speeds: np.ndarray
    iterations: int
    residual: float


def _forward_halfplane(sys: SystemDef) -> str:
    planes = {f.forward_halfplane for f in sys.fields}
    if len(planes) != 1:
        raise BackwardProblem("fields are forward in different halfplanes; no single forward Riemann problem exists")
    return planes.pop()


def _compose(sys: SystemDef, V_L, s, guesses=None):
    """States ``V_0 = V_L, V_1, ..., V_m`` reached by the wave sequence."""
    states = [np.array(V_L, dtype=float)]
    speeds = []
    try:
        for a in range(sys.dim):
            V = states[-1]
            sa = float(s[a])
            if sa == 0.0:
                states.append(V.copy())
                speeds.append(float("nan"))
            elif sys.fields[a].kind is Kind.LD or sa > 0:
                states.append(simple_wave_curve(sys, V, a, sa))
                speeds.append(float(sys.lam(V, a)))
            else:
                g = None if guesses is None else guesses[a + 1] - guesses[a] + V
                Vp, xi = shock_curve(sys, V, a, sa, guess=g)
                states.append(Vp)
                speeds.append(xi)
    except LeftBall as exc:
        raise OutOfBall(str(exc)) from exc
    return np.array(states), np.array(speeds)


def riemann_strengths(sys: SystemDef, V_L, V_R, tol: float = 1e-13) -> RiemannResult:
    """Strengths and intermediate states of the forward Riemann problem ``(V_L, V_R)``.

    Raises
    ------
    NoConvergence
        The iteration did not reach ``tol`` in ``MAX_ITER`` steps.
    OutOfBall
        Data or intermediate states leave ``P_eps``.
    """
    V_L = np.array(V_L, dtype=float)
    V_R = np.array(V_R, dtype=float)
    for name, V in (("V_L", V_L), ("V_R", V_R)):
        if not sys.in_ball(V):
            raise OutOfBall(f"{name} lies outside P_eps")
    s = np.zeros(sys.dim)
    states, speeds = _compose(sys, V_L, s)
    F = states[-1] - V_R
    B = sys.eigen(V_L).right.copy()
    res = float(np.max(np.abs(F)))
    it = 0
    while res > tol:
        if it >= MAX_ITER:
            raise NoConvergence(f"Riemann iteration stalled at residual {res:.2e}")
        it += 1
        step = -np.linalg.solve(B, F)
        t = 1.0
        for _ in range(MAX_DAMPING):
            try:
                new_states, new_speeds = _compose(sys, V_L, s + t * step, states)
                break
            except OutOfBall:
                t *= 0.5
        else:
            raise OutOfBall("every damped Riemann step leaves P_eps")
        ds = t * step
        s = s + ds
        F_new = new_states[-1] - V_R
        B = B + np.outer(F_new - F - B @ ds, ds) / float(ds @ ds)
        F, states, speeds = F_new, new_states, new_speeds
        res = float(np.max(np.abs(F)))
    return RiemannResult(s, states, speeds, it, res)


def _profile_from_strengths(sys: SystemDef, result: RiemannResult, halfplane: str) -> Profile:
    zero = sys.tol.zero_strength
    breakpoints: list[float] = []
    families: list[int] = []
    pieces: list = [Constant(result.states[0].copy())]
    for a in range(sys.dim):
        sa = float(result.strengths[a])
        if abs(sa) <= zero:
            continue
        # chain from the last emitted state so skipped roundoff-size waves leave no spurious jump
        Vm, Vp = pieces[-1].V, result.states[a + 1]
        if sys.fields[a].kind is Kind.GNL and sa > 0:
            fan = wave_fan(sys, Vm, a, sa)
            breakpoints += [fan.xi_start, fan.xi_end]
            families += [a, a]
            pieces += [FanPiece(fan), Constant(fan.V_end.copy())]
        else:
            breakpoints.append(float(result.speeds[a]))
            families.append(a)
            pieces.append(Constant(Vp.copy()))
    bp = np.array(breakpoints)
    if bp.shape[0] > 1 and not np.all(np.diff(bp) > 0):
        raise NoConvergence("wave speeds of the composed solution are not increasing")
    return Profile(halfplane, bp, tuple(pieces), tuple(families))


def riemann_solution(sys: SystemDef, V_L, V_R) -> tuple[Profile, RiemannResult]:
    """Forward solution profile together with the strengths it was built from."""
    halfplane = _forward_halfplane(sys)
    result = riemann_strengths(sys, V_L, V_R)
    return _profile_from_strengths(sys, result, halfplane), result


def solve_riemann(sys: SystemDef, V_L, V_R, direction: str = "forward") -> Profile:
    """Forward Riemann solution as a profile over ``xi``.

    Only ``direction="forward"`` is supported: backward problems are not
    uniquely solvable and are produced by the generator instead.
    """
    if direction != "forward":
        raise BackwardProblem("backward Riemann problems have no unique solution; use the generator")
    return riemann_solution(sys, V_L, V_R)[0]


def steady_riemann_2d(sys: SystemDef, U_upper, U_lower, halfplane: str = "x>0") -> Profile:
    """Steady supersonic problem with ``U_lower`` below and ``U_upper`` above the origin.

    On ``x > 0`` the ray variable ``xi = y/x`` runs from the lower state
    (``xi -> -inf``) to the upper one; on ``x < 0`` the order is reversed.
    """
    Uu = np.asarray(U_upper.as_array() if hasattr(U_upper, "as_array") else U_upper, dtype=float)
    Ul = np.asarray(U_lower.as_array() if hasattr(U_lower, "as_array") else U_lower, dtype=float)
    Vu, Vl = sys.to_V(Uu), sys.to_V(Ul)
    forward = _forward_halfplane(sys)
    if halfplane != forward:
        raise BackwardProblem(f"all sectors are backward in {halfplane}; the problem is not uniquely solvable")
    V_L, V_R = (Vl, Vu) if halfplane == "x>0" else (Vu, Vl)
    return solve_riemann(sys, V_L, V_R)
