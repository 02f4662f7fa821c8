"""Admissibility checks for self-similar profiles.

The weak form is checked in its primitive version: for every pair
``xi_1 < xi_2``

    int_{xi_1}^{xi_2} V  +  [f(V) - xi V]_{xi_1}^{xi_2}  =  0,

and the entropy inequality as ``int e + [q - xi e] <= 0`` on ``x > 0``
(``>= 0`` on ``x < 0``). Integration constants cancel in the differences.
Integrals over fans are taken in the curve parameter ``s`` where
``d xi = lam'(s) ds``; with the fan's cubic Hermite interpolants the
integrand for ``V`` is a polynomial and Gauss-Legendre is exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotResonant
from .profile import Constant, FanPiece, Profile, SectorLayout, evaluate, left_limit, sector_layout
from .system import Kind, SystemDef, halfplane_sign
from .waves import Wave, WaveKind, _hermite, _hermite_deriv, lax_check, rh_residual

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class Reason(str, enum.Enum):
    MULTIPLE_FORWARD_WAVES = "MultipleForwardWaves"
    INADMISSIBLE_SHOCK = "InadmissibleShock"
    NEIGHBOURHOOD_TOO_SMALL = "NeighbourhoodTooSmall"
    CONSECUTIVE_SIMPLE_WAVES = "ConsecutiveSimpleWaves"
    MULTIPLE_CONTACTS = "MultipleContacts"
    FAN_IN_LD_SECTOR = "FanInLDSector"
    RH_VIOLATED = "RankineHugoniotViolated"
    NOT_CONSTANT_OUTSIDE = "NotConstantOutsideSectors"
    LEFT_BALL = "LeftBall"


# -- primitives ------------------------------------------------------------------


def _fan_cell_integrals(fan, q, t_hi, k):
    """``int_0^{t_hi} q(V(s_k + t)) lam'(s_k + t) dt`` for arrays ``t_hi``, ``k``."""
    h = fan.s_nodes[1] - fan.s_nodes[0]
    tau = 0.5 * t_hi[:, None] * (_GL_X[None, :] + 1.0)
    Vk, Vk1 = fan.V_nodes[k][:, None, :], fan.V_nodes[k + 1][:, None, :]
    rk, rk1 = fan.r_nodes[k][:, None, :], fan.r_nodes[k + 1][:, None, :]
    V = _hermite(tau, h, Vk, Vk1, rk, rk1)
    dlam = _hermite_deriv(tau, h, fan.lam_nodes[k][:, None], fan.lam_nodes[k + 1][:, None],
                          fan.rate_nodes[k][:, None], fan.rate_nodes[k + 1][:, None])
    vals = q(V)
    return 0.5 * t_hi[:, None] * np.sum((_GL_W[None, :] * dlam)[..., None] * vals, axis=1)


class _Primitive:
    """``P(xi) = int_{xi_ref}^{xi} q(V(eta)) d eta`` for a piecewise profile."""

    def __init__(self, profile: Profile, q, width: int):
        self.profile = profile
        self.q = q
        self.width = width
        bp = profile.breakpoints
        self.ref = float(bp[0]) if bp.shape[0] else 0.0
        self.fan_cum = {}
        cum = [np.zeros(width)]
        for i in range(1, len(profile.pieces) - 1):
            lo, hi = profile.piece_bounds(i)
            cum.append(cum[-1] + self._piece_integral(i, np.array([hi]))[0])
        self.cum = np.array(cum)

    def _fan_table(self, i):
        if i not in self.fan_cum:
            fan = self.profile.pieces[i].fan
            n = len(fan.s_nodes) - 1
            if fan.s == 0 or n < 1:
                self.fan_cum[i] = np.zeros((max(n, 1) + 1, self.width))
            else:
                h = fan.s_nodes[1] - fan.s_nodes[0]
                k = np.arange(n)
                cells = _fan_cell_integrals(fan, self.q, np.full(n, h), k)
                self.fan_cum[i] = np.vstack([np.zeros(self.width), np.cumsum(cells, axis=0)])
        return self.fan_cum[i]

    def _piece_integral(self, i, xi):
        """Integral over piece ``i`` from its left end to ``xi``."""
        piece = self.profile.pieces[i]
        lo, _ = self.profile.piece_bounds(i)
        if isinstance(piece, Constant):
            qv = self.q(piece.V[None, :])[0]
            base = self.ref if i == 0 else lo
            return (xi - base)[:, None] * qv[None, :]
        fan = piece.fan
        if fan.s == 0:
            return np.zeros((xi.shape[0], self.width))
        table = self._fan_table(i)
        s = fan.s_of_xi(xi - piece.shift)
        k, h = fan._locate(s)
        t = s - fan.s_nodes[k]
        return table[k] + _fan_cell_integrals(fan, self.q, t, k)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        idx = np.searchsorted(self.profile.breakpoints, xi, side="right")
        out = np.empty((xi.shape[0], self.width))
        for i in np.unique(idx):
            mask = idx == i
            out[mask] = self.cum[max(i - 1, 0)] + self._piece_integral(i, xi[mask]) if i > 0 else self._piece_integral(0, xi[mask])
        return out


# -- pair sampling -----------------------------------------------------------------


def sample_pairs(profile: Profile, n_pairs: int, seed: int = 0) -> np.ndarray:
    """Pairs ``(xi_1, xi_2)``, ``xi_1 < xi_2``: random ones plus pairs straddling breakpoints or inside pieces."""
    rng = np.random.default_rng(seed)
    bp = profile.breakpoints
    if bp.shape[0] == 0:
        lo, hi = -1.0, 1.0
    else:
        span = float(bp[-1] - bp[0])
        pad = 0.1 + 0.1 * span
        lo, hi = float(bp[0]) - pad, float(bp[-1]) + pad
    n_rand = n_pairs // 2 if bp.shape[0] else n_pairs
    pairs = [np.sort(rng.uniform(lo, hi, size=(n_rand, 2)), axis=1)]
    n_rest = n_pairs - n_rand
    if n_rest > 0 and bp.shape[0]:
        k = rng.integers(0, bp.shape[0], size=n_rest)
        scale = 10.0 ** rng.uniform(-6, -1, size=n_rest)
        left = bp[k] - scale * rng.uniform(0.05, 1.0, size=n_rest)
        right = bp[k] + scale * rng.uniform(0.05, 1.0, size=n_rest)
        straddle = np.stack([left, right], axis=1)
        # a quarter of these stay inside one piece: between consecutive breakpoints
        inner = rng.random(n_rest) < 0.25
        if bp.shape[0] > 1:
            j = np.minimum(k, bp.shape[0] - 2)
            a, b = bp[j], bp[j + 1]
            u = np.sort(rng.uniform(0.0, 1.0, size=(n_rest, 2)), axis=1)
            inside = np.stack([a + u[:, 0] * (b - a), a + u[:, 1] * (b - a)], axis=1)
            straddle[inner] = inside[inner]
        pairs.append(straddle)
    out = np.vstack(pairs)
    keep = out[:, 1] > out[:, 0]
    return out[keep]


# -- reports ---------------------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    max_residual: float
    n_pairs: int
    worst_pair: tuple[float, float]
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> dict:
        return {"max_residual": self.max_residual, "n_pairs": self.n_pairs,
                "worst_pair": list(self.worst_pair), "tol": self.tol, "passed": self.passed}


@dataclass(frozen=True)
class EntropyReport:
    """``worst`` is the largest signed violation (positive = violated), ``slack`` the largest dissipation margin."""

    worst: float
    slack: float
    n_pairs: int
    worst_pair: tuple[float, float]
    halfplane: str
    tol: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.tol

    def to_dict(self) -> dict:
        return {"worst_violation": self.worst, "slack": self.slack, "n_pairs": self.n_pairs,
                "worst_pair": list(self.worst_pair), "halfplane": self.halfplane, "tol": self.tol,
                "passed": self.passed}


def weak_residual(sys: SystemDef, profile: Profile, n_pairs: int | None = None, seed: int = 0, pairs=None) -> ResidualReport:
    """Largest residual of the primitive weak form over sampled pairs."""
    n_pairs = sys.tol.n_pairs if n_pairs is None else n_pairs
    pairs = sample_pairs(profile, n_pairs, seed) if pairs is None else np.asarray(pairs, dtype=float)
    P = _Primitive(profile, lambda V: V, sys.dim)
    x1, x2 = pairs[:, 0], pairs[:, 1]
    V1, V2 = evaluate(profile, x1), evaluate(profile, x2)
    g1 = sys.flux(V1) - x1[:, None] * V1
    g2 = sys.flux(V2) - x2[:, None] * V2
    res = np.max(np.abs(P(x2) - P(x1) + g2 - g1), axis=1)
    j = int(np.argmax(res))
    return ResidualReport(float(res[j]), int(pairs.shape[0]), (float(x1[j]), float(x2[j])), sys.tol.weak_tol)


def entropy_residual(sys: SystemDef, profile: Profile, n_pairs: int | None = None, seed: int = 0,
                     halfplane: str | None = None, pairs=None) -> EntropyReport:
    """Signed violation of the entropy inequality; the sign flips with the halfplane."""
    n_pairs = sys.tol.n_pairs if n_pairs is None else n_pairs
    halfplane = profile.halfplane if halfplane is None else halfplane
    pairs = sample_pairs(profile, n_pairs, seed) if pairs is None else np.asarray(pairs, dtype=float)
    P = _Primitive(profile, lambda V: np.asarray(sys.entropy(V))[..., None], 1)
    x1, x2 = pairs[:, 0], pairs[:, 1]
    V1, V2 = evaluate(profile, x1), evaluate(profile, x2)
    h1 = np.asarray(sys.entropy_flux(V1)) - x1 * np.asarray(sys.entropy(V1))
    h2 = np.asarray(sys.entropy_flux(V2)) - x2 * np.asarray(sys.entropy(V2))
    D = (P(x2) - P(x1))[:, 0] + h2 - h1
    signed = halfplane_sign(halfplane) * D
    j = int(np.argmax(signed))
    return EntropyReport(float(signed[j]), float(max(0.0, -np.min(signed))), int(pairs.shape[0]),
                         (float(x1[j]), float(x2[j])), halfplane, sys.tol.entropy_tol)


# -- structure ---------------------------------------------------------------------


@dataclass(frozen=True)
class SectorVerdict:
    family: int
    interval: tuple[float, float]
    kind: Kind
    forward: bool
    n_shocks: int
    n_fans: int
    reasons: tuple[str, ...]
    details: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.reasons

    def to_dict(self) -> dict:
        return {"family": self.family, "interval": list(self.interval), "kind": self.kind.value,
                "orientation": "forward" if self.forward else "backward", "jumps": self.n_shocks,
                "fans": self.n_fans, "passed": self.passed, "reasons": list(self.reasons),
                "details": list(self.details)}


@dataclass(frozen=True)
class StructureVerdict:
    sectors: tuple[SectorVerdict, ...]
    global_reasons: tuple[str, ...]
    details: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.global_reasons and all(s.passed for s in self.sectors)

    @property
    def reasons(self) -> list[str]:
        out = list(self.global_reasons)
        for s in self.sectors:
            out.extend(r for r in s.reasons if r not in out)
        return out

    def to_dict(self) -> dict:
        return {"passed": self.passed, "global_reasons": list(self.global_reasons),
                "details": list(self.details), "sectors": [s.to_dict() for s in self.sectors]}


def _add(reasons: list, r: Reason):
    if r.value not in reasons:
        reasons.append(r.value)


def classify_structure(sys: SystemDef, layout: SectorLayout, profile: Profile) -> StructureVerdict:
    """Per-sector verdict: single-wave and contact rules forward, neighbourhood rules backward."""
    tol = sys.tol
    dL = tol.nbh_slack * layout.delta_L
    bp = profile.breakpoints
    jumps = {j.index: j for j in profile.jumps}
    global_reasons: list[str] = []
    gdetails: list[str] = []

    if not sys.in_ball(np.array(profile.states()), slack=1e-9):
        _add(global_reasons, Reason.LEFT_BALL)
    for j in jumps.values():
        if layout.sector_of(j.xi) is None:
            _add(global_reasons, Reason.NOT_CONSTANT_OUTSIDE)
            gdetails.append(f"jump at xi={j.xi!r} outside every sector")
    for i, piece in profile.fans:
        lo, hi = profile.piece_bounds(i)
        a = layout.sector_of(0.5 * (lo + hi))
        if a is None or not (layout.interval(a)[0] < lo and hi < layout.interval(a)[1]):
            _add(global_reasons, Reason.NOT_CONSTANT_OUTSIDE)
            gdetails.append(f"fan on [{lo!r}, {hi!r}] not inside a sector")

    verdicts = []
    for a in range(sys.dim):
        lo, hi = layout.interval(a)
        forward = layout.is_forward(a, profile.halfplane)
        kind = layout.kinds[a]
        reasons: list[str] = []
        details: list[str] = []
        events = []  # (position, 'jump'|'fan', payload) in xi order
        for k in range(bp.shape[0]):
            if lo < bp[k] < hi and k in jumps:
                events.append(("jump", k))
            if k + 1 < len(profile.pieces) and isinstance(profile.pieces[k + 1], FanPiece) and lo < bp[k] < hi:
                events.append(("fan", k + 1))
        n_jumps = sum(1 for e in events if e[0] == "jump")
        n_fans = sum(1 for e in events if e[0] == "fan")

        for kind_e, k in events:
            if kind_e != "jump":
                continue
            j = jumps[k]
            res = rh_residual(sys, j.V_minus, j.V_plus, j.xi)
            if res > tol.classify_rh_tol:
                _add(reasons, Reason.RH_VIOLATED)
                details.append(f"jump at xi={j.xi!r}: RH residual {res:.3e}")

        if kind is Kind.LD:
            if n_jumps > 1:
                _add(reasons, Reason.MULTIPLE_CONTACTS)
            if n_fans:
                _add(reasons, Reason.FAN_IN_LD_SECTOR)
        elif forward:
            if n_jumps + n_fans > 1:
                _add(reasons, Reason.MULTIPLE_FORWARD_WAVES)
            for kind_e, k in events:
                if kind_e == "jump":
                    j = jumps[k]
                    rep = lax_check(sys, Wave(a, WaveKind.SHOCK, j.V_minus, j.V_plus, 0.0, j.xi), "forward", dL)
                    if not rep.satisfied:
                        _add(reasons, Reason.INADMISSIBLE_SHOCK)
                        details.append(f"shock at xi={j.xi!r}: forward Lax margin {rep.margin:.3e}")
        else:
            fan_open = False
            for kind_e, k in events:
                if kind_e == "fan":
                    if fan_open:
                        _add(reasons, Reason.CONSECUTIVE_SIMPLE_WAVES)
                    fan_open = True
                    continue
                fan_open = False
                j = jumps[k]
                rep = lax_check(sys, Wave(a, WaveKind.SHOCK, j.V_minus, j.V_plus, 0.0, j.xi), "backward", dL)
                if not rep.satisfied:
                    _add(reasons, Reason.INADMISSIBLE_SHOCK)
                    details.append(f"shock at xi={j.xi!r}: backward Lax margin {rep.margin:.3e}")
                need = dL * j.size
                left_const = isinstance(profile.pieces[k], Constant)
                right_const = isinstance(profile.pieces[k + 1], Constant)
                prev_bp = bp[k - 1] if k > 0 else -math.inf
                next_bp = bp[k + 1] if k + 1 < bp.shape[0] else math.inf
                left = (j.xi - max(prev_bp, lo)) if left_const else 0.0
                right = (min(next_bp, hi) - j.xi) if right_const else 0.0
                if min(left, right) < need:
                    _add(reasons, Reason.NEIGHBOURHOOD_TOO_SMALL)
                    details.append(f"shock at xi={j.xi!r}: neighbourhoods ({left:.3e}, {right:.3e}) < {need:.3e}")
        verdicts.append(SectorVerdict(a, (lo, hi), kind, forward, n_jumps, n_fans, tuple(reasons), tuple(details)))
    return StructureVerdict(tuple(verdicts), tuple(global_reasons), tuple(gdetails))


# -- Lipschitz quotients -----------------------------------------------------------


def estimate_constants(sys: SystemDef) -> dict:
    """Constants of the backward-sector estimates.

    ``C_shock = max(1, 1/delta_L)`` bounds the shock-neighbourhood ratio,
    ``C_S = C_shock + 1/(2 delta_L)`` the saltus part.
    """
    c_shock = max(1.0, 1.0 / sys.delta_L)
    return {"C_shock": c_shock, "C_S": c_shock + 0.5 / sys.delta_L, "lam_lipschitz": c_shock + 2.0}


def resonant_families(sys: SystemDef, profile: Profile, xi0: float, tol: float | None = None) -> list[int]:
    tol = sys.tol.resonance_tol if tol is None else tol
    out = []
    for V in (evaluate(profile, xi0), left_limit(profile, xi0)):
        lam = sys.eigen_batch(V)[0].reshape(-1)
        out.extend(a for a in range(sys.dim) if abs(lam[a] - xi0) <= tol and a not in out)
    return sorted(out)


def lipschitz_at_resonance(sys: SystemDef, profile: Profile, xi0: float, radius: float | None = None, n: int = 4001) -> float:
    """``sup |V(xi) - V(xi0)| / |xi - xi0|`` over sampled ``xi`` off the jump set.

    Raises
    ------
    NotResonant
        No family satisfies ``lam^a(V(xi0)) = xi0`` within the resonance tolerance.
    """
    if not resonant_families(sys, profile, xi0):
        raise NotResonant(f"xi0={xi0!r} is not a resonance point of the profile")
    bp = profile.breakpoints
    if radius is None:
        radius = (float(np.max(np.abs(bp - xi0))) if bp.shape[0] else 0.0) + 0.05
    grid = [np.linspace(xi0 - radius, xi0 + radius, n)]
    if bp.shape[0]:
        near = bp[np.abs(bp - xi0) <= radius]
        off = 1e-12 * np.maximum(1.0, np.abs(near))
        grid += [near + off, near - off]
    xi = np.concatenate(grid)
    jumps = np.array([j.xi for j in profile.jumps])
    mask = np.abs(xi - xi0) > 1e-13
    if jumps.shape[0]:
        mask &= np.min(np.abs(xi[:, None] - jumps[None, :]), axis=1) > 0
    xi = xi[mask]
    V0 = evaluate(profile, xi0)
    q = np.linalg.norm(evaluate(profile, xi) - V0, axis=1) / np.abs(xi - xi0)
    return float(np.max(q)) if q.shape[0] else 0.0


# -- combined --------------------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    weak: ResidualReport
    entropy: EntropyReport
    structure: StructureVerdict
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.weak.passed and self.entropy.passed and self.structure.passed

    @property
    def reasons(self) -> list[str]:
        out = []
        if not self.weak.passed:
            out.append("WeakResidual")
        if not self.entropy.passed:
            out.append("EntropyViolation")
        return out + self.structure.reasons

    def to_dict(self) -> dict:
        return {"passed": self.passed, "reasons": self.reasons, "weak_residual": self.weak.to_dict(),
                "entropy_residual": self.entropy.to_dict(), "structure": self.structure.to_dict()}

    def table(self) -> str:
        lines = [
            f"weak residual    {self.weak.max_residual:.3e}  (tol {self.weak.tol:.0e})  {'PASS' if self.weak.passed else 'FAIL'}",
            f"entropy worst    {self.entropy.worst:.3e}  (tol {self.entropy.tol:.0e})  {'PASS' if self.entropy.passed else 'FAIL'}",
        ]
        lines.append(structure_table(self.structure))
        lines.append(f"overall          {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def structure_table(verdict: StructureVerdict) -> str:
    lines = ["family  interval                    kind  orientation  jumps  fans  verdict"]
    for s in verdict.sectors:
        iv = f"({s.interval[0]:+.6f}, {s.interval[1]:+.6f})"
        lines.append(f"{s.family:<7} {iv:<27} {s.kind.value:<5} {'forward' if s.forward else 'backward':<12} "
                     f"{s.n_shocks:<6} {s.n_fans:<5} {'PASS' if s.passed else 'FAIL ' + ','.join(s.reasons)}")
    if verdict.global_reasons:
        lines.append("global: " + ", ".join(verdict.global_reasons))
    return "\n".join(lines)


def verify_profile(sys: SystemDef, profile: Profile, layout: SectorLayout | None = None,
                   n_pairs: int | None = None, seed: int = 0, halfplane: str | None = None) -> VerificationReport:
    """Weak and entropy residuals together with the structural verdict."""
    layout = sector_layout(sys) if layout is None else layout
    if halfplane is not None and halfplane != profile.halfplane:
        profile = Profile(halfplane, profile.breakpoints, profile.pieces, profile.families)
    return VerificationReport(
        weak_residual(sys, profile, n_pairs, seed),
        entropy_residual(sys, profile, n_pairs, seed),
        classify_structure(sys, layout, profile),
    )
