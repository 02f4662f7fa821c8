"""Piecewise self-similar profiles ``xi -> V(xi)`` and their BV bookkeeping.

A profile with breakpoints ``xi_0 < ... < xi_K`` has ``K + 2`` pieces; piece
``i`` covers ``[xi_{i-1}, xi_i)`` (with ``xi_{-1} = -inf``,
``xi_{K+1} = +inf``), so evaluation is right-continuous. A jump sits at a
breakpoint whenever the adjacent pieces disagree there.

The sup-over-sequences jump functional ``J(V; xi)`` reduces, for piecewise
profiles, to the recorded jump magnitude ``|V(xi+) - V(xi-)|``. Profiles
always hold finitely many jumps; infinite shock sets are represented by
truncations, and the bounds checked on them do not depend on the number of
jumps.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import SectorsOverlap
from .system import Kind, SystemDef
from .waves import Fan, wave_fan

SCHEMA = "selfsim/1"


@dataclass(frozen=True)
class Constant:
    V: np.ndarray

    def value(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.broadcast_to(self.V, xi.shape + self.V.shape).copy()

    def left_value(self, xi_lo):
        return self.V

    def right_value(self, xi_hi):
        return self.V


@dataclass(frozen=True)
class FanPiece:
    """A centered fan; ``shift`` translates it in ``xi`` (only mutations use it)."""

    fan: Fan
    shift: float = 0.0

    @property
    def family(self) -> int:
        return self.fan.family

    @property
    def xi_start(self) -> float:
        return self.fan.xi_start + self.shift

    @property
    def xi_end(self) -> float:
        return self.fan.xi_end + self.shift

    def value(self, xi):
        return self.fan(np.asarray(xi, dtype=float) - self.shift)

    def left_value(self, xi_lo):
        return self.fan.V_start

    def right_value(self, xi_hi):
        return self.fan.V_end


@dataclass(frozen=True)
class Jump:
    xi: float
    V_minus: np.ndarray
    V_plus: np.ndarray
    index: int
    family: int | None = None

    @property
    def size(self) -> float:
        return float(np.linalg.norm(self.V_plus - self.V_minus))


@dataclass(frozen=True)
class Profile:
    halfplane: str
    breakpoints: np.ndarray
    pieces: tuple
    families: tuple = ()

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        object.__setattr__(self, "breakpoints", bp)
        if len(self.pieces) != len(bp) + 1:
            raise ValueError("a profile needs exactly one more piece than breakpoints")
        if len(bp) > 1 and not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.halfplane not in ("x>0", "x<0"):
            raise ValueError("halfplane must be 'x>0' or 'x<0'")
        for i, piece in enumerate(self.pieces):
            if isinstance(piece, FanPiece):
                if i == 0 or i == len(bp):
                    raise ValueError("a fan cannot be unbounded")
                if not (math.isclose(piece.xi_start, bp[i - 1], abs_tol=1e-12) and math.isclose(piece.xi_end, bp[i], abs_tol=1e-12)):
                    raise ValueError(f"fan piece {i} does not span its breakpoints")
        if not self.families:
            object.__setattr__(self, "families", (None,) * len(bp))

    @property
    def dim(self) -> int:
        p = self.pieces[0]
        return p.V.shape[0] if isinstance(p, Constant) else p.fan.V_start.shape[0]

    def piece_bounds(self, i: int) -> tuple[float, float]:
        lo = -math.inf if i == 0 else float(self.breakpoints[i - 1])
        hi = math.inf if i == len(self.breakpoints) else float(self.breakpoints[i])
        return lo, hi

    def limits_at(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """``(V(xi_k -), V(xi_k +))`` at breakpoint ``k``."""
        xi = float(self.breakpoints[k])
        return self.pieces[k].right_value(xi), self.pieces[k + 1].left_value(xi)

    @property
    def jumps(self) -> list[Jump]:
        out = []
        for k in range(len(self.breakpoints)):
            Vm, Vp = self.limits_at(k)
            if np.any(Vm != Vp):
                out.append(Jump(float(self.breakpoints[k]), np.array(Vm), np.array(Vp), k, self.families[k]))
        return out

    @property
    def fans(self) -> list[tuple[int, FanPiece]]:
        return [(i, p) for i, p in enumerate(self.pieces) if isinstance(p, FanPiece)]

    def states(self) -> list[np.ndarray]:
        """All constant states and fan node states (for ball checks)."""
        out = []
        for p in self.pieces:
            if isinstance(p, Constant):
                out.append(p.V)
            else:
                out.extend(p.fan.V_nodes)
        return out

    def evaluate(self, xi):
        return evaluate(self, xi)

    def left_limit(self, xi):
        return left_limit(self, xi)


def constant_profile(V, halfplane: str = "x>0") -> Profile:
    return Profile(halfplane, np.zeros(0), (Constant(np.array(V, dtype=float)),))


def evaluate(profile: Profile, xi):
    """Right-continuous evaluation; accepts a scalar or an array of ``xi``."""
    xi_arr = np.asarray(xi, dtype=float)
    scalar = xi_arr.ndim == 0
    flat = xi_arr.reshape(-1)
    idx = np.searchsorted(profile.breakpoints, flat, side="right")
    out = np.empty((flat.shape[0], profile.dim))
    for i in np.unique(idx):
        mask = idx == i
        out[mask] = profile.pieces[i].value(flat[mask])
    return out[0] if scalar else out.reshape(xi_arr.shape + (profile.dim,))


def left_limit(profile: Profile, xi: float) -> np.ndarray:
    """``V(xi -)``."""
    i = bisect_left(list(profile.breakpoints), float(xi))
    piece = profile.pieces[i]
    if isinstance(piece, Constant):
        return piece.V.copy()
    lo, hi = profile.piece_bounds(i)
    if xi >= hi:
        return piece.right_value(hi).copy()
    return piece.value(xi)


# -- sectors -------------------------------------------------------------------


@dataclass(frozen=True)
class SectorLayout:
    """Sector intervals ``I^a = (c_a - delta_a, c_a + delta_a)``."""

    centers: tuple[float, ...]
    deltas: tuple[float, ...]
    delta_s: float
    delta_L: float
    kinds: tuple[Kind, ...]
    admissible_signs: tuple[int, ...]

    def interval(self, a: int) -> tuple[float, float]:
        return self.centers[a] - self.deltas[a], self.centers[a] + self.deltas[a]

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return [self.interval(a) for a in range(len(self.centers))]

    @property
    def margin(self) -> float:
        """Smallest gap between consecutive sectors."""
        iv = self.intervals
        if len(iv) < 2:
            return math.inf
        return min(iv[a + 1][0] - iv[a][1] for a in range(len(iv) - 1))

    def sector_of(self, xi: float) -> int | None:
        for a, (lo, hi) in enumerate(self.intervals):
            if lo < xi < hi:
                return a
        return None

    def is_forward(self, a: int, halfplane: str) -> bool:
        h = 1 if halfplane == "x>0" else -1
        return self.admissible_signs[a] * h > 0


def sector_layout(sys: SystemDef) -> SectorLayout:
    """``delta_a = safety * (delta_s + sup |lam^a(V) - lam^a(V_bar)|)`` over the sampled ball.

    Raises
    ------
    SectorsOverlap
        Two intervals intersect; ``eps`` must be reduced.
    """
    safety = sys.tol.sector_safety
    centers = tuple(f.center for f in sys.fields)
    deltas = tuple(safety * (sys.delta_s + sys.lam_spread[a]) for a in range(sys.dim))
    layout = SectorLayout(
        centers,
        deltas,
        sys.delta_s,
        sys.delta_L,
        tuple(f.kind for f in sys.fields),
        tuple(f.admissible_sign for f in sys.fields),
    )
    if layout.margin <= 0:
        raise SectorsOverlap(f"sector intervals overlap (margin {layout.margin:.3e}); reduce epsilon")
    return layout


def shock_neighbourhoods(sys: SystemDef, layout: SectorLayout, profile: Profile, a: int) -> list[tuple[float, float, float, float]]:
    """``(xi, sigma_minus, sigma_plus, J)`` for every jump inside sector ``a``.

    ``sigma_+ = min(lam^a(V(xi+)), sup I^a)`` and ``sigma_- = max(lam^a(V(xi-)), inf I^a)``:
    the resonance points bounding the constant neighbourhoods of a
    backward-admissible shock.
    """
    lo, hi = layout.interval(a)
    out = []
    for j in profile.jumps:
        if lo < j.xi < hi:
            lam_m, lam_p = sys.lam(np.stack([j.V_minus, j.V_plus]), a)
            out.append((j.xi, max(float(lam_m), lo), min(float(lam_p), hi), j.size))
    return out


# -- saltus decomposition --------------------------------------------------------


@dataclass(frozen=True)
class SaltusDecomposition:
    """``V = V_S + V_L`` with ``V_S`` the right-continuous jump part."""

    profile: Profile
    jump_xi: np.ndarray
    jump_vectors: np.ndarray
    lipschitz_estimate: float
    jump_total: float
    grid: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    def V_S(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.jump_xi.shape[0] == 0:
            return np.zeros(xi.shape + (self.profile.dim,))
        cum = np.vstack([np.zeros(self.profile.dim), np.cumsum(self.jump_vectors, axis=0)])
        idx = np.searchsorted(self.jump_xi, xi, side="right")
        return cum[idx]

    def V_L(self, xi):
        return evaluate(self.profile, xi) - self.V_S(xi)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": "saltus",
            "jumps": [
                {"xi": float(x), "jump": [float(v) for v in dv]} for x, dv in zip(self.jump_xi, self.jump_vectors)
            ],
            "jump_total": self.jump_total,
            "lipschitz_estimate": self.lipschitz_estimate,
        }


def _sample_grid(profile: Profile, n: int = 4096, pad: float = 0.05) -> np.ndarray:
    bp = profile.breakpoints
    if bp.shape[0] == 0:
        return np.linspace(-1.0, 1.0, n)
    lo, hi = float(bp[0]) - pad, float(bp[-1]) + pad
    pts = [np.linspace(lo, hi, n), bp]
    for i, p in profile.fans:
        a, b = profile.piece_bounds(i)
        pts.append(np.linspace(a, b, 65))
    # points just inside every piece so that short pieces are seen
    if bp.shape[0] > 1:
        mids = 0.5 * (bp[1:] + bp[:-1])
        pts.append(mids)
    grid = np.unique(np.concatenate(pts))
    keep = np.concatenate([[True], np.diff(grid) > 1e-12])
    return grid[keep]


def saltus_decompose(profile: Profile, grid: np.ndarray | None = None) -> SaltusDecomposition:
    """Split ``V`` into ``V_S(xi) = sum_{eta <= xi} [V]_eta`` and the continuous rest.

    The sum runs over ``eta <= xi`` (not ``eta < xi``) so that ``V_S`` is
    right-continuous like ``V`` itself and ``V_L = V - V_S`` has no jumps.
    The Lipschitz estimate is the largest difference quotient of ``V_L``
    between neighbouring grid points; for sampled data this equals the
    largest quotient over all pairs.
    """
    jumps = profile.jumps
    jx = np.array([j.xi for j in jumps])
    jv = np.array([j.V_plus - j.V_minus for j in jumps]).reshape(len(jumps), profile.dim)
    dec = SaltusDecomposition(profile, jx, jv, 0.0, float(sum(j.size for j in jumps)))
    grid = _sample_grid(profile) if grid is None else np.unique(np.asarray(grid, dtype=float))
    VL = dec.V_L(grid)
    if grid.shape[0] > 1:
        q = np.linalg.norm(np.diff(VL, axis=0), axis=1) / np.diff(grid)
        lip = float(np.max(q))
    else:
        lip = 0.0
    return SaltusDecomposition(profile, jx, jv, lip, dec.jump_total, grid)


# -- total variation -----------------------------------------------------------


def _polyline_length(fn, a: float, b: float, n: int = 1024, tol: float = 1e-8, max_doublings: int = 6) -> float:
    if b <= a:
        return 0.0
    prev = None
    for _ in range(max_doublings + 1):
        pts = fn(np.linspace(a, b, n + 1))
        length = float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
        if prev is not None and abs(length - prev) < tol:
            return length
        prev = length
        n *= 2
    return length


def total_variation(profile: Profile, interval: tuple[float, float] | None = None) -> float:
    """Variation of ``V`` on ``[a, b]``: jumps in ``(a, b]`` plus fan arc length."""
    a, b = (-math.inf, math.inf) if interval is None else (float(interval[0]), float(interval[1]))
    tv = 0.0
    for j in profile.jumps:
        if a < j.xi <= b:
            tv += j.size
    for i, piece in profile.fans:
        lo, hi = profile.piece_bounds(i)
        lo, hi = max(lo, a), min(hi, b)
        if hi > lo:
            tv += _polyline_length(piece.value, lo, hi)
    return tv


# -- validation and serialization ---------------------------------------------


def profile_violations(sys: SystemDef, profile: Profile, rh_tol: float | None = None) -> list[str]:
    """Representation invariants: RH at every jump, all states in ``P_eps``."""
    from .waves import rh_residual  # noqa: PLC0415

    rh_tol = sys.tol.rh_tol if rh_tol is None else rh_tol
    problems = []
    for j in profile.jumps:
        res = rh_residual(sys, j.V_minus, j.V_plus, j.xi)
        if res > rh_tol:
            problems.append(f"jump at xi={j.xi!r} misses Rankine-Hugoniot by {res:.2e}")
    states = np.array(profile.states())
    if not sys.in_ball(states, slack=1e-9):
        problems.append("profile leaves P_eps")
    return problems


def _vec(v):
    return [float(x) for x in v]


def profile_to_dict(profile: Profile) -> dict:
    pieces = []
    for p in profile.pieces:
        if isinstance(p, Constant):
            pieces.append({"type": "constant", "V": _vec(p.V)})
        else:
            pieces.append({
                "type": "fan",
                "family": p.fan.family,
                "V_start": _vec(p.fan.V_start),
                "s": float(p.fan.s),
                "shift": float(p.shift),
            })
    jumps = [
        {"xi": j.xi, "V_minus": _vec(j.V_minus), "V_plus": _vec(j.V_plus), "family": j.family}
        for j in profile.jumps
    ]
    return {
        "schema": SCHEMA,
        "kind": "profile",
        "halfplane": profile.halfplane,
        "breakpoints": _vec(profile.breakpoints),
        "families": list(profile.families),
        "pieces": pieces,
        "jumps": jumps,
    }


def profile_from_dict(data: dict, sys: SystemDef) -> Profile:
    """Rebuild a profile; fans are re-integrated from ``(family, V_start, s)``."""
    if data.get("schema") != SCHEMA or data.get("kind") != "profile":
        raise ValueError("not a selfsim/1 profile document")
    pieces = []
    for p in data["pieces"]:
        if p["type"] == "constant":
            pieces.append(Constant(np.array(p["V"], dtype=float)))
        elif p["type"] == "fan":
            fan = wave_fan(sys, np.array(p["V_start"], dtype=float), int(p["family"]), float(p["s"]))
            pieces.append(FanPiece(fan, float(p.get("shift", 0.0))))
        else:
            raise ValueError(f"unknown piece type {p['type']!r}")
    families = tuple(data.get("families") or ())
    return Profile(data["halfplane"], np.array(data["breakpoints"], dtype=float), tuple(pieces), families)


def dumps(doc: dict) -> str:
    """Deterministic JSON: shortest round-trip floats, insertion-ordered keys."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def sample_csv(profile: Profile, xi) -> str:
    """CSV of ``(xi, V_1..V_m)`` for plotting."""
    xi = np.asarray(xi, dtype=float)
    V = evaluate(profile, xi)
    lines = [
        "# self-similar profile V(xi), xi = y/x (dimensionless); V = f^x(U) components; right-continuous at jumps",
        ",".join(["xi"] + [f"V_{i + 1}" for i in range(profile.dim)]),
    ]
    for x, row in zip(xi, V):
        lines.append(",".join([repr(float(x))] + [repr(float(v)) for v in row]))
    return "\n".join(lines) + "\n"


def piece_index(profile: Profile, xi: float) -> int:
    return bisect_right(list(profile.breakpoints), float(xi))
