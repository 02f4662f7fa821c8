"""Fixture profiles (forward single waves and backward shock trains) and their mutations.

Backward trains follow the resonance geometry of backward-admissible
shocks: after a shock at ``xi_i`` the constant state ``V_i`` holds until
``xi`` reaches ``lam^a(V_i)``. There either the next shock starts (its speed
``hat lam`` lies beyond ``lam^a(V_i)`` by about half its strength times the
nonlinearity rate) or a compression fan of the same family does, which then
ends at its own resonance point. Constant neighbourhoods on both sides of
every shock therefore have length about ``rate * s / 2``, above the uniform
Lax margin ``delta_L s`` because ``delta_L`` is an eighth of the smallest
rate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    ConsecutiveSimpleWaves,
    DoesNotFit,
    InadmissibleStrength,
    InapplicableMutation,
    IncompatibleKind,
    LeftBall,
    OutOfBall,
)
from .profile import Constant, FanPiece, Profile, SectorLayout, constant_profile
from .system import Kind, SystemDef
from .waves import WaveKind, contact_wave, shock_curve, simple_wave_curve, wave_fan


@dataclass(frozen=True)
class Hold:
    """Constant separator: nothing between two shocks but their resonance gap."""


@dataclass(frozen=True)
class Compression:
    """Fan separator of strength ``t > 0``."""

    t: float


Separator = Union[Hold, Compression, Sequence[Union[Hold, Compression]]]


def _backward_halfplane(sys: SystemDef, a: int) -> str:
    return "x<0" if sys.fields[a].forward_halfplane == "x>0" else "x>0"


def _wrap_ball(fn, *args):
    try:
        return fn(*args)
    except LeftBall as exc:
        raise OutOfBall(str(exc)) from exc


def generate_forward(sys: SystemDef, layout: SectorLayout, family: int, kind: str | WaveKind, s: float, V_minus=None) -> Profile:
    """A single forward wave, centred on ``V_bar`` unless ``V_minus`` is given.

    Raises
    ------
    IncompatibleKind
        Shock or fan on an LD family, or contact on a GNL family.
    InadmissibleStrength
        Shock with ``s > 0`` or fan with ``s < 0``.
    OutOfBall
        The wave leaves ``P_eps``.
    """
    kind = WaveKind(kind) if not isinstance(kind, WaveKind) else kind
    a = family
    field = sys.fields[a]
    halfplane = field.forward_halfplane
    if kind in (WaveKind.SHOCK, WaveKind.SIMPLE) and field.kind is not Kind.GNL:
        raise IncompatibleKind(f"family {a} is linearly degenerate; only contacts are possible")
    if kind is WaveKind.CONTACT and field.kind is not Kind.LD:
        raise IncompatibleKind(f"family {a} is genuinely nonlinear; contacts need an LD family")
    if kind is WaveKind.SHOCK and s > 0:
        raise InadmissibleStrength("forward shocks need s <= 0")
    if kind is WaveKind.SIMPLE and s < 0:
        raise InadmissibleStrength("fans need s >= 0")
    if V_minus is None:
        V_minus = _wrap_ball(simple_wave_curve, sys, sys.V_bar, a, -0.5 * s)
    V_minus = np.array(V_minus, dtype=float)
    if s == 0:
        return constant_profile(V_minus, halfplane)
    if kind is WaveKind.SHOCK:
        Vp, xi = _wrap_ball(shock_curve, sys, V_minus, a, s)
        return Profile(halfplane, np.array([xi]), (Constant(V_minus), Constant(Vp)), (a,))
    if kind is WaveKind.CONTACT:
        w = _wrap_ball(contact_wave, sys, V_minus, a, s)
        return Profile(halfplane, np.array([w.speed]), (Constant(V_minus), Constant(w.V_plus)), (a,))
    fan = _wrap_ball(wave_fan, sys, V_minus, a, s)
    return Profile(halfplane, np.array([fan.xi_start, fan.xi_end]),
                   (Constant(V_minus), FanPiece(fan), Constant(fan.V_end.copy())), (a, a))


def _separator_items(sep) -> list:
    if sep is None:
        return []
    if isinstance(sep, (Hold, Compression)):
        return [sep]
    return list(sep)


def generate_backward(sys: SystemDef, layout: SectorLayout, family: int, strengths: Sequence[float],
                      separators: Sequence[Separator] | None = None, V_start=None) -> Profile:
    """Train of backward-admissible shocks of family ``family``.

    ``separators[i]`` sits between shocks ``i`` and ``i + 1``. The start
    state defaults to ``R^a(V_bar, -T/2)`` with ``T`` the total strength, so
    the train is centred on ``V_bar``.

    Raises
    ------
    IncompatibleKind
        The family is linearly degenerate.
    InadmissibleStrength
        A shock strength or compression strength is not positive.
    ConsecutiveSimpleWaves
        A separator holds two compression fans.
    DoesNotFit
        The train leaves the sector or breakpoints fall below float resolution.
    OutOfBall
        A state leaves ``P_eps``.
    """
    a = family
    if sys.fields[a].kind is not Kind.GNL:
        raise IncompatibleKind(f"family {a} is linearly degenerate; backward shock trains need a GNL family")
    strengths = [float(x) for x in strengths]
    if any(x <= 0 for x in strengths):
        raise InadmissibleStrength("backward shocks need s > 0")
    n = len(strengths)
    seps = [Hold()] * max(n - 1, 0) if separators is None else list(separators)
    if len(seps) != max(n - 1, 0):
        raise ValueError("need one separator between each pair of consecutive shocks")
    items = [_separator_items(x) for x in seps]
    for group in items:
        fans = [x for x in group if isinstance(x, Compression)]
        if len(fans) > 1:
            raise ConsecutiveSimpleWaves("two compression fans without a shock in between")
        if any(x.t <= 0 for x in fans):
            raise InadmissibleStrength("compression fans need t > 0")
    total = sum(strengths) + sum(x.t for g in items for x in g if isinstance(x, Compression))
    halfplane = _backward_halfplane(sys, a)
    V = _wrap_ball(simple_wave_curve, sys, sys.V_bar, a, -0.5 * total) if V_start is None else np.array(V_start, dtype=float)
    lo, hi = layout.interval(a)

    breakpoints: list[float] = []
    families: list[int] = []
    pieces: list = [Constant(V)]

    def push(xi):
        if not lo < xi < hi:
            raise DoesNotFit(f"wave at xi={xi!r} falls outside the sector ({lo!r}, {hi!r})")
        if breakpoints and not xi > breakpoints[-1]:
            raise DoesNotFit("consecutive breakpoints coincide at float resolution")
        breakpoints.append(float(xi))
        families.append(a)

    for i, s in enumerate(strengths):
        Vp, xi = _wrap_ball(shock_curve, sys, V, a, s)
        push(xi)
        pieces.append(Constant(Vp))
        V = Vp
        if i < n - 1:
            for item in items[i]:
                if isinstance(item, Compression):
                    fan = _wrap_ball(wave_fan, sys, V, a, item.t)
                    push(fan.xi_start)
                    push(fan.xi_end)
                    pieces += [FanPiece(fan), Constant(fan.V_end.copy())]
                    V = fan.V_end.copy()
    return Profile(halfplane, np.array(breakpoints), tuple(pieces), tuple(families))


def accumulation_point(sys: SystemDef, profile: Profile, family: int) -> tuple[float, float]:
    """``(xi_last, lam(V(xi_last)))``: the end of a train, where shocks accumulate."""
    xi = float(profile.breakpoints[-1])
    return xi, float(sys.lam(profile.pieces[-1].V, family))


# -- mutations ---------------------------------------------------------------------


class Mutation(str, enum.Enum):
    SPEED_SHIFT = "speed_shift"
    SIDE_FLIP = "side_flip"
    DUPLICATE = "duplicate"
    RH_VIOLATION = "rh_violation"
    ADJACENT_FANS = "adjacent_fans"


def _family_at(sys: SystemDef, xi: float) -> int:
    return int(np.argmin([abs(xi - f.center) for f in sys.fields]))


def _truncate(profile: Profile, k: int, new_bps: list[float], new_pieces: list, family) -> Profile:
    """Keep breakpoints ``< k`` and pieces ``<= k``; append the new tail."""
    bps = list(profile.breakpoints[:k]) + new_bps
    fams = list(profile.families[:k]) + [family] * len(new_bps)
    pieces = list(profile.pieces[: k + 1]) + new_pieces
    return Profile(profile.halfplane, np.array(bps), tuple(pieces), tuple(fams))


def mutate(sys: SystemDef, profile: Profile, mutation: str | Mutation, index: int = -1,
           delta: float | None = None, component: int = 0) -> Profile:
    """Deterministic corruption of one wave.

    Everything right of the mutated wave is replaced by its constant end
    state so that the corruption stays local. ``index`` selects the jump (or
    the fan for ``adjacent_fans``) in ``xi`` order.

    - ``speed_shift``: move a jump by ``delta`` (default ``1e-3``).
    - ``side_flip``: replace a shock of strength ``s`` by the one of strength ``-s``.
    - ``duplicate``: insert a translated copy of a jump midway to the next breakpoint.
    - ``rh_violation``: add ``delta`` (default ``1e-4``) to ``V^+[component]``.
    - ``adjacent_fans``: follow a fan by a second one after a constant gap.

    Raises
    ------
    InapplicableMutation
        The profile has no suitable wave.
    """
    mutation = Mutation(mutation)
    jumps = profile.jumps
    bp = profile.breakpoints
    if mutation is Mutation.ADJACENT_FANS:
        fans = profile.fans
        if not fans:
            raise InapplicableMutation("no fan to duplicate")
        try:
            i, piece = fans[index]
        except IndexError as exc:
            raise InapplicableMutation("fan index out of range") from exc
        if not isinstance(profile.pieces[i + 1], Constant):
            raise InapplicableMutation("fan is not followed by a constant state")
        xi_end = float(bp[i])
        gap = (float(bp[i + 1]) - xi_end) if i + 1 < bp.shape[0] else 2e-3
        fan2 = _wrap_ball(wave_fan, sys, piece.fan.V_end, piece.family, 0.5 * piece.fan.s)
        shift = xi_end + 0.5 * gap - fan2.xi_start
        second = FanPiece(fan2, shift)
        return _truncate(profile, i + 1, [second.xi_start, second.xi_end],
                         [second, Constant(fan2.V_end.copy())], piece.family)
    if not jumps:
        raise InapplicableMutation(f"{mutation.value} needs a jump")
    try:
        j = jumps[index]
    except IndexError as exc:
        raise InapplicableMutation("jump index out of range") from exc
    k = j.index
    if not isinstance(profile.pieces[k], Constant) or not isinstance(profile.pieces[k + 1], Constant):
        raise InapplicableMutation("the selected jump is not between constant states")
    prev_bp = float(bp[k - 1]) if k > 0 else -math.inf
    next_bp = float(bp[k + 1]) if k + 1 < bp.shape[0] else math.inf

    if mutation is Mutation.SPEED_SHIFT:
        d = 1e-3 if delta is None else float(delta)
        new_xi = j.xi + d
        if not prev_bp < new_xi < next_bp:
            raise InapplicableMutation("shift would cross a neighbouring breakpoint")
        bps = bp.copy()
        bps[k] = new_xi
        return Profile(profile.halfplane, bps, profile.pieces, profile.families)
    if mutation is Mutation.RH_VIOLATION:
        d = 1e-4 if delta is None else float(delta)
        Vp = j.V_plus.copy()
        Vp[component] += d
        return _truncate(profile, k, [j.xi], [Constant(Vp)], j.family)
    if mutation is Mutation.DUPLICATE:
        gap = (next_bp - j.xi) if math.isfinite(next_bp) else 2e-3
        return _truncate(profile, k + 1, [j.xi + 0.5 * gap], [Constant(j.V_plus + (j.V_plus - j.V_minus))], j.family)
    # side flip
    a = _family_at(sys, j.xi) if j.family is None else j.family
    if sys.fields[a].kind is not Kind.GNL:
        raise InapplicableMutation("side flip needs a shock of a genuinely nonlinear family")
    r = sys.r(j.V_minus, a)
    s = math.copysign(j.size, float(np.dot(j.V_plus - j.V_minus, r)))
    Vp, xi = _wrap_ball(shock_curve, sys, j.V_minus, a, -s)
    if not xi > prev_bp:
        raise InapplicableMutation("flipped shock would overtake the previous breakpoint")
    return _truncate(profile, k, [xi], [Constant(Vp)], a)


# -- presets -------------------------------------------------------------------------


PRESETS = (
    "forward-shock",
    "forward-fan",
    "contact",
    "riemann",
    "backward-train",
    "backward-compression",
    "backward-geometric",
)


def geometric_strengths(n: int, first: float, ratio: float = 2.0 ** -0.5) -> list[float]:
    return [first * ratio**i for i in range(n)]


def backward_compression_fixture(sys: SystemDef, layout: SectorLayout, family: int, n: int,
                                 shock_total: float, fan_total: float) -> Profile:
    """``n`` equal shocks with equal compression fans between them."""
    s = [shock_total / n] * n
    t = fan_total / max(n - 1, 1)
    return generate_backward(sys, layout, family, s, [Compression(t)] * (n - 1))


def preset(sys: SystemDef, layout: SectorLayout, name: str, n: int | None = None, seed: int = 0) -> Profile:
    """Named fixtures on a system with three or two fields (Euler or p-system)."""
    eps = sys.epsilon
    gnl = [f.family for f in sys.fields if f.kind is Kind.GNL]
    ld = [f.family for f in sys.fields if f.kind is Kind.LD]
    first, last = gnl[0], gnl[-1]
    if name == "forward-shock":
        return generate_forward(sys, layout, first, WaveKind.SHOCK, -eps / 8)
    if name == "forward-fan":
        return generate_forward(sys, layout, last, WaveKind.SIMPLE, eps / 4)
    if name == "contact":
        if not ld:
            raise IncompatibleKind("the system has no linearly degenerate family")
        return generate_forward(sys, layout, ld[0], WaveKind.CONTACT, eps / 8)
    if name == "riemann":
        from .riemann import _compose, solve_riemann  # noqa: PLC0415

        rng = np.random.default_rng(seed)
        s = rng.uniform(-eps / 8, eps / 8, size=sys.dim)
        V_R = _compose(sys, sys.V_bar, s)[0][-1]
        return solve_riemann(sys, sys.V_bar, V_R)
    if name == "backward-train":
        n = 20 if n is None else n
        return generate_backward(sys, layout, last, [0.5 * eps / n] * n)
    if name == "backward-compression":
        n = 20 if n is None else n
        return backward_compression_fixture(sys, layout, last, n, 0.3 * eps, 0.3 * eps)
    if name == "backward-geometric":
        n = 50 if n is None else n
        return generate_backward(sys, layout, last, geometric_strengths(n, 0.15 * eps))
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
