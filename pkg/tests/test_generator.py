"""Fixture factory: generated profiles and their mutations."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfsim.errors import (
    ConsecutiveSimpleWaves,
    DoesNotFit,
    InadmissibleStrength,
    InapplicableMutation,
    IncompatibleKind,
)
from selfsim.generator import (
    PRESETS,
    Compression,
    Hold,
    Mutation,
    accumulation_point,
    generate_backward,
    generate_forward,
    geometric_strengths,
    mutate,
    preset,
)
from selfsim.profile import constant_profile, saltus_decompose, shock_neighbourhoods, total_variation
from selfsim.verifier import Reason, classify_structure, lax_check, verify_profile
from selfsim.waves import Wave, WaveKind

EPS = 0.05


def test_zero_strength_forward_is_constant(euler, layout):
    p = generate_forward(euler, layout, 0, "shock", 0.0)
    assert p.breakpoints.shape == (0,)


@pytest.mark.parametrize("a,kind,s", [(0, "shock", -EPS / 8), (2, "shock", -EPS / 6), (2, "simple_wave", EPS / 4),
                                      (0, "simple_wave", EPS / 8), (1, "contact", -EPS / 8)])
def test_forward_waves_pass(euler, layout, a, kind, s):
    p = generate_forward(euler, layout, a, kind, s)
    assert verify_profile(euler, p, layout).passed


def test_forward_fan_total_variation(euler, layout):
    p = generate_forward(euler, layout, 2, "simple_wave", EPS / 4)
    assert total_variation(p) == pytest.approx(EPS / 4, abs=1e-6)


def test_forward_errors(euler, layout):
    with pytest.raises(IncompatibleKind):
        generate_forward(euler, layout, 1, "shock", -0.01)
    with pytest.raises(IncompatibleKind):
        generate_forward(euler, layout, 0, "contact", 0.01)
    with pytest.raises(InadmissibleStrength):
        generate_forward(euler, layout, 0, "shock", 0.01)
    with pytest.raises(InadmissibleStrength):
        generate_forward(euler, layout, 0, "simple_wave", -0.01)


def test_single_backward_shock_mirrors_forward(euler, layout):
    b = generate_backward(euler, layout, 2, [EPS / 8])
    j = b.jumps[0]
    assert b.halfplane == "x<0"
    w = Wave(2, WaveKind.SHOCK, j.V_minus, j.V_plus, 0.0, j.xi)
    assert lax_check(euler, w, "backward").satisfied
    assert not lax_check(euler, w, "forward").satisfied
    assert verify_profile(euler, b, layout).passed


def test_backward_train_structure(euler, layout):
    p = generate_backward(euler, layout, 2, [0.5 * EPS / 20] * 20)
    assert classify_structure(euler, layout, p).passed
    nb = shock_neighbourhoods(euler, layout, p, 2)
    lo, hi = layout.interval(2)
    assert sum(sp - sm for _, sm, sp, _ in nb) <= hi - lo
    for xi, sm, sp, J in nb:
        assert min(xi - sm, sp - xi) >= euler.delta_L * J


def test_constant_holds_until_resonance(euler, layout):
    """After each shock but the last, the next wave starts where lam(V_i) = xi."""
    p = generate_backward(euler, layout, 2, [EPS / 40] * 5, [Hold(), Compression(EPS / 40), Hold(), Hold()])
    for j in p.jumps[:-1]:
        assert float(euler.lam(j.V_plus, 2)) <= p.breakpoints[j.index + 1] + 1e-15
    for i, piece in p.fans:
        lo, _ = p.piece_bounds(i)
        assert float(euler.lam(piece.fan.V_start, 2)) == pytest.approx(lo, abs=1e-12)


def test_backward_errors(euler, layout):
    with pytest.raises(IncompatibleKind):
        generate_backward(euler, layout, 1, [0.01])
    with pytest.raises(InadmissibleStrength):
        generate_backward(euler, layout, 2, [-0.01])
    with pytest.raises(ConsecutiveSimpleWaves):
        generate_backward(euler, layout, 2, [0.01, 0.01], [[Compression(0.01), Compression(0.01)]])
    with pytest.raises(DoesNotFit):
        generate_backward(euler, layout, 2, geometric_strengths(60, 0.15 * EPS, 0.5))


def test_geometric_accumulation(euler, layout):
    p = preset(euler, layout, "backward-geometric")
    assert len(p.jumps) == 50
    assert verify_profile(euler, p, layout).passed
    xi, lam = accumulation_point(euler, p, 2)
    assert abs(lam - xi) <= 1e-6
    sizes = np.array([j.size for j in p.jumps])
    ratios = sizes[1:] / sizes[:-1]
    assert np.all(ratios < 0.75)  # summable: dominated by a geometric series
    # Cauchy check on the partial sums of V_S: |S_m - S_k| <= tail bound of the series after k
    dec = saltus_decompose(p)
    partial = np.array([dec.V_S(j.xi) for j in p.jumps])
    tail_bound = sizes * 0.75 / (1 - 0.75)
    for k in (30, 40, 45):
        assert np.max(np.linalg.norm(partial[k:] - partial[k], axis=1)) <= tail_bound[k] + 1e-15
    assert tail_bound[-1] <= 1e-9


@pytest.mark.parametrize("name", PRESETS)
def test_every_preset_passes(euler, layout, name):
    assert verify_profile(euler, preset(euler, layout, name), layout).passed


@pytest.mark.parametrize("name", ["forward-shock", "forward-fan", "riemann", "backward-train"])
def test_psystem_presets_pass(psys, name):
    from selfsim.profile import sector_layout

    lay = sector_layout(psys)
    assert verify_profile(psys, preset(psys, lay, name), lay).passed


def test_contact_preset_needs_ld_family(psys):
    from selfsim.profile import sector_layout

    with pytest.raises(IncompatibleKind):
        preset(psys, sector_layout(psys), "contact")


@pytest.mark.parametrize("mutation,name,reason", [
    (Mutation.SPEED_SHIFT, "forward-shock", "WeakResidual"),
    (Mutation.SIDE_FLIP, "forward-shock", Reason.INADMISSIBLE_SHOCK.value),
    (Mutation.DUPLICATE, "forward-shock", Reason.MULTIPLE_FORWARD_WAVES.value),
    (Mutation.RH_VIOLATION, "backward-train", Reason.RH_VIOLATED.value),
    (Mutation.ADJACENT_FANS, "backward-compression", Reason.CONSECUTIVE_SIMPLE_WAVES.value),
])
def test_mutations_detected(euler, layout, mutation, name, reason):
    p = mutate(euler, preset(euler, layout, name), mutation)
    rep = verify_profile(euler, p, layout)
    assert not rep.passed
    assert reason in rep.reasons


@settings(max_examples=10)
@given(st.integers(0, 19), st.integers(0, 2))
def test_rh_violation_any_component(euler, layout, index, component):
    p = mutate(euler, preset(euler, layout, "backward-train"), Mutation.RH_VIOLATION, index=index, component=component)
    assert Reason.RH_VIOLATED.value in classify_structure(euler, layout, p).reasons


def test_mutation_inapplicable(euler, layout):
    c = constant_profile(euler.V_bar)
    for m in Mutation:
        with pytest.raises(InapplicableMutation):
            mutate(euler, c, m)
    with pytest.raises(InapplicableMutation):
        mutate(euler, preset(euler, layout, "forward-fan"), Mutation.SIDE_FLIP)


def test_mutation_deterministic(euler, layout):
    base = preset(euler, layout, "backward-train")
    a = mutate(euler, base, Mutation.DUPLICATE, index=3)
    b = mutate(euler, base, Mutation.DUPLICATE, index=3)
    assert np.array_equal(a.breakpoints, b.breakpoints)


def test_unknown_preset(euler, layout):
    with pytest.raises(ValueError):
        preset(euler, layout, "nope")
