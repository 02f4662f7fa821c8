"""Residual checks and structural classification; Lipschitz quotients at resonance."""

import numpy as np
import pytest

from selfsim.errors import NotResonant
from selfsim.generator import Mutation, generate_forward, mutate, preset
from selfsim.profile import Constant, FanPiece, Profile, constant_profile
from selfsim.verifier import (
    Reason,
    classify_structure,
    entropy_residual,
    lipschitz_at_resonance,
    estimate_constants,
    sample_pairs,
    verify_profile,
    weak_residual,
)
from selfsim.waves import shock_curve, wave_fan

EPS = 0.05


def _shock(euler, a=0, s=-EPS / 8, halfplane="x>0"):
    Vp, xi = shock_curve(euler, euler.V_bar, a, s)
    return Profile(halfplane, np.array([xi]), (Constant(euler.V_bar), Constant(Vp)), (a,))


def test_constant_profile_residuals(euler):
    p = constant_profile(euler.V_bar)
    assert weak_residual(euler, p).max_residual <= 1e-12
    rep = entropy_residual(euler, p)
    assert abs(rep.worst) <= 1e-12 and rep.passed


def test_exact_shock_residual(euler):
    assert weak_residual(euler, _shock(euler)).max_residual <= 1e-9


def test_fan_residual_is_quadrature_exact(euler, layout):
    p = generate_forward(euler, layout, 2, "simple_wave", EPS / 4)
    assert weak_residual(euler, p, n_pairs=512).max_residual <= 1e-9


def test_speed_perturbation_grows_linearly(euler):
    p = _shock(euler)
    j = p.jumps[0]
    pairs = np.array([[j.xi - 0.05, j.xi + 0.05]])
    res = []
    for d in (1e-4, 1e-3, 1e-2):
        q = Profile("x>0", np.array([j.xi + d]), p.pieces, p.families)
        res.append(weak_residual(euler, q, pairs=pairs).max_residual)
    res = np.array(res)
    assert np.allclose(res[1:] / res[:-1], 10.0, rtol=1e-6)
    # the residual is delta times the largest component of [V]
    assert res[1] == pytest.approx(1e-3 * np.max(np.abs(j.V_plus - j.V_minus)), rel=1e-6)


def test_refinement_stability_on_perturbed_profile(euler):
    p = mutate(euler, _shock(euler), Mutation.SPEED_SHIFT)
    r1 = weak_residual(euler, p, n_pairs=256).max_residual
    r2 = weak_residual(euler, p, n_pairs=512).max_residual
    assert abs(r2 - r1) <= 0.1 * r1


def test_admissible_shock_entropy_slack(euler):
    rep = entropy_residual(euler, _shock(euler))
    assert rep.passed and rep.slack > 1e-9


def test_inadmissible_shock_entropy_violation(euler):
    rep = entropy_residual(euler, _shock(euler, s=EPS / 8))
    assert not rep.passed and rep.worst > 1e-9


def test_halfplane_flip(euler):
    p = _shock(euler)
    assert entropy_residual(euler, p).passed
    assert not entropy_residual(euler, p, halfplane="x<0").passed


def test_sample_pairs_ordered_and_deterministic(euler):
    p = _shock(euler)
    a, b = sample_pairs(p, 256, seed=3), sample_pairs(p, 256, seed=3)
    assert np.array_equal(a, b)
    assert np.all(a[:, 1] > a[:, 0])
    xi = p.breakpoints[0]
    assert np.any((a[:, 0] < xi) & (a[:, 1] > xi))


def test_riemann_output_passes(euler, layout):
    p = preset(euler, layout, "riemann", seed=4)
    assert verify_profile(euler, p, layout).passed


def test_two_forward_shocks_flagged(euler, layout):
    p = _shock(euler)
    V1 = p.pieces[-1].V
    V2, xi2 = shock_curve(euler, V1, 0, -EPS / 16)
    bad = Profile("x>0", np.array([p.breakpoints[0], max(xi2, p.breakpoints[0] + 1e-3)]),
                  (Constant(euler.V_bar), Constant(V1), Constant(V2)), (0, 0))
    assert Reason.MULTIPLE_FORWARD_WAVES.value in classify_structure(euler, layout, bad).reasons


def test_backward_neighbourhood_too_small(euler, layout):
    """A compression fan glued directly onto a backward shock leaves no constant neighbourhood."""
    p = _shock(euler, a=2, s=EPS / 8, halfplane="x<0")
    xi = float(p.breakpoints[0])
    fan = wave_fan(euler, p.pieces[-1].V, 2, EPS / 16)
    piece = FanPiece(fan, xi - fan.xi_start)
    bad = Profile("x<0", np.array([xi, piece.xi_end]), (p.pieces[0], piece, Constant(fan.V_end)), (2, 2))
    verdict = classify_structure(euler, layout, bad)
    assert Reason.NEIGHBOURHOOD_TOO_SMALL.value in verdict.reasons
    assert classify_structure(euler, layout, p).passed


def test_ld_sector_rules(euler, layout):
    p = generate_forward(euler, layout, 1, "contact", EPS / 8)
    assert classify_structure(euler, layout, p).passed
    dup = mutate(euler, p, Mutation.DUPLICATE)
    assert Reason.MULTIPLE_CONTACTS.value in classify_structure(euler, layout, dup).reasons


def test_jump_outside_sectors(euler, layout):
    bad = Profile("x>0", np.array([0.3]), (Constant(euler.V_bar), Constant(euler.V_bar + 1e-3)), (None,))
    assert Reason.NOT_CONSTANT_OUTSIDE.value in classify_structure(euler, layout, bad).global_reasons


def test_lipschitz_at_fan_endpoint(euler, layout):
    p = generate_forward(euler, layout, 2, "simple_wave", EPS / 4)
    q = lipschitz_at_resonance(euler, p, float(p.breakpoints[0]))
    assert np.isfinite(q) and q > 0


def test_lipschitz_at_backward_resonance(euler, layout):
    p = preset(euler, layout, "backward-compression", n=10)
    C = estimate_constants(euler)
    for j in p.jumps:
        sp = float(euler.lam(j.V_plus, 2))
        # the piece after the shock is constant up to its resonance point sigma_plus
        assert lipschitz_at_resonance(euler, p, sp) <= C["C_S"] + 2.0


def test_not_resonant(euler):
    with pytest.raises(NotResonant):
        lipschitz_at_resonance(euler, constant_profile(euler.V_bar), 0.3)


def test_report_serialization(euler, layout):
    rep = verify_profile(euler, _shock(euler), layout)
    d = rep.to_dict()
    assert d["passed"] is True and d["reasons"] == []
    assert "overall          PASS" in rep.table()
