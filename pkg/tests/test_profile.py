"""Profile representation and sector layout; saltus decomposition and total variation."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from selfsim.errors import SectorsOverlap
from selfsim.euler import euler_system
from selfsim.generator import Compression, Hold, generate_backward, generate_forward, preset
from selfsim.profile import (
    Constant,
    FanPiece,
    Profile,
    constant_profile,
    dumps,
    evaluate,
    left_limit,
    profile_from_dict,
    profile_to_dict,
    profile_violations,
    saltus_decompose,
    sample_csv,
    sector_layout,
    shock_neighbourhoods,
    total_variation,
)
from selfsim.waves import shock_curve, wave_fan

EPS = 0.05


@pytest.fixture(scope="module")
def shock_profile(euler):
    Vp, xi = shock_curve(euler, euler.V_bar, 0, -EPS / 8)
    return Profile("x>0", np.array([xi]), (Constant(euler.V_bar), Constant(Vp)), (0,))


@pytest.fixture(scope="module")
def train(euler, layout):
    return preset(euler, layout, "backward-train", n=20)


def test_constant_profile_evaluates_everywhere(euler):
    p = constant_profile(euler.V_bar)
    xi = np.linspace(-3, 3, 11)
    assert np.array_equal(evaluate(p, xi), np.tile(euler.V_bar, (11, 1)))
    assert np.array_equal(left_limit(p, 0.3), euler.V_bar)


def test_right_continuity_at_jump(shock_profile):
    j = shock_profile.jumps[0]
    assert np.array_equal(evaluate(shock_profile, j.xi), j.V_plus)
    assert np.array_equal(left_limit(shock_profile, j.xi), j.V_minus)


def test_fan_piece_matches_wave_fan(euler):
    fan = wave_fan(euler, euler.V_bar, 2, EPS / 4)
    p = Profile("x>0", np.array([fan.xi_start, fan.xi_end]), (Constant(euler.V_bar), FanPiece(fan), Constant(fan.V_end)), (2, 2))
    xi = np.linspace(fan.xi_start, fan.xi_end, 40)[1:-1]
    assert np.max(np.abs(evaluate(p, xi) - fan(xi))) <= 1e-10
    assert p.jumps == []


def test_profile_rejects_malformed(euler):
    V = euler.V_bar
    with pytest.raises(ValueError):
        Profile("x>0", np.array([0.1, 0.0]), (Constant(V), Constant(V), Constant(V)))
    with pytest.raises(ValueError):
        Profile("x>0", np.array([0.1]), (Constant(V),))
    with pytest.raises(ValueError):
        Profile("y>0", np.array([]), (Constant(V),))


def test_sector_centers_euler(euler, layout):
    c = 1 / np.sqrt(3)
    assert np.allclose(layout.centers, (-c, 0.0, c), atol=1e-10)
    assert layout.margin > 0
    for a, (lo, hi) in enumerate(layout.intervals):
        assert layout.sector_of(0.5 * (lo + hi)) == a
    assert layout.sector_of(0.3) is None


def test_sector_layout_forward_orientation(layout):
    assert all(layout.is_forward(a, "x>0") for a in range(3))
    assert not any(layout.is_forward(a, "x<0") for a in range(3))


def test_sectors_shrink_with_epsilon():
    widths = []
    for eps in (0.04, 0.02, 0.01):
        sys = euler_system(mach=2.0, epsilon=eps, calibrate=False)
        widths.append(sector_layout(sys).deltas)
    w = np.array(widths)
    assert np.all(np.diff(w, axis=0) < 0)
    assert sector_layout(euler_system(mach=2.0, epsilon=0.01, calibrate=False)).margin > 0


def test_sectors_overlap_raises():
    with pytest.raises(SectorsOverlap):
        sector_layout(euler_system(mach=5.0, epsilon=1.0, calibrate=False))


def test_single_jump_saltus(shock_profile):
    dec = saltus_decompose(shock_profile)
    j = shock_profile.jumps[0]
    assert np.allclose(dec.V_S(j.xi + 1e-3), j.V_plus - j.V_minus)
    assert np.array_equal(dec.V_S(j.xi - 1e-3), np.zeros(3))
    assert dec.lipschitz_estimate <= 1e-12
    assert dec.jump_total == pytest.approx(j.size)


def test_pure_fan_saltus(euler):
    p = generate_forward(euler, sector_layout(euler), 2, "simple_wave", EPS / 4)
    dec = saltus_decompose(p)
    xi = np.linspace(0.5, 0.65, 50)
    assert np.array_equal(dec.V_S(xi), np.zeros((50, 3)))
    assert np.array_equal(dec.V_L(xi), evaluate(p, xi))


def test_saltus_reconstruction(train, rng):
    dec = saltus_decompose(train)
    bp = train.breakpoints
    xi = rng.uniform(bp[0] - 0.05, bp[-1] + 0.05, 10_000)
    xi = np.concatenate([xi, bp])
    assert np.max(np.abs(dec.V_S(xi) + dec.V_L(xi) - evaluate(train, xi))) <= 1e-15


def test_saltus_lipschitz_covers_all_pairs(train, rng):
    dec = saltus_decompose(train)
    g = dec.grid
    i, k = rng.integers(0, g.shape[0], (2, 2000))
    keep = i != k
    VL = dec.V_L(g)
    q = np.linalg.norm(VL[i[keep]] - VL[k[keep]], axis=1) / np.abs(g[i[keep]] - g[k[keep]])
    assert np.max(q) <= dec.lipschitz_estimate * (1 + 1e-12)


def test_jump_sum_bound(euler, layout, train):
    lo, hi = layout.interval(2)
    assert saltus_decompose(train).jump_total <= (hi - lo) / (2 * euler.delta_L)


def test_lipschitz_stable_under_refinement(euler, layout):
    from selfsim.generator import backward_compression_fixture

    L = [saltus_decompose(backward_compression_fixture(euler, layout, 2, n, 0.3 * EPS, 0.3 * EPS)).lipschitz_estimate
         for n in (20, 40)]
    assert L[1] == pytest.approx(L[0], rel=0.1)


def test_neighbourhoods_disjoint_and_inside(euler, layout, train):
    lo, hi = layout.interval(2)
    nb = shock_neighbourhoods(euler, layout, train, 2)
    assert len(nb) == 20
    for xi, sm, sp, _ in nb:
        assert lo <= sm < xi < sp <= hi
    for (_, _, sp, _), (_, sm, _, _) in zip(nb, nb[1:]):
        assert sp <= sm + 1e-15


def test_total_variation_constant_and_shock(euler, shock_profile):
    assert total_variation(constant_profile(euler.V_bar)) == 0.0
    assert total_variation(shock_profile) == pytest.approx(shock_profile.jumps[0].size, abs=1e-15)


@pytest.mark.parametrize("a", [0, 2])
def test_total_variation_fan_equals_strength(euler, layout, a):
    p = generate_forward(euler, layout, a, "simple_wave", EPS / 4)
    assert total_variation(p) == pytest.approx(EPS / 4, abs=1e-6)


@given(st.floats(0.52, 0.66))
def test_total_variation_additive(euler, layout, cut):
    p = generate_backward(euler, layout, 2, [EPS / 20] * 4, [Hold(), Compression(EPS / 20), Hold()])
    a, b = -1.0, 1.0
    assert total_variation(p, (a, cut)) + total_variation(p, (cut, b)) == pytest.approx(total_variation(p, (a, b)), abs=1e-9)


def test_json_roundtrip(euler, layout):
    for name in ("forward-fan", "backward-compression"):
        p = preset(euler, layout, name)
        doc = profile_to_dict(p)
        text = dumps(doc)
        q = profile_from_dict(json.loads(text), euler)
        assert dumps(profile_to_dict(q)) == text
        xi = np.linspace(p.breakpoints[0] - 0.01, p.breakpoints[-1] + 0.01, 300)
        assert np.max(np.abs(evaluate(p, xi) - evaluate(q, xi))) <= 1e-14
        assert doc["schema"] == "selfsim/1"


def test_sample_csv(shock_profile):
    text = sample_csv(shock_profile, np.linspace(-1, 0, 5))
    rows = [r for r in text.splitlines() if not r.startswith("#")]
    assert rows[0] == "xi,V_1,V_2,V_3"
    assert len(rows) == 6


def test_generated_profiles_have_no_violations(euler, layout, train):
    assert profile_violations(euler, train) == []
    Vp = train.pieces[-1].V + 1e-3
    bad = Profile(train.halfplane, train.breakpoints, train.pieces[:-1] + (Constant(Vp),), train.families)
    assert profile_violations(euler, bad)
