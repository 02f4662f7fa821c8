"""SystemDef construction and field classification."""

import math

import numpy as np
import pytest

from selfsim import euler_system, make_system
from selfsim.errors import EntropyPairMismatch, NotStrictlyHyperbolic
from selfsim.psystem import psystem_raw
from selfsim.system import Kind, averaged_jacobian, describe, hat_eigen, sample_ball


def ball_points(sys, rng, n):
    d = rng.standard_normal((n, sys.dim))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return sys.V_bar + sys.epsilon * rng.uniform(0, 1, n)[:, None] ** (1 / sys.dim) * d


def test_euler_system_basics(euler):
    assert euler.dim == 3
    assert np.allclose(euler.V_bar, [2.0, 4.0 + 1.0 / 1.4, 0.0], atol=1e-14)
    assert [f.kind for f in euler.fields] == [Kind.GNL, Kind.LD, Kind.GNL]
    assert all(f.forward_halfplane == "x>0" for f in euler.fields)
    k = 1 / math.sqrt(3)
    assert [f.center for f in euler.fields] == pytest.approx([-k, 0.0, k], abs=1e-12)


def test_frozen_slack_constants(euler):
    assert euler.delta_s == pytest.approx(0.0967379, abs=1e-6)
    assert euler.delta_L == pytest.approx(0.0265049, abs=1e-6)


def test_roundtrip_U_V(euler, rng):
    V = ball_points(euler, rng, 256)
    assert np.max(np.abs(euler.to_V(euler.to_U(V)) - V)) <= 1e-10


def test_entropy_normalization(euler):
    assert np.max(np.abs(euler.entropy_grad(euler.V_bar))) <= 1e-12
    H = euler.entropy_hessian(euler.V_bar)
    assert np.allclose(H, H.T, atol=1e-10)
    assert np.all(np.linalg.eigvalsh(0.5 * (H + H.T)) > 0)


def test_entropy_flux_compatibility(euler, rng):
    from selfsim.numerics import fd_gradient

    for V in ball_points(euler, rng, 8):
        qV = fd_gradient(lambda v: float(euler.entropy_flux(v)), V)
        assert np.allclose(qV, euler.entropy_grad(V) @ euler.jacobian(V), atol=1e-8)


def test_background_fx_eigenvalues_positive(euler):
    from selfsim.euler import euler_jacobians

    assert np.all(np.linalg.eigvals(euler_jacobians(euler.U_bar)[0]).real > 0)


def test_gnl_orientation_and_ld(euler, rng):
    V = ball_points(euler, rng, 64)
    for f in euler.fields:
        rate = np.asarray(euler.gnl_rate(V, f.family))
        if f.kind is Kind.GNL:
            assert np.all(rate > 0)
        else:
            assert np.max(np.abs(rate)) <= 1e-8


def test_entropy_forms(euler, rng):
    for V in ball_points(euler, rng, 16):
        for a in range(3):
            assert euler.form(V, a) > 0
            for b in range(3):
                if a != b:
                    assert abs(euler.form(V, a, b)) <= 1e-8


def test_subsonic_background_rejected():
    with pytest.raises(NotStrictlyHyperbolic):
        euler_system(mach=0.5, calibrate=False)


def test_psystem_valid(psys):
    assert psys.dim == 2
    assert [f.kind for f in psys.fields] == [Kind.GNL, Kind.GNL]
    c = math.sqrt(1.4)
    assert [f.center for f in psys.fields] == pytest.approx([-c, c], abs=1e-12)


def test_entropy_pair_mismatch_detected():
    raw = psystem_raw()
    bad = raw.__class__(**{**raw.__dict__, "psiy": lambda U: 1.1 * raw.psiy(U)})
    with pytest.raises(EntropyPairMismatch):
        make_system(bad, calibrate=False)


def test_averaged_jacobian_collapse_and_symmetry(euler, rng):
    V = euler.V_bar
    assert np.allclose(averaged_jacobian(euler, V, V), euler.jacobian(V), atol=1e-12)
    Vp, Vm = ball_points(euler, rng, 2)
    assert np.max(np.abs(averaged_jacobian(euler, Vp, Vm) - averaged_jacobian(euler, Vm, Vp))) <= 1e-10


def test_hat_eigenvalue_between_endpoint_speeds(euler):
    for a in range(3):
        r = euler.r(euler.V_bar, a)
        Vm, Vp = euler.V_bar - 0.01 * r, euler.V_bar + 0.01 * r
        lam = hat_eigen(euler, Vp, Vm).values[a]
        lo, hi = sorted([float(euler.lam(Vm, a)), float(euler.lam(Vp, a))])
        assert lo - 1e-8 <= lam <= hi + 1e-8


def test_hat_eigen_close_to_background(euler, rng):
    Vp, Vm = ball_points(euler, rng, 2)
    vals = hat_eigen(euler, Vp, Vm).values
    assert np.all(np.abs(vals - [f.center for f in euler.fields]) <= euler.delta_s)


def test_psystem_hat_pair_separated(psys, rng):
    Vp, Vm = ball_points(psys, rng, 2)
    vals = hat_eigen(psys, Vp, Vm).values
    assert vals[1] - vals[0] > 2.0


def test_delta_s_shrinks_with_eps():
    vals = [euler_system(epsilon=e, calibrate=False).delta_s for e in (0.04, 0.02, 0.01)]
    assert vals[0] > vals[1] > vals[2]


def test_sample_ball_inside():
    P = sample_ball(np.zeros(3), 0.1, 32, seed=1)
    assert np.all(np.linalg.norm(P, axis=1) <= 0.1 + 1e-15)


def test_describe_lists_fields(euler):
    d = describe(euler)
    assert [f["kind"] for f in d["fields"]] == ["GNL", "LD", "GNL"]
