import math

import numpy as np
import pytest

from frontsel.errors import ContractError
from frontsel.model import LVModel, LVParams, NonlinearityFamily
from frontsel.waves.lv_bvp import (BVPGrid, _residual, lv_min_speed, lv_wave_bvp, pushed_integral)
from frontsel.waves.profile import WaveProfile
from frontsel.waves.shooting import scalar_wave_shoot
from frontsel.waves.tails import fit_tail


@pytest.fixture(scope="module")
def pulled_d5():
    return lv_wave_bvp(LVParams(0.5, 1.5, 5.0, 1.0))


def test_converged_profile_contract(pulled_d5):
    prof = pulled_d5
    assert prof.residual < 1e-6
    assert prof.is_monotone(1e-12)
    core = np.abs(prof.xi) < 20
    assert np.all(np.diff(prof.u[core]) < 0) and np.all(np.diff(prof.v[core]) > 0)
    assert np.interp(0.0, prof.xi, prof.u) == pytest.approx(0.5 * prof.model.params.equilibrium[0])


def test_limit_states_have_zero_residual():
    p = LVParams(0.5, 1.5, 5.0, 1.0)
    xi = BVPGrid(-4.0, 4.0, 0.1).xi
    n = xi.size
    for (u, v) in ((1.0, 0.0), (0.0, 1.0)):
        x = np.concatenate((np.full(n, u), np.full(n, v)))
        r = _residual(x, p, 1.2, 0.1, n // 2)
        assert np.abs(r[1:n - 1]).max() == 0.0 and np.abs(r[n + 1:2 * n - 1]).max() == 0.0


def test_grid_at_critical_coupling_uses_widest_left_side():
    # b = 1: the left tail is algebraic, so no exponential rate bounds the window
    g = BVPGrid.for_params(LVParams(0.5, 1.0, 5.0, 1.0), math.sqrt(2.0), 0.02)
    assert g.xi_min == pytest.approx(-400.0)
    assert g.xi_max > 0


def test_weak_coupling_matches_scalar_wave():
    """b -> 0 leaves V = 1 and U solves a rescaled KPP equation."""
    a, c = 0.5, 1.6
    prof = lv_wave_bvp(LVParams(a, 1e-10, 1.0, 1.0), c=c, grid=BVPGrid(-40.0, 60.0, 0.01))
    g = 1.0 - a
    ref = scalar_wave_shoot(NonlinearityFamily("fisher_kpp"), c / math.sqrt(g), h=0.005)
    eta = math.sqrt(g) * prof.xi
    inside = (eta > ref.xi[0]) & (eta < ref.xi[-1])
    w_ref = g * np.interp(eta[inside], ref.xi, ref.u)
    assert np.abs(prof.u[inside] - w_ref).max() < 1e-4
    assert np.abs(prof.v - 1.0).max() < 1e-8


def test_translation_of_window(pulled_d5):
    """Moving the window by whole cells leaves the anchored profile unchanged."""
    p = pulled_d5.model.params
    g = BVPGrid(pulled_d5.xi[0] + 4.0, pulled_d5.xi[-1] + 4.0, pulled_d5.h)
    other = lv_wave_bvp(p, grid=g, initial_guess=pulled_d5)
    core = (pulled_d5.xi > -20) & (pulled_d5.xi < 20)
    u2 = np.interp(pulled_d5.xi[core], other.xi, other.u)
    assert np.abs(pulled_d5.u[core] - u2).max() < 1e-6


def test_pushed_integral_degenerate_and_sign(pulled_d5):
    zero = WaveProfile(pulled_d5.xi, np.zeros_like(pulled_d5.u), pulled_d5.c, pulled_d5.model,
                       v=pulled_d5.v, meta=dict(pulled_d5.meta))
    crit0 = pushed_integral(zero, refine=False)
    assert crit0.integral_value == 0.0
    crit = pushed_integral(pulled_d5)
    assert crit.integral_value < 0 and crit.resolved_nonzero
    assert fit_tail(pulled_d5).tail_class == "pulled"


def test_pushed_integral_sign_translation_invariant(pulled_d5):
    base = pushed_integral(pulled_d5, refine=False)
    shifted = WaveProfile(pulled_d5.xi + 3.0, pulled_d5.u, pulled_d5.c, pulled_d5.model,
                          v=pulled_d5.v, meta=dict(pulled_d5.meta, method="shifted"))
    moved = pushed_integral(shifted, refine=False)
    assert np.sign(moved.integral_value) == np.sign(base.integral_value)
    assert moved.integral_value == pytest.approx(base.integral_value * math.exp(3.0 * base.lambda_u), rel=1e-9)
    assert moved.resolved_nonzero == base.resolved_nonzero


def test_speed_contract():
    with pytest.raises(ContractError):
        lv_wave_bvp(LVParams(0.5, 1.5, 5.0, 1.0), c=1.0)
    prof = lv_wave_bvp(LVParams(0.5, 1.5, 5.0, 1.0), c=1.6)
    with pytest.raises(ContractError):
        pushed_integral(prof)


def test_min_speed_pushed_case():
    params = LVParams(0.5, 6.0, 5.0, 1.0)
    c, prof = lv_min_speed(params)
    assert c > math.sqrt(2) + 1e-3
    assert prof.is_monotone(1e-10)
    assert fit_tail(prof).tail_class == "pushed"


def test_min_speed_pulled_case(pulled_d5):
    c, prof = lv_min_speed(pulled_d5.model.params)
    assert c == pytest.approx(math.sqrt(2), abs=1e-4)
