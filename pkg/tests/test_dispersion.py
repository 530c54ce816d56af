import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontsel.dispersion import (decay_rates, discrete_double_rate, discrete_linear_speed, glue_beta_star,
                                 hadeler_rothe_speed, large_d_condition, lv_dispersion_report,
                                 lv_roots_minus_infinity, lv_roots_plus_infinity, nonlocal_linear_speed,
                                 nonlocal_minus_infinity_rate, quartic_rho, scalar_linear_speed,
                                 scheme_linear_speed, sufficient_condition_report)
from frontsel.errors import DomainError
from frontsel.model import KernelSpec, LVParams, kernel_moment

# Oracles computed by dense scans independent of the library's root finders.
C0_ORACLE = 0.9052617
LAMBDA0_ORACLE = 1.9150
BETA_ORACLE = 0.8507437


def _c0_dense_scan():
    lam = np.arange(1, 100001) * 1e-4
    g = (np.sinh(lam) / lam) / lam
    k = int(np.argmin(g))
    return float(g[k]), float(lam[k])


def test_dense_scan_oracle_is_consistent():
    c0, lam0 = _c0_dense_scan()
    assert c0 == pytest.approx(C0_ORACLE, abs=1e-7)
    assert lam0 == pytest.approx(LAMBDA0_ORACLE, abs=2e-4)
    assert math.tanh(lam0) == pytest.approx(lam0 / 2, abs=1e-4)


@pytest.mark.parametrize("fp,c", [(1.0, 2.0), (0.5, math.sqrt(2)), (0.25, 1.0)])
def test_scalar_linear_speed(fp, c):
    assert scalar_linear_speed(fp) == pytest.approx(c)


def test_scalar_linear_speed_domain():
    with pytest.raises(DomainError):
        scalar_linear_speed(0.0)


@pytest.mark.parametrize("s,c", [(0, 2.0), (1, 2.0), (2, 2.0), (8, 2.5), (3, math.sqrt(2 / 3) + math.sqrt(1.5))])
def test_hadeler_rothe_speed(s, c):
    assert hadeler_rothe_speed(s) == pytest.approx(c, abs=1e-14)


def test_hadeler_rothe_continuous_at_two():
    assert hadeler_rothe_speed(2.0 + 1e-9) == pytest.approx(2.0, abs=1e-8)
    with pytest.raises(DomainError):
        hadeler_rothe_speed(-0.1)


def test_plus_infinity_examples():
    r = lv_roots_plus_infinity(LVParams(0.5, 0.5), math.sqrt(2))
    assert r.degenerate_double
    assert r.lambda_u_plus == pytest.approx(math.sqrt(0.5)) and r.lambda_u_minus == pytest.approx(math.sqrt(0.5))
    assert r.lambda_v_plus == pytest.approx((math.sqrt(2) + math.sqrt(6)) / 2)
    assert r.lambda_v_minus == pytest.approx((math.sqrt(2) - math.sqrt(6)) / 2)
    r0 = lv_roots_plus_infinity(LVParams(1e-12, 0.5), 2.5)
    assert (r0.lambda_u_plus, r0.lambda_u_minus) == pytest.approx((2.0, 0.5), abs=1e-11)
    with pytest.raises(DomainError, match="subcritical"):
        lv_roots_plus_infinity(LVParams(0.5, 0.5), 1.0)


lv_draws = st.tuples(st.floats(0.01, 0.99), st.floats(0.01, 5.0), st.floats(0.05, 100.0),
                     st.floats(1e-4, 10.0), st.floats(0.0, 5.0))


@given(lv_draws)
@settings(max_examples=1000, deadline=None)
def test_vieta_and_residuals(draw):
    a, b, d, r, extra = draw
    p = LVParams(a, b, d, r)
    c = 2 * math.sqrt(1 - a) + extra
    roots = lv_roots_plus_infinity(p, c)
    lp, lm = roots.lambda_u_plus, roots.lambda_u_minus
    assert abs(lp * lm - (1 - a)) < 1e-10
    assert abs(lp + lm - c) < 1e-10
    for lam in (lp, lm):
        assert abs(lam * lam - c * lam + (1 - a)) < 1e-10 * max(1.0, c * c)
    for lam in (roots.lambda_v_plus, roots.lambda_v_minus):
        assert abs(d * lam * lam - c * lam - r) < 1e-10 * max(1.0, c * c, d, r)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(0.05, 100.0), st.floats(1e-4, 10.0),
       st.floats(0.05, 6.0))
@settings(max_examples=1000, deadline=None)
def test_quartic_residual(a, b, d, r, c):
    p = LVParams(a, b, d, r)
    roots = lv_roots_minus_infinity(p, c)
    u_s, v_s = p.equilibrium
    assert quartic_rho(p, c, 0.0) == pytest.approx(r * u_s * v_s * (1 - a * b), rel=1e-12)
    assert abs(quartic_rho(p, c, roots.nu)) < 1e-10
    assert 0 < roots.nu <= min(roots.mu_u_plus, roots.mu_v_plus)


def test_minus_infinity_regimes():
    strong = lv_roots_minus_infinity(LVParams(0.5, 2.0), 1.5)
    assert strong.regime == "strong_weak"
    assert strong.mu_u_plus == pytest.approx(0.5)
    crit = lv_roots_minus_infinity(LVParams(0.5, 1.0), 1.2)
    assert crit.regime == "critical" and crit.algebraic_order == 1


def test_decay_and_discrete_rates():
    assert decay_rates(2.5, 1.0) == pytest.approx((0.5, 2.0))
    assert decay_rates(2.0, 1.0) == pytest.approx((1.0, 1.0))
    h = 0.02
    c = discrete_linear_speed(1.0, h)
    assert 0 < 2.0 - c < 1e-3
    lam = discrete_double_rate(1.0, h)
    # characteristic relation of the centered operator at the double root
    z = math.exp(-lam * h)
    resid = (z * z - 2 * z + 1) / h**2 + c * (z * z - 1) / (2 * h) + z
    assert abs(resid) < 1e-9


def test_nonlocal_linear_speed_oracle():
    disp = nonlocal_linear_speed(KernelSpec.uniform(1.0, 1e-3), 1.0)
    assert disp.c0_star == pytest.approx(C0_ORACLE, abs=1e-4)
    assert disp.lambda0 == pytest.approx(LAMBDA0_ORACLE, abs=1e-3)
    g = lambda lam: (kernel_moment(disp.kernel, lam) + disp.f_prime_0 - 1) / lam
    assert g(1e-6) > g(disp.lambda0)


def test_nonlocal_branch_roots():
    disp = nonlocal_linear_speed(KernelSpec.uniform(1.0, 1e-3), 1.0)
    c = 1.2 * disp.c0_star
    lm, lp = disp.lambda_minus(c), disp.lambda_plus(c)
    assert lm < disp.lambda0 < lp
    assert abs(disp.h(lm) - c * lm) < 1e-8 and abs(disp.h(lp) - c * lp) < 1e-8
    gaps = [disp.lambda_plus(disp.c0_star * (1 + 10.0**-k)) - disp.lambda_minus(disp.c0_star * (1 + 10.0**-k))
            for k in range(1, 5)]
    assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    with pytest.raises(DomainError):
        disp.lambda_minus(0.5 * disp.c0_star)


def test_nonlocal_minus_infinity_rate():
    k1 = KernelSpec.uniform(1.0, 1e-3)
    lam = nonlocal_minus_infinity_rate(k1, -1.0, 1.0)
    assert abs(kernel_moment(k1, lam) - 2.0 - lam) < 1e-8
    # dense-scan oracle for sinh(lam)/lam - 2 - lam = 0
    grid = np.arange(1, 500001) * 1e-5
    resid = np.sinh(grid) / grid - 2.0 - grid
    oracle = grid[np.argmax(resid > 0)]
    assert lam == pytest.approx(oracle, abs=2e-5)
    lam2 = nonlocal_minus_infinity_rate(KernelSpec.uniform(2.0, 1e-3), -1.0, 1.0)
    assert lam2 < lam


def test_glue_cubic_oracle():
    p = LVParams(0.5, 0.5, 400.0, 1.0)
    lhs, rhs = large_d_condition(p)
    assert lhs == pytest.approx(0.0, abs=1e-15) and rhs == pytest.approx(1 / 27)
    glue = glue_beta_star(p)
    assert glue.condition_holds and glue.v_star == pytest.approx(2 / 3)
    beta = np.arange(int(2 / 3 * 1e6), 1000001) * 1e-6
    G = beta**3 / 12 - beta**2 / 4 + 7 / 54
    oracle = beta[np.argmax(G <= 0)]
    assert oracle == pytest.approx(BETA_ORACLE, abs=1e-6)
    assert glue.beta_star == pytest.approx(oracle, abs=1e-6)
    assert glue(glue.v_star) > 0 > glue(1.0)
    assert glue.predicted_speed == pytest.approx(1.516, abs=1e-3)
    assert glue.predicted_speed > math.sqrt(2)


def test_glue_beta_decreasing_in_b():
    betas = [glue_beta_star(LVParams(0.5, b)).beta_star for b in np.linspace(0.3, 0.6, 7)]
    assert all(b2 < b1 for b1, b2 in zip(betas, betas[1:]))


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
@settings(max_examples=200, deadline=None)
def test_condition_is_sign_of_glue_at_one(a, b):
    glue = glue_beta_star(LVParams(a, b))
    assert glue.condition_holds == (glue(1.0) < 0)
    if glue.condition_holds:
        assert glue.v_star < glue.beta_star < 1.0
    else:
        assert glue.no_threshold_prediction and glue.beta_star is None


def test_glue_domain():
    with pytest.raises(DomainError):
        glue_beta_star(LVParams(0.5, 1.5))


def test_sufficient_conditions():
    rep = sufficient_condition_report(LVParams(0.5, 0.5, 1.0, 1.0))
    assert rep["llw"] == "guaranteed-linear"
    rep50 = sufficient_condition_report(LVParams(0.5, 0.5, 50.0, 1.0))
    assert rep50["llw"] == "unknown" and not rep50["llw_applicable"]
    assert rep == sufficient_condition_report(LVParams(0.5, 0.5, 1.0, 1.0))


@given(st.floats(0.05, 0.95), st.floats(0.05, 5), st.floats(0.05, 1.999), st.floats(1e-3, 10))
@settings(max_examples=300, deadline=None)
def test_llw_and_huang_agree_for_small_d(a, b, d, r):
    rep = sufficient_condition_report(LVParams(a, b, d, r))
    assert rep["llw"] == rep["huang"]


def test_report_is_json_ready():
    import json

    rep = lv_dispersion_report(LVParams(0.5, 0.5))
    text = json.dumps(rep)
    assert rep["plus_infinity"]["degenerate_double"] is True
    assert rep["plus_infinity"]["Lambda"] == pytest.approx(0.70711, abs=1e-5)
    assert "glue" in text


def test_scheme_linear_speed_limits():
    exact = 2.0
    fine = scheme_linear_speed(1.0, 1e-3, 1e-7)
    assert fine == pytest.approx(exact, abs=1e-4)
    coarse = scheme_linear_speed(1.0, 0.1, 0.005)
    assert abs(coarse - exact) < 1e-2
    imex = scheme_linear_speed(0.5, 0.05, 0.01, "imex_diffusion")
    assert imex == pytest.approx(math.sqrt(2), abs=2e-4)
