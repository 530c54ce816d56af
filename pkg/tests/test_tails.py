import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontsel.waves.tails import InsufficientResolution, fit_tail_arrays

XI = np.arange(0.0, 400.0, 0.01)


def test_pulled_law():
    fit = fit_tail_arrays(XI, XI * np.exp(-XI), "plus_inf", {"double": 1.0})
    assert fit.tail_class == "pulled" and fit.p_class == 1
    assert fit.lambda_hat == pytest.approx(1.0, rel=1e-3)
    assert fit.p_hat == pytest.approx(1.0, abs=1e-2)


def test_transition_law():
    fit = fit_tail_arrays(XI, np.exp(-XI), "plus_inf", {"double": 1.0})
    assert fit.tail_class == "transition" and fit.p_class == 0


def test_pushed_law():
    fit = fit_tail_arrays(XI, np.exp(-2 * XI), "plus_inf", {"double": 1.0})
    assert fit.tail_class == "pushed"
    assert fit.lambda_hat == pytest.approx(2.0, rel=1e-3)


def test_algebraic_law():
    xi = np.arange(1.0, 2e9, 2e6)
    fit = fit_tail_arrays(xi, 1.0 / xi, "plus_inf", {"algebraic": 0.0})
    assert fit.tail_class == "algebraic"


def test_minus_side_mirrors():
    xi = -XI[::-1]
    fit = fit_tail_arrays(xi, np.exp(0.7 * xi), "minus_inf", {"exponential": 0.7})
    assert fit.tail_class == "exponential"
    assert fit.lambda_hat == pytest.approx(0.7, rel=1e-3)


def test_insufficient_resolution():
    xi = np.arange(0.0, 40.0, 1.0)
    with pytest.raises(InsufficientResolution):
        fit_tail_arrays(xi, np.exp(-xi), "plus_inf", {"double": 1.0})


@given(lam=st.floats(0.3, 3.0), law=st.sampled_from(["pulled", "transition", "pushed"]),
       scale=st.floats(0.1, 10.0))
@settings(max_examples=100, deadline=None)
def test_synthetic_recovery(lam, law, scale):
    xi = np.arange(0.0, 60.0 / lam, 0.005 / lam)
    if law == "pulled":
        g, rates = scale * xi * np.exp(-lam * xi), {"double": lam}
        true_lam = lam
    elif law == "transition":
        g, rates = scale * np.exp(-lam * xi), {"double": lam}
        true_lam = lam
    else:
        g, rates = scale * np.exp(-lam * xi), {"double": lam / 2, "fast": lam, "slow": lam / 8}
        true_lam = lam
    fit = fit_tail_arrays(xi, g, "plus_inf", rates)
    assert abs(fit.lambda_hat - true_lam) / true_lam < 1e-3
    assert fit.tail_class == law
