import numpy as np
import pytest

from frontsel.errors import ContractError
from frontsel.model import KernelSpec, NonlinearityFamily, NonlocalModel
from frontsel.waves.nonlocal_waves import nonlocal_minimal_wave, nonlocal_wave_extract, wave_residual
from frontsel.waves.tails import fit_tail


@pytest.fixture(scope="module")
def kpp_nonlocal():
    model = NonlocalModel(NonlinearityFamily("fisher_kpp"), KernelSpec.uniform(1.0, 0.05))
    return model, nonlocal_minimal_wave(model)


def test_profile_contract(kpp_nonlocal):
    model, prof = kpp_nonlocal
    assert prof.residual < 1e-5
    assert wave_residual(model, prof) == pytest.approx(prof.residual)
    assert prof.is_monotone(1e-12)
    assert abs(prof.u[0] - 1.0) < 1e-4 and abs(prof.u[-1]) < 1e-4
    assert prof.c == pytest.approx(model.linear_speed)


def test_tail_is_pulled(kpp_nonlocal):
    _, prof = kpp_nonlocal
    fit = fit_tail(prof)
    assert fit.tail_class == "pulled"


def test_speed_below_linear_is_raised(kpp_nonlocal):
    model, prof = kpp_nonlocal
    low = nonlocal_wave_extract(model, 0.8 * model.linear_speed, initial=prof.u)
    assert low.c == pytest.approx(model.linear_speed)
    with pytest.raises(ContractError):
        nonlocal_wave_extract(model, -1.0)


def test_faster_wave_decays_slower(kpp_nonlocal):
    model, prof = kpp_nonlocal
    fast = nonlocal_wave_extract(model, 1.1 * model.linear_speed, initial=prof.u)
    assert fast.residual < 1e-5 and fast.is_monotone(1e-12)
    i = np.searchsorted(prof.xi, 20.0)
    assert fast.u[i] > prof.u[i]
