import math

import pytest

from frontsel.errors import BracketError, DomainError
from frontsel.model import LVModel, LVParams, NonlinearityFamily, ScalarModel
from frontsel.speed import CauchySetup
from frontsel.threshold import ModelFamily, find_threshold, selection_verdict, sweep


def hr_family():
    return ModelFamily(ScalarModel(NonlinearityFamily("hadeler_rothe", 1.0)), "s")


@pytest.mark.parametrize("s,verdict", [(1.0, "linear"), (3.0, "nonlinear")])
def test_scalar_verdicts(s, verdict):
    v = selection_verdict(ScalarModel(NonlinearityFamily("hadeler_rothe", s)))
    assert v.verdict == verdict


def test_lv_verdict_llw_case():
    v = selection_verdict(LVModel(LVParams(0.5, 0.5, 1.0, 1.0)))
    assert v.verdict == "linear" and v.integral < 0


def test_cauchy_verdict():
    setup = CauchySetup(length=200.0, t_end=60.0)
    v = selection_verdict(ScalarModel(NonlinearityFamily("fisher_kpp")), "cauchy_speed", setup=setup)
    assert v.verdict == "linear" and v.c_hat == pytest.approx(2.0, rel=0.05)


def test_family_validation():
    with pytest.raises(DomainError):
        ModelFamily(ScalarModel(NonlinearityFamily("fisher_kpp")), "b")
    with pytest.raises(DomainError):
        selection_verdict(ScalarModel(NonlinearityFamily("fisher_kpp")), "guess")


def test_hadeler_rothe_threshold():
    res = find_threshold(hr_family(), (1.0, 3.0), tol=1e-2)
    assert res.estimate == pytest.approx(2.0, abs=1e-2)
    assert res.bracket[1] - res.bracket[0] <= 1e-2
    assert res.increasing
    lo_v = [v for v in res.log if v.parameter == res.bracket[0]][0]
    hi_v = [v for v in res.log if v.parameter == res.bracket[1]][0]
    assert lo_v.verdict == "linear" and hi_v.verdict == "nonlinear"


def test_threshold_is_reproducible():
    a = find_threshold(hr_family(), (1.0, 3.0), tol=5e-2).to_dict()
    b = find_threshold(hr_family(), (1.0, 3.0), tol=5e-2).to_dict()
    assert a == b


def test_degenerate_bracket():
    with pytest.raises(BracketError):
        find_threshold(hr_family(), (0.5, 1.5))
    with pytest.raises(BracketError):
        find_threshold(hr_family(), (3.0, 1.0))


def test_lv_threshold_exists_large_d():
    fam = ModelFamily(LVModel(LVParams(0.5, 0.5, 50.0, 1.0)), "b")
    res = find_threshold(fam, (0.05, 2.0), tol=5e-2)
    assert 0.05 < res.estimate < 2.0
    assert res.increasing


def test_empty_sweep():
    table = sweep(hr_family(), [0.0, 1.0])
    assert table.columns == ["s"] and table.column("s") == [0.0, 1.0]


def test_sweep_rows_in_grid_order_and_parallel_equal():
    values = [3.0, 0.5, 8.0]
    serial = sweep(hr_family(), values, ["c_star", "tail_class", "verdict"])
    parallel = sweep(hr_family(), values, ["c_star", "tail_class", "verdict"], workers=2)
    assert serial.rows == parallel.rows
    assert serial.column("s") == values
    assert serial.column("tail_class") == ["pushed", "pulled", "pushed"]


def test_sweep_records_errors_per_point():
    fam = ModelFamily(ScalarModel(NonlinearityFamily("fisher_kpp")), "s")
    table = sweep(fam, [0.0], ["I"])
    assert "ContractError" in table.rows[0]["error"]


def test_lv_d_sweep_excess():
    fam = ModelFamily(LVModel(LVParams(0.5, 0.5, 1.0, 1.0)), "d")
    table = sweep(fam, [1.0, 5.0, 50.0], ["c_star"])
    excess = [c - math.sqrt(2) for c in table.column("c_star")]
    assert all(e2 >= e1 - 1e-9 for e1, e2 in zip(excess, excess[1:]))
    assert excess[-1] > 1e-4
