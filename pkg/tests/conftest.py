import math

import pytest

from frontsel.model import LVModel, LVParams, NonlinearityFamily, ScalarModel

SQRT2 = math.sqrt(2.0)


@pytest.fixture
def kpp():
    return NonlinearityFamily("fisher_kpp")


@pytest.fixture
def kpp_model(kpp):
    return ScalarModel(kpp)


@pytest.fixture
def lv_half():
    return LVParams(a=0.5, b=0.5, d=1.0, r=1.0)


@pytest.fixture
def lv_half_model(lv_half):
    return LVModel(lv_half)
