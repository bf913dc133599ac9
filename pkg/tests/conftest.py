import pytest

from models.unique_games import generate
from tools.gadget import GadgetParams, build_dvd_gadget, build_fvs_gadget
from tools.reduction import ReductionParams, ug_to_dvd, ug_to_fvs
from utils.config import Settings


@pytest.fixture(scope="session")
def fvs_gadget():
    return build_fvs_gadget(GadgetParams(k=2, R=3, s_len=1))


@pytest.fixture(scope="session")
def dvd_gadget():
    return build_dvd_gadget(GadgetParams(k=3, R=2, s_len=1, L=3))


@pytest.fixture(scope="session")
def small_dvd_gadget():
    return build_dvd_gadget(GadgetParams(k=2, R=2, s_len=1, L=2))


@pytest.fixture(scope="session")
def satisfiable():
    return generate("satisfiable", 2, 2, 2, 2, seed=3)


@pytest.fixture(scope="session")
def reduced_fvs(satisfiable):
    return ug_to_fvs(satisfiable, ReductionParams(k=2, s_len=1, t=1))


@pytest.fixture(scope="session")
def reduced_dvd(satisfiable):
    return ug_to_dvd(satisfiable, ReductionParams(k=2, s_len=1, t=1, L=2))


@pytest.fixture
def settings():
    return Settings(workers=2)
