import pytest

from bbm_voting.catalog import efp_allen_cahn, heat
from bbm_voting.datums import InitialDatum
from bbm_voting.poly import Polynomial


@pytest.fixture
def fkpp():
    """u - u^2"""
    return Polynomial.of(0.0, 1.0, -1.0)


@pytest.fixture
def allen_cahn():
    """u(1-u)(2u-1) expanded"""
    return Polynomial.of(0.0, -1.0, 3.0, -2.0)


@pytest.fixture
def efp():
    return efp_allen_cahn()


@pytest.fixture
def heat_model():
    return heat()


@pytest.fixture
def step():
    return InitialDatum.step(0.0)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ('BBM_VOTING_WORKERS', 'BBM_VOTING_POPULATION_CAP', 'BBM_VOTING_LOG_LEVEL'):
        monkeypatch.delenv(name, raising=False)
