import pytest

from factorsim.ensemble import build_ensemble
from factorsim.primes import PiOracle
from factorsim.spectrum import build_context

_ENSEMBLES = {}


@pytest.fixture(scope="session")
def oracle():
    # covers every y-window up to j=3155 without falling back to lucy_pi
    return PiOracle.for_limit(1 << 24)


@pytest.fixture(scope="session")
def ensemble_of(oracle):
    def get(j):
        if j not in _ENSEMBLES:
            _ENSEMBLES[j] = build_ensemble(j, oracle)
        return _ENSEMBLES[j]

    return get


@pytest.fixture(scope="session")
def context_of(oracle, ensemble_of):
    def get(j):
        e = ensemble_of(j)
        return build_context(e.p_j * e.p_j, e, oracle)

    return get
