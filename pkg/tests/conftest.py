import numpy as np
import pytest

from satauth.params import PROFILES, RingParams
from satauth.ring import get_ring


@pytest.fixture(scope="session")
def paper_ring():
    return get_ring(PROFILES["paper"])


@pytest.fixture(scope="session")
def robust_ring():
    return get_ring(PROFILES["robust"])


@pytest.fixture(scope="session")
def small_ring():
    return get_ring(RingParams(n=16, q=120833, beta=2.6, name="small16"))


@pytest.fixture()
def rng():
    return np.random.default_rng(0xC0FFEE)
