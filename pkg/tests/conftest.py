import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from monomial_mceliece import SchemeParams, keygen

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def dense_gf2_matvec(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (M.astype(np.int64) @ v.astype(np.int64)) % 2


@pytest.fixture(scope="session")
def small_full_keys():
    return keygen(SchemeParams.full(13, 2), np.random.default_rng(11))


@pytest.fixture(scope="session")
def small_generic_keys():
    return keygen(SchemeParams.generic(31, 3, 5, 3), np.random.default_rng(5))
