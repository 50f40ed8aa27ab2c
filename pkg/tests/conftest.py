import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from miselect import fixtures

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def xor_csv(tmp_path_factory):
    from helpers import write_csv

    data = fixtures.xor_noise_dataset()
    return write_csv(tmp_path_factory.mktemp("data") / "xor.csv", data)


@pytest.fixture(scope="session")
def sep_csv(tmp_path_factory):
    from helpers import write_csv

    data = fixtures.separable_dataset()
    return write_csv(tmp_path_factory.mktemp("data") / "sep.csv", data,
                     label_name="class")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
