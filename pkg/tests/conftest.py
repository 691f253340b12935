import numpy as np
import pytest

from equilab.fuchsian import BundleObservable, FuchsianGroup


@pytest.fixture(scope="session")
def bolza():
    return FuchsianGroup.bolza()


@pytest.fixture(scope="session")
def bundle(bolza):
    return BundleObservable(bolza, 0.3 + 1.4j, 1.5, 1.0, 0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
