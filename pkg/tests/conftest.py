import numpy as np
import pytest

from celtlab.corpus import corpus


@pytest.fixture(scope="session")
def mono_corpus():
    return corpus(1.0, stereo=False)


@pytest.fixture(scope="session")
def stereo_corpus():
    return corpus(1.0, stereo=True)


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
