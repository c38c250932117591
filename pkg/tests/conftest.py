import numpy as np
import pytest

from npi_workbench.model.config import toy_config
from npi_workbench.model.core import NpiModel


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(7)


@pytest.fixture
def toy_model() -> NpiModel:
    return NpiModel.create(toy_config(size=8, key_size=4, seed=3))
