import numpy as np
import pytest

from priceflow import forward_transform, preset


@pytest.fixture(scope="session")
def tent():
    return preset("tent")


@pytest.fixture(scope="session")
def skew():
    return preset("skew")


@pytest.fixture(scope="session")
def zero_mass_asym():
    return preset("zero-mass-asym")


@pytest.fixture(scope="session")
def all_presets(tent, skew, zero_mass_asym):
    return {"tent": tent, "skew": skew, "zero-mass-asym": zero_mass_asym}


@pytest.fixture(scope="session")
def tent_field(tent):
    return forward_transform(tent)


@pytest.fixture(scope="session")
def skew_field(skew):
    return forward_transform(skew)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
