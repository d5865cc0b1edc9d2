import pytest

from mixruin.kernels import conditional_model
from mixruin.model import Degenerate, Discrete, Exponential, ModelSpec

# (1 - r) exp(-r u) at config A with r = (-1.5 + sqrt(4.25)) / 2, evaluated with mpmath at 30 digits
R_A = 0.280776406404415137455352463994
PSI_A = {0: 0.719223593595584862544647536006, 1: 0.54315562525350524526366883889, 2: 0.410189593155105956697486852763}


@pytest.fixture
def model_a():
    """u=1, c=1, Y ~ Exp(1), Z ~ Exp(1), fixed intensities gamma=1, delta=0.5."""
    return ModelSpec(u=1.0, c=1.0, premium_law=Exponential(1.0), claim_law=Exponential(1.0), mixing=Degenerate(1.0, 0.5))


@pytest.fixture
def cm_a(model_a):
    return conditional_model(model_a, 1.0, 0.5)


@pytest.fixture
def model_discrete():
    mixing = Discrete(((1.0, 0.5, 0.5), (2.0, 0.5, 0.5)))
    return ModelSpec(u=1.0, c=1.0, premium_law=Exponential(1.0), claim_law=Exponential(1.0), mixing=mixing)
