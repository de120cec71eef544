import numpy as np
import pytest

from ermfdr.model_space import DiscreteModelSpace


def make_random_space(rng, n_lo=2, n_hi=200, risk_hi=10.0, uniform_weights=None):
    """Risks uniform on [0, risk_hi]; weights uniform or normalized positive randoms."""
    n = int(rng.integers(n_lo, n_hi + 1))
    risks = rng.uniform(0.0, risk_hi, n)
    if uniform_weights is None:
        uniform_weights = bool(rng.random() < 0.5)
    if uniform_weights:
        weights = np.full(n, 1.0 / n)
    else:
        w = rng.random(n) + 1e-3
        weights = w / w.sum()
    return DiscreteModelSpace.from_risks(risks, weights)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def two_atom():
    return DiscreteModelSpace.from_risks([0.0, 1.0], [0.5, 0.5])
