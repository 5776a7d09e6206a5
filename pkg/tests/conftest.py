import numpy as np
import pytest

from mtmlab import oracle as orc


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)


@pytest.fixture
def two_state_spec():
    """The hand-checkable 2-state instance: pi=(2/3,1/3), uniform q, w=1."""
    return orc.FiniteChainSpec(
        pi=np.array([2 / 3, 1 / 3]),
        q=np.full((2, 2), 0.5),
        w=np.ones((2, 2)),
        n=1,
    )


def batch_se(values: np.ndarray, n_batches: int = 50) -> tuple[float, float]:
    """Mean and batch-means standard error of a 1-d sample."""
    values = np.asarray(values, dtype=float)
    blocks = np.array_split(values, n_batches)
    means = np.array([b.mean() for b in blocks if len(b)])
    return float(values.mean()), float(means.std(ddof=1) / np.sqrt(len(means)))
