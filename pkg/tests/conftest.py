import numpy as np
import pytest

from spectralsvc import DataSet, KernelParams, generate_blobs, train
from spectralsvc.pipeline import PipelineConfig

# hand-tuned kernel widths for the geometric fixtures (raw, unstandardized scale)
BLOB_Q = 0.1
RING_Q = 0.9


@pytest.fixture(scope="session")
def two_blob_400() -> DataSet:
    """Two well-separated blobs: 200 + 200 points, separation 10 spreads."""
    return generate_blobs(200, [[0.0, 0.0], [10.0, 0.0]], 1.0, seed=7)


@pytest.fixture(scope="session")
def two_blob_model(two_blob_400):
    return train(two_blob_400, KernelParams(q=BLOB_Q, C=1.0), tol=1e-6)


def fixture_config(method: str, **overrides) -> PipelineConfig:
    """Pipeline config tuned for the synthetic geometric fixtures."""
    base = dict(
        method=method,
        q=BLOB_Q,
        C=1.0,
        standardize=False,
        svdd_tol=1e-6,
    )
    base.update(overrides)
    return PipelineConfig(**base)


def random_dataset(rng: np.random.Generator, n: int, d: int) -> DataSet:
    """Fuzz dataset: mixture of a few loose clumps plus uniform noise."""
    k = int(rng.integers(1, 4))
    centers = rng.uniform(-3, 3, size=(k, d))
    idx = rng.integers(0, k, size=n)
    pts = centers[idx] + rng.standard_normal((n, d))
    return DataSet(pts)
