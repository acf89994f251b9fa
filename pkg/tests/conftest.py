import numpy as np
import pytest

import parsmc.resampling
from parsmc.prefix_sum import sequential_cdf
from parsmc.rng import philox_block_lanes


@pytest.fixture(scope="session", autouse=True)
def warm_compiled_kernels():
    # First calls trigger numba compilation; keep that out of timed tests.
    parsmc.resampling._naive_scan(np.array([0.5, 1.0]), np.array([0.3]))
    philox_block_lanes(0, 0, np.arange(4, dtype=np.uint64))


def random_cdf(rng, n, zero_fraction=0.0, dtype=np.float64):
    """A valid normalized CDF from random exponential weights; optionally
    with a fraction of exactly-zero weights (flat runs in the CDF)."""
    w = rng.exponential(size=n).astype(dtype)
    if zero_fraction:
        mask = rng.random(n) < zero_fraction
        if mask.all():
            mask[rng.integers(n)] = False
        w[mask] = 0.0
    return sequential_cdf(w)
