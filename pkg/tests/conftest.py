import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `oracles` importable


def random_instance(seed):
    """One instance of the small-suite distribution: K in [3,8], J in [2,3],
    S_j in {1,2}, rates uniform in [0.5, 8], gamma alternating in {1, 2}."""
    rng = np.random.default_rng(seed)
    K = int(rng.integers(3, 9))
    J = int(rng.integers(2, 4))
    S = rng.integers(1, 3, J).astype(float)
    R = rng.uniform(0.5, 8.0, (K, J))
    gamma = 1.0 if seed % 2 == 0 else 2.0
    return R, S, gamma


@pytest.fixture(scope="session")
def artifacts_dir():
    out = Path(__file__).parent.parent / "artifacts"
    out.mkdir(exist_ok=True)
    return out
