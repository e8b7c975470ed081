import functools
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dmon_dpr.data_io import SbmSpec, generate_sbm  # noqa: E402
from dmon_dpr.objective import LossConfig  # noqa: E402
from dmon_dpr.trainer import TrainConfig, train  # noqa: E402

DATA = Path(__file__).parent / "data"

# filled by test_acceptance, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def data_dir():
    return DATA


@functools.lru_cache(maxsize=None)
def sbm_dataset(seed: int, mean_sep: float = 2.0):
    return generate_sbm(SbmSpec(seed=seed, mean_sep=mean_sep))


@functools.lru_cache(maxsize=None)
def sbm_run(seed: int, mean_sep: float = 2.0, w_dist: float = 0.0, w_ent: float = 0.0, epsilon: float = 1.0):
    """Default-configuration training on the 4-block SBM, cached across test modules."""
    ds = sbm_dataset(seed, mean_sep)
    cfg = TrainConfig(n_clusters=4, seed=seed,
                      loss=LossConfig(w_dist=w_dist, w_ent=w_ent, epsilon=epsilon))
    return ds, train(ds, cfg)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
