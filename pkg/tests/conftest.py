# tests/conftest.py
import os
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from ssr_core.config_util import default_config, use_config  # noqa: E402
from ssr_core.data_io import FIXTURES_DIR, load_fixture  # noqa: E402

TOL = 1e-10


@pytest.fixture(scope="session")
def tol():
    """Numerical tolerance for equality tests."""
    return float(os.environ.get("TOL", TOL))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def _default_config():
    # setiap test mulai dari konfigurasi bawaan
    use_config(default_config())
    yield
    use_config(default_config())


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def mixed_rho():
    return load_fixture("mixed_rho")


@pytest.fixture
def biased_pair():
    return load_fixture("biased_pair")


@pytest.fixture
def phi_plus():
    return load_fixture("phi_plus")
