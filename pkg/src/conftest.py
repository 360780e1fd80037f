import numpy as np
import pytest

from correlations import Setting
from dfs_states import make_eta, make_phi0, make_phi1


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def eta():
    return make_eta()


@pytest.fixture(scope="session")
def dfs_pair():
    return make_phi0(), make_phi1()


@pytest.fixture
def hardy_settings():
    """Unrotated (F_A, G_A, F_B, G_B)."""
    return Setting.of("F"), Setting.of("G"), Setting.of("F"), Setting.of("G")
