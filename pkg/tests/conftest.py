from __future__ import annotations

import numpy as np
import pytest

from locacc.densmat import validate_density_matrix
from locacc.ensembles import random_density
from locacc.haar import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


def random_state(d, rng, dims=None, rank=None):
    return validate_density_matrix(random_density(d, rng, rank), dims or (d,))


def spectrum_of(rho):
    return np.sort(np.linalg.eigvalsh(rho.matrix))[::-1]
