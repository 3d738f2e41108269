"""Pytest configuration and fixtures"""
import logging
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from bregqn.core.potential import make_potential
from bregqn.core.spd import SpdCholesky, cholesky


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests"""
    tmp = tempfile.mkdtemp()
    yield Path(tmp)
    shutil.rmtree(tmp, ignore_errors=True)


@pytest.fixture(autouse=True)
def propagate_package_logs():
    """Let caplog see records from the package logger"""
    logger = logging.getLogger('bregqn')
    previous = logger.propagate
    logger.propagate = True
    yield
    logger.propagate = previous


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_spd(rng, n, cond=10.0):
    """SPD matrix with eigenvalues spread over [1, cond]"""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigvals = np.exp(rng.uniform(0.0, np.log(cond), n))
    A = (Q * eigvals) @ Q.T
    return cholesky(0.5 * (A + A.T))


def random_pair(rng, n, cond=10.0):
    """(s, y) with y = A s for a well-conditioned SPD A, so s'y > 0"""
    A = random_spd(rng, n, cond).matrix()
    s = rng.standard_normal(n)
    return s, A @ s


@pytest.fixture
def spd_factory(rng):
    return lambda n, cond=10.0: random_spd(rng, n, cond)


@pytest.fixture
def pair_factory(rng):
    return lambda n, cond=10.0: random_pair(rng, n, cond)


@pytest.fixture
def neglog():
    return make_potential('neglog')


@pytest.fixture
def power_minus_one():
    return make_potential('power', {'gamma': -1.0})


@pytest.fixture
def bounded_one_two():
    return make_potential('bounded', {'a': 1.0, 'b': 2.0})


@pytest.fixture
def identity2():
    return SpdCholesky.identity(2)


BATCH_DIMS = (5, 10, 50)


def independent_instance(rng, n):
    """B = G G^T + 0.1 I with s, y drawn independently and y flipped when s'y <= 0"""
    G = rng.standard_normal((n, n))
    B = cholesky(G @ G.T + 0.1 * np.eye(n), check_symmetry=False)
    s = rng.standard_normal(n)
    y = rng.standard_normal(n)
    if s @ y <= 0:
        y = -y
    return B, s, y


def smooth_instance(rng, n, cond=100.0):
    """Random B with y = A s, both SPD with condition numbers up to cond"""
    B = random_spd(rng, n, cond)
    s = rng.standard_normal(n)
    return B, s, random_spd(rng, n, cond).matvec(s)


@pytest.fixture(scope='session')
def independent_batch():
    """500 seeded independent draws cycling n over 5, 10 and 50"""
    rng = np.random.default_rng(500)
    return [independent_instance(rng, BATCH_DIMS[i % 3]) for i in range(500)]


@pytest.fixture(scope='session')
def smooth_batch():
    """100 seeded draws with y = A s cycling n over 5, 10 and 50"""
    rng = np.random.default_rng(100)
    return [smooth_instance(rng, BATCH_DIMS[i % 3]) for i in range(100)]
