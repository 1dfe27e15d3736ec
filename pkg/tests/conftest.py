import numpy as np
import pytest


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    a = random_complex(rng, (n, rank))
    return a @ a.conj().T


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_complex(rng, (n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projection(rng, n, r):
    q = random_unitary(rng, n)[:, :r]
    return q @ q.conj().T


def labels(n):
    return tuple("x%d" % i for i in range(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
