import numpy as np

from behmm.entangled import HiddenModel


def random_stochastic(rng, d, sparsity=0.0):
    P = rng.random((d, d))
    if sparsity:
        P[rng.random((d, d)) < sparsity] = 0.0
        P[np.arange(d), rng.integers(0, d, d)] += 0.1
    return P / P.sum(axis=1, keepdims=True)


def random_model(rng, d, sparsity=0.0):
    pi = rng.random(d)
    return HiddenModel.create(pi / pi.sum(), random_stochastic(rng, d, sparsity), random_stochastic(rng, d, sparsity))


def random_complex(rng, d):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_hermitian(rng, d):
    x = random_complex(rng, d)
    return (x + x.conj().T) / 2


def random_psd(rng, d):
    x = random_complex(rng, d)
    return x @ x.conj().T


def random_unitary(rng, d):
    q, r = np.linalg.qr(random_complex(rng, d))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projection(rng, d, rank=None):
    if rank is None:
        rank = int(rng.integers(0, d + 1))
    v = random_unitary(rng, d)[:, :rank]
    return v @ v.conj().T


def random_word(rng, d, length):
    return [(random_complex(rng, d), random_complex(rng, d)) for _ in range(length)]
