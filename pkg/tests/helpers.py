"""Random families and small oracles shared by the test modules."""

import numpy as np

from kraus_thermo.linalg import hermitian_inv_sqrt
from kraus_thermo.measure import KrausFamily


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_density(rng, k):
    G = random_complex(rng, k, k)
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_unit(rng, k):
    x = random_complex(rng, k)
    return x / np.linalg.norm(x)


def make_stochastic(ops, weights):
    S = np.einsum("m,mba,mbc->ac", weights, np.conj(ops), ops)
    return ops @ hermitian_inv_sqrt(S)


def random_stochastic_family(rng, k, m=3):
    """Generic operators ``G_i S^{-1/2}``: stochastic and (almost surely) irreducible."""
    w = rng.uniform(0.5, 1.5, m)
    return KrausFamily.from_operators(make_stochastic(random_complex(rng, m, k, k), w), w)


def random_positive_family(rng, k, m=3, scale=1.0):
    """Generic, not normalised operators (irreducible almost surely)."""
    w = rng.uniform(0.5, 1.5, m)
    return KrausFamily.from_operators(scale * random_complex(rng, m, k, k), w)


def random_block_family(rng, k, m=3, stochastic=True):
    """Block-diagonal operators ``diag(A_i, B_i)``: reducible by construction."""
    d = int(rng.integers(1, k))
    ops = np.zeros((m, k, k), dtype=complex)
    ops[:, :d, :d] = random_complex(rng, m, d, d)
    ops[:, d:, d:] = random_complex(rng, m, k - d, k - d)
    w = rng.uniform(0.5, 1.5, m)
    if stochastic:
        ops = make_stochastic(ops, w)
    return KrausFamily.from_operators(ops, w), d


def random_column_stochastic(rng, d):
    P = rng.uniform(0.05, 1.0, (d, d))
    return P / P.sum(axis=0)


def stationary_vector(P):
    """Stationary ``pi`` of a column-stochastic ``P`` by a direct linear solve."""
    d = P.shape[0]
    A = np.vstack([P - np.eye(d), np.ones(d)])
    b = np.zeros(d + 1)
    b[-1] = 1.0
    return np.linalg.lstsq(A, b, rcond=None)[0]


def markov_entropy_rate(P):
    pi = stationary_vector(P)
    return float(-np.sum(pi[None, :] * P * np.log(P)))
