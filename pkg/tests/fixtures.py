"""Seeded fixture states shared by several test modules."""
import numpy as np

from bipartite.states import make_cq, make_example3, make_circulant, new_bipartite, ssppt_random


def separable_mixture(dim_a=3, dim_b=3, terms=12, seed=0):
    """Random convex mixture of pure product states (separable by construction)."""
    rng = np.random.default_rng(seed)
    rho = np.zeros((dim_a * dim_b,) * 2, dtype=complex)
    for _ in range(terms):
        a = rng.standard_normal(dim_a) + 1j * rng.standard_normal(dim_a)
        b = rng.standard_normal(dim_b) + 1j * rng.standard_normal(dim_b)
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        rho += rng.random() * np.kron(np.outer(a, a.conj()), np.outer(b, b.conj()))
    return new_bipartite(rho / np.trace(rho).real, dim_a, dim_b)


def nonconvex_pair():
    """Two SSPPT (up to B) states whose equal mixture is not SSPPT; found by seeded search."""
    s1, s2 = ssppt_random(2, 2, seed=0), ssppt_random(2, 2, seed=1)
    return s1, s2, new_bipartite(0.5 * (s1.rho + s2.rho), 2, 2)


def zero_min_not_product():
    """CQ state with distinct weights and distinct conditional states."""
    sig0 = np.array([[0.7, 0.2], [0.2, 0.3]])
    sig1 = np.array([[0.4, -0.1j], [0.1j, 0.6]])
    return make_cq([0.7, 0.3], np.eye(2), [sig0, sig1])


def cq_not_zero_min():
    """`make_example3` state with a + c = b + d and e != f."""
    return make_example3(0.2, 0.1, 1 / 3 - 0.2, 1 / 3 - 0.1, 0.05, 0.02, 0.02)


def ssppt_not_qc():
    """Circulant with |a12| = |b12| and a11 != b11."""
    return make_circulant(0.3, 0.2, 0.25, 0.25, 0.1, 0.1j)
