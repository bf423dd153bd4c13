"""Shared oracles: exact stationary solve of the ring generator."""

import itertools

import numpy as np
import pytest
from scipy.linalg import null_space


def exact_ring_flux(rates, N):
    """Per-bond stationary flux of ring TASEP by direct generator solve.

    Enumerates all C(L, N) configurations, solves pi Q = 0, and returns
    (flux through bond 0, stationary vector, config index).  Only feasible
    for L <= 10 or so; used as the independent oracle for the simulator.
    """
    L = len(rates)
    configs = [c for c in itertools.product((0, 1), repeat=L) if sum(c) == N]
    idx = {c: k for k, c in enumerate(configs)}
    Q = np.zeros((len(configs), len(configs)))
    for c, k in idx.items():
        for i in range(L):
            j = (i + 1) % L
            if c[i] == 1 and c[j] == 0:
                d = list(c)
                d[i], d[j] = 0, 1
                Q[k, idx[tuple(d)]] += rates[i]
                Q[k, k] -= rates[i]
    ns = null_space(Q.T)
    assert ns.shape[1] == 1, "stationary distribution should be unique"
    pi = ns[:, 0]
    pi = pi / pi.sum()
    flux = sum(pi[k] * rates[0] for c, k in idx.items() if c[0] == 1 and c[1] == 0)
    return float(flux), pi, idx


@pytest.fixture
def ring_oracle():
    return exact_ring_flux
