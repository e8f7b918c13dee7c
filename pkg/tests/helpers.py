"""Shared builders for the test-suite."""

import numpy as np
from hypothesis import strategies as st

from cluster_ent.state_model import BLOCKS, validate


def one_hot(a):
    F = np.zeros(16)
    F[a] = 1.0
    return F


UNIFORM = np.full(16, 1.0 / 16)
PURE = one_hot(0)


def from_quad(P, Q, R, S, second=False):
    """A state whose block parameters on one half equal ``(P, Q, R, S)``.

    The residuals are split evenly over the three non-max entries of their
    block and any leftover mass is spread over the other two blocks, where
    it stays far from violating anything.
    """
    ka, kb = (1, 2) if second else (0, 3)
    F = np.zeros(16)
    F[BLOCKS[ka, 0]] = P
    F[BLOCKS[ka, 1:]] = R / 3
    F[BLOCKS[kb, 0]] = Q
    F[BLOCKS[kb, 1:]] = S / 3
    rest = 1.0 - (P + Q + R + S)
    others = np.concatenate([BLOCKS[k] for k in range(4) if k not in (ka, kb)])
    F[others] = rest / 8
    return validate(F)


@st.composite
def fvectors(draw, concentration=None):
    """Valid probability vectors, including sparse and near-pure ones."""
    seed = draw(st.integers(0, 2**32 - 1))
    alpha = draw(st.sampled_from([1.0, 0.3, 0.1, 0.05])) if concentration is None else concentration
    F = np.random.default_rng(seed).dirichlet(np.full(16, alpha))
    for a in draw(st.lists(st.integers(0, 15), max_size=6)):
        F[a] = 0.0
    if F.sum() == 0:
        F[0] = 1.0
    return validate(F / F.sum())


def random_states(rng, n, concentrations=(1.0, 0.3, 0.1)):
    """``(n, 16)`` batch mixing flat and sparse Dirichlet draws."""
    alphas = np.resize(np.asarray(concentrations), n)
    return np.stack([rng.dirichlet(np.full(16, a)) for a in alphas])
