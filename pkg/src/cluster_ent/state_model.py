"""Cluster-diagonal states and their block parameters.

A cluster-diagonal state is a probability vector ``F`` over the 16 cluster
basis states.  Grouping the entries by the outer labels ``(alpha, delta)``
gives four blocks of four entries each; block ``k = 2*alpha + delta`` is
summarised by its maximum ``p[k]`` and the sum of its other three entries
``p[4 + k]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeEntry, NotNormalized, RegionUnreachable

NEG_TOL = 1e-12
SUM_TOL = 1e-8
MAX_DRAWS = 10**6
_BATCH = 8192


def block_indices(k: int) -> np.ndarray:
    """Global indices of block ``k``, ordered by ``(beta, gamma)``."""
    alpha, delta = divmod(k, 2)
    return np.array([8 * alpha + 4 * b + 2 * c + delta for b in (0, 1) for c in (0, 1)])


BLOCKS = np.stack([block_indices(k) for k in range(4)])


def _index_map(flip_alpha: bool, flip_delta: bool) -> np.ndarray:
    perm = np.arange(16)
    if flip_alpha:
        perm = perm ^ 8
    if flip_delta:
        perm = perm ^ 1
    return perm


# (a, b, c, d) -> (a, b, c, not d): swaps blocks 0<->1 and 2<->3, so the
# second-half parameters (p1, p2, p5, p6) become the first-half ones.
HALF_SWAP = _index_map(False, True)
# (a, b, c, d) -> (not a, b, c, not d): swaps blocks 0<->3 and 1<->2, i.e.
# (p0, p4) <-> (p3, p7) and (p1, p5) <-> (p2, p6).
EXCHANGE = _index_map(True, True)


def permute(F, perm: np.ndarray) -> np.ndarray:
    """Relabel a vector by an index involution (``out[a] = F[perm[a]]``)."""
    return np.asarray(F)[..., perm]


def _normalize_exact(x: np.ndarray) -> np.ndarray:
    x = x / math.fsum(x)
    # nudge the largest entry until the correctly rounded sum is exactly 1,
    # which makes validate() idempotent on its own output
    k = int(np.argmax(x))
    for _ in range(4):
        resid = 1.0 - math.fsum(x)
        if resid == 0.0:
            break
        x[k] += resid
    return x


def validate(F) -> np.ndarray:
    """Check and normalise a raw 16-vector of cluster-basis probabilities.

    Entries down to ``-1e-12`` are clamped to zero.  A sum within ``1e-8`` of
    one is accepted and the vector is rescaled so that its exact sum is one.
    The returned array is read-only.
    """
    x = np.array(F, dtype=float).reshape(-1)
    if x.shape != (16,):
        raise ValueError(f"expected 16 entries, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("entries must be finite")
    low = x.min()
    if low < -NEG_TOL:
        raise NegativeEntry(f"entry {low!r} is negative")
    x[x < 0] = 0.0
    total = math.fsum(x)
    if abs(total - 1.0) > SUM_TOL:
        raise NotNormalized(f"entries sum to {total!r}")
    if total != 1.0:
        x = _normalize_exact(x)
    x.flags.writeable = False
    return x


@dataclass(frozen=True)
class BlockParams:
    """Block maxima ``p[0:4]``, block residuals ``p[4:8]`` and argmax bookkeeping.

    ``argmax[k]`` is the ``(beta, gamma)`` position of the maximum of block
    ``k``; ties go to the lexicographically smallest position.
    """

    p: np.ndarray
    argmax: tuple[tuple[int, int], ...]

    def max_index(self, k: int) -> int:
        """Global index of the entry realising the maximum of block ``k``."""
        b, c = self.argmax[k]
        return int(BLOCKS[k, 2 * b + c])

    @property
    def first_half(self) -> tuple[float, float, float, float]:
        p = self.p
        return float(p[0]), float(p[3]), float(p[4]), float(p[7])

    @property
    def second_half(self) -> tuple[float, float, float, float]:
        p = self.p
        return float(p[1]), float(p[2]), float(p[5]), float(p[6])


def block_params(F) -> BlockParams:
    F = np.asarray(F, dtype=float)
    blocks = F[BLOCKS]
    pos = np.argmax(blocks, axis=1)
    pmax = blocks[np.arange(4), pos]
    p = np.concatenate([pmax, blocks.sum(axis=1) - pmax])
    p.flags.writeable = False
    return BlockParams(p, tuple(divmod(int(j), 2) for j in pos))


def block_params_batch(F: np.ndarray) -> np.ndarray:
    """Vectorised :func:`block_params` for an ``(n, 16)`` array; returns ``(n, 8)``."""
    blocks = np.asarray(F, dtype=float)[:, BLOCKS]
    pmax = blocks.max(axis=2)
    return np.concatenate([pmax, blocks.sum(axis=2) - pmax], axis=1)


@dataclass(frozen=True)
class NoiseSpec:
    """Independent phase-flip probabilities, one per qubit."""

    q: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.q) != 4:
            raise ValueError(f"need four flip probabilities, got {len(self.q)}")
        for v in self.q:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"flip probability {v!r} outside [0, 1]")

    @classmethod
    def parse(cls, text: str) -> NoiseSpec:
        """Parse ``"a,b,c,d"`` as given on the command line."""
        return cls(tuple(float(t) for t in text.split(",")))


def dephasing_state(spec: NoiseSpec) -> np.ndarray:
    """Cluster state after independent Z errors on each qubit.

    A Z on qubit ``i`` flips cluster label ``a_i``, so the result is the
    product distribution ``prod_i q_i^{a_i} (1 - q_i)^{1 - a_i}``.
    """
    F = np.ones(1)
    for q in spec.q:
        F = np.outer(F, [1.0 - q, q]).reshape(-1)
    return validate(F)


def sample_random(
    seed: int,
    region: str | None = None,
    half: str | None = None,
    concentration=None,
    max_draws: int = MAX_DRAWS,
) -> np.ndarray:
    """Draw a state from the Dirichlet distribution on the 16-simplex.

    Parameters
    ----------
    seed : int
        Seed for a private ``numpy.random.Generator``; equal seeds give equal
        output.
    region : str, optional
        Rejection-sample until :func:`cluster_ent.classify.classify` reports
        this region.  ``"Biseparable"`` matches any biseparable state; the
        biseparable sub-labels ``"D1''"`` and ``"D2"`` match the recorded
        first-half label.
    half : {"first", "second"}, optional
        Additionally require the half that drove the classification.
    concentration : float or array of 16 floats, optional
        Dirichlet weights; the default is the flat distribution.
    max_draws : int
        Rejection budget.

    Raises
    ------
    RegionUnreachable
        If no draw within the budget lands in the requested region.
    """
    rng = np.random.default_rng(seed)
    alpha = np.ones(16) if concentration is None else np.broadcast_to(np.asarray(concentration, float), (16,))
    if region is None and half is None:
        return validate(rng.dirichlet(alpha))

    from .classify import HALVES, REGION_CODES, classify_batch

    if region is not None and region not in REGION_CODES:
        raise ValueError(f"unknown region {region!r}")
    if half is not None and half not in HALVES[:2]:
        raise ValueError(f"half must be 'first' or 'second', got {half!r}")
    drawn = 0
    while drawn < max_draws:
        n = min(_BATCH, max_draws - drawn)
        batch = rng.dirichlet(alpha, size=n)
        drawn += n
        codes, halves, details = classify_batch(batch)
        ok = np.ones(n, dtype=bool)
        if region is not None:
            if region == "Biseparable":
                ok &= codes == REGION_CODES["Biseparable"]
            elif region in ("D1''", "D2"):
                ok &= (codes == REGION_CODES["Biseparable"]) & (details == REGION_CODES[region])
            else:
                ok &= codes == REGION_CODES[region]
        if half is not None:
            ok &= halves == HALVES.index(half)
        hits = np.flatnonzero(ok)
        if hits.size:
            return validate(batch[hits[0]])
    raise RegionUnreachable(f"no state in region {region!r} (half={half!r}) after {max_draws} draws")
