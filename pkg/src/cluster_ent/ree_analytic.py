"""Closed-form genuine relative entropy of entanglement.

For an entangled state the closest biseparable state lies on one of five
boundary pieces of the biseparable polytope, written here for the first
half ``(P, Q, R, S) = (p0, p3, p4, p7)`` with ``lam`` the block parameters
of the closest state:

=====  ===================================  ===============  ==========
class  active equalities                    regions          value
=====  ===================================  ===============  ==========
I      lam0 + lam3 = 1/2                    A'               E_A
II     2 lam0 + lam3 + lam7 = 1             C1, C2           E_C
III    I and II                             B                E_B
IV     lam0 + 2 lam3 + lam4 = 1             A''', D1'        E_A'''
V      I and IV                             A''              E_A''
=====  ===================================  ===============  ==========

States classified by the second half are relabelled by
:data:`~cluster_ent.state_model.HALF_SWAP`, solved as first-half states and
mapped back.  All values are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import ENTANGLED, RegionLabel, classify, classify_quad
from .criteria import CriteriaReport, reduced_criteria
from .errors import DomainError, RegionMismatch
from .state_model import BLOCKS, HALF_SWAP, block_params, permute, validate

_SLACK = 1e-12

FORMULA_OF = {
    "A'": "E_A",
    "A''": "E_A''",
    "A'''": "E_A'''",
    "B": "E_B",
    "C1": "E_C",
    "C2": "E_C",
    "D1'": "E_A'''",
}
CLASS_OF = {"A'": "I", "C1": "II", "C2": "II", "B": "III", "A'''": "IV", "D1'": "IV", "A''": "V"}


def _unit(x: float, what: str = "argument") -> float:
    if not (-_SLACK <= x <= 1 + _SLACK):
        raise DomainError(f"{what} {x!r} outside [0, 1]")
    return min(max(x, 0.0), 1.0)


def binary_entropy(x: float) -> float:
    x = _unit(x)
    if x == 0.0 or x == 1.0:
        return 0.0
    y = 1.0 - x
    # log1p keeps the small-argument side accurate
    lx = math.log1p(-y) if x > 0.5 else math.log(x)
    ly = math.log1p(-x) if x < 0.5 else math.log(y)
    return -(x * lx + y * ly) / math.log(2)


def _wh(w: float, part: float) -> float:
    """``w * H2(part / w)`` extended by continuity to ``w = 0``."""
    if w <= 0:
        return 0.0
    return w * binary_entropy(part / w)


def ree_a(P, Q, R=0.0, S=0.0):
    return 1.0 - binary_entropy(P + Q)


def ree_b(P, Q, R, S):
    return 1.0 - _wh(Q + S, Q) - _wh(1 - Q - S, P)


def ree_c(P, Q, R, S):
    w = 1 - Q - S
    return w - _wh(w, P) if w > 0 else 0.0


def ree_a2(P, Q, R, S):
    return 1.0 - _wh(P + R, P) - _wh(1 - P - R, Q)


def ree_a3(P, Q, R, S):
    w = 1 - P - R
    return w - _wh(w, Q) if w > 0 else 0.0


FORMULAS = {"E_A": ree_a, "E_B": ree_b, "E_C": ree_c, "E_A''": ree_a2, "E_A'''": ree_a3}


def formula_value(region: str, quad, check: bool = True) -> float:
    """Genuine REE of a quad known to lie in ``region``.

    With ``check`` the quad is re-classified and :class:`RegionMismatch`
    raised if it is not in ``region``.  Biseparable regions give 0.
    """
    if check:
        actual = classify_quad(*quad)
        if actual != region:
            raise RegionMismatch(f"quad {tuple(quad)} lies in {actual}, not {region}")
    if region not in ENTANGLED:
        return 0.0
    return FORMULAS[FORMULA_OF[region]](*quad)


def edge_profile(P: float, Q: float, x: float) -> float:
    """``1 - x H2(Q/x) - (1-x) H2(P/(1-x))`` for ``Q <= x <= 1 - P``.

    ``E_B`` is this function at ``x = Q + S`` and ``E_A''`` at ``x = 1 - P - R``.
    """
    if not (0 <= Q <= x + _SLACK and x <= 1 - P + _SLACK and P >= 0):
        raise DomainError(f"need 0 <= Q <= x <= 1 - P, got P={P}, Q={Q}, x={x}")
    return 1.0 - _wh(x, Q) - _wh(1 - x, P)


def edge_minimizer(P: float, Q: float) -> float:
    """Unique stationary point (the minimum) of :func:`edge_profile` in x."""
    if P + Q <= 0:
        raise DomainError("P + Q must be positive")
    return Q / (P + Q)


def relative_entropy(F, L) -> float:
    """``sum_a F_a log2(F_a / L_a)`` over the support of F.

    Returns ``math.inf`` when L vanishes somewhere F does not.
    """
    F = np.asarray(F, dtype=float)
    L = np.asarray(L, dtype=float)
    supp = F > 0
    if np.any(L[supp] <= 0):
        return math.inf
    f = F[supp]
    return max(math.fsum(f * np.log2(f / L[supp])), 0.0)


# --------------------------------------------------------------------------
# closest biseparable states

_OFF_BLOCKS = np.concatenate([BLOCKS[1], BLOCKS[2]])


@dataclass(frozen=True)
class ClosestState:
    lam: np.ndarray
    class_tag: str
    half: str = "first"

    def boundary_residuals(self) -> dict[str, float]:
        """Residuals of the equalities active for this class (empty for Self)."""
        bp = block_params(self.lam)
        l0, l3, l4, l7 = bp.first_half if self.half != "second" else bp.second_half
        eq_i = l0 + l3 - 0.5
        eq_ii = 2 * l0 + l3 + l7 - 1
        eq_iv = l0 + 2 * l3 + l4 - 1
        return {
            "I": {"I": eq_i},
            "II": {"II": eq_ii},
            "III": {"I": eq_i, "II": eq_ii},
            "IV": {"IV": eq_iv},
            "V": {"I": eq_i, "IV": eq_iv},
        }.get(self.class_tag, {})


def _fill(lam, F, idx, target):
    """Give group ``idx`` total mass ``target`` in proportion to F.

    A group carrying no F-mass receives ``target`` spread evenly over its
    entries in the off blocks (0,1), (1,0), or over the whole group if it
    has none there; the relative entropy does not see this placement.
    """
    idx = np.asarray(idx)
    mass = math.fsum(F[idx])
    if mass > 0:
        lam[idx] = F[idx] * (target / mass)
        return
    spots = np.intersect1d(idx, _OFF_BLOCKS)
    if spots.size == 0:
        spots = idx
    lam[spots] = target / spots.size


def _closest_first_half(F: np.ndarray, region: str) -> np.ndarray:
    bp = block_params(F)
    P, Q, R, S = bp.first_half
    m0, m3 = bp.max_index(0), bp.max_index(3)
    non0 = BLOCKS[0][BLOCKS[0] != m0]
    non3 = BLOCKS[3][BLOCKS[3] != m3]
    tag = CLASS_OF[region]
    lam = np.zeros(16)
    if tag == "I":
        s = P + Q
        lam[m0] = P / (2 * s)
        lam[m3] = Q / (2 * s)
        _fill(lam, F, np.concatenate([non0, non3, _OFF_BLOCKS]), 0.5)
    elif tag == "II":
        w = 1 - Q - S
        lam[m0] = w / 2
        lam[BLOCKS[3]] = F[BLOCKS[3]]
        _fill(lam, F, np.concatenate([non0, _OFF_BLOCKS]), w / 2)
    elif tag == "III":
        w = 1 - Q - S
        lam[m0] = w / 2
        lam[m3] = (Q + S) / 2
        _fill(lam, F, non3, (Q + S) / 2)
        _fill(lam, F, np.concatenate([non0, _OFF_BLOCKS]), w / 2)
    elif tag == "IV":
        w = 1 - P - R
        lam[m3] = w / 2
        lam[BLOCKS[0]] = F[BLOCKS[0]]
        _fill(lam, F, np.concatenate([non3, _OFF_BLOCKS]), w / 2)
    else:  # V
        w = 1 - P - R
        lam[m3] = w / 2
        lam[m0] = (P + R) / 2
        _fill(lam, F, non0, (P + R) / 2)
        _fill(lam, F, np.concatenate([non3, _OFF_BLOCKS]), w / 2)
    return lam


def closest_state(F, region: RegionLabel | None = None) -> ClosestState:
    """Closest biseparable state of ``F`` in the cluster-diagonal family."""
    F = np.asarray(F, dtype=float)
    if region is None:
        region = classify(F)
    if not region.entangled:
        return ClosestState(validate(F), "Self", "none")
    tag = CLASS_OF[region.region]
    if region.half == "second":
        lam = permute(_closest_first_half(permute(F, HALF_SWAP), region.region), HALF_SWAP)
    else:
        lam = _closest_first_half(F, region.region)
    return ClosestState(validate(lam), tag, region.half)


@dataclass(frozen=True)
class REEResult:
    value: float
    region: RegionLabel
    closest: ClosestState
    formula: str
    report: CriteriaReport

    @property
    def value_nats(self) -> float:
        return self.value * math.log(2)

    def to_dict(self, nats: bool = False) -> dict:
        return {
            "E": self.value_nats if nats else self.value,
            "units": "nats" if nats else "bits",
            "region": self.region.name,
            "half": self.region.half,
            "formula": self.formula,
            "class": self.closest.class_tag,
            "closest": {"F": [float(v) for v in self.closest.lam]},
        }


def genuine_ree(F, eps: float = 0.0) -> REEResult:
    F = validate(F)
    bp = block_params(F)
    report = reduced_criteria(bp, eps)
    label = classify(F, eps)
    if not label.entangled:
        return REEResult(0.0, label, ClosestState(F, "Self", "none"), "zero", report)
    quad = bp.second_half if label.half == "second" else bp.first_half
    value = formula_value(label.region, quad, check=False)
    return REEResult(value, label, closest_state(F, label), FORMULA_OF[label.region], report)

