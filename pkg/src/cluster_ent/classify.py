"""Region taxonomy of cluster-diagonal states and figure data.

A half of the block parameters is a quad ``(P, Q, R, S)``: for the first
half ``(p0, p3, p4, p7)``, for the second ``(p1, p2, p5, p6)``.  Each quad
falls in exactly one of nine regions:

=======  ===================================================  ==========
region   conditions                                           entangled
=======  ===================================================  ==========
A'       P+Q > 1/2, S <= p_AB, R <= p_A'A''                   yes
A''      P+Q > 1/2, S <= p_AB, p_A'A'' < R < P                yes
A'''     P+Q > 1/2, S <= p_AB, R >= P                         yes
B        P+Q > 1/2, p_AB < S < Q                              yes
C1       P+Q > 1/2, S >= Q                                    yes
C2       P+Q <= 1/2, 2P+Q+S > 1                               yes
D1'      P+Q <= 1/2, S < Q, P+2Q+R > 1                        yes
D1''     P+Q <= 1/2, S < Q, P+2Q+R <= 1                       no
D2       P+Q <= 1/2, Q <= S <= 1-2P-Q                         no
=======  ===================================================  ==========

with ``p_AB = Q(1-P-Q)/(P+Q)`` and ``p_A'A'' = P(1-P-Q)/(P+Q)``.  Points on
a shared border go to the closed side of the inequality as written above.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .criteria import reduced_criteria, reduced_margins
from .errors import InvalidQuad
from .state_model import block_params, block_params_batch

REGIONS = ("A'", "A''", "A'''", "B", "C1", "C2", "D1'", "D1''", "D2")
ENTANGLED = frozenset(REGIONS[:7])
BISEPARABLE = "Biseparable"
REGION_CODES = {name: i for i, name in enumerate(REGIONS + (BISEPARABLE,))}
HALVES = ("first", "second", "none")

# image of each entangled region under (p0, p4) <-> (p3, p7)
EXCHANGE_PAIRS = {
    "A'": "A'",
    "A''": "B",
    "B": "A''",
    "A'''": "C1",
    "C1": "A'''",
    "D1'": "C2",
    "C2": "D1'",
}

QUAD_TOL = 1e-12


@dataclass(frozen=True)
class Thresholds:
    p_ab: float
    p_aa: float
    roof: float


def thresholds(P: float, Q: float, S: float = 0.0) -> Thresholds:
    """Border values ``p_AB`` (for S) and ``p_A'A''`` (for R) of a quad.

    Both are ``+inf`` when ``P + Q = 0``.  ``roof`` is the largest R that
    normalisation allows given P, Q and S.
    """
    s = P + Q
    if s > 0:
        return Thresholds(Q * (1 - s) / s, P * (1 - s) / s, 1 - s - S)
    return Thresholds(math.inf, math.inf, 1 - s - S)


def region_codes(P, Q, R, S, eps: float = 0.0) -> np.ndarray:
    """Vectorised region lookup; returns indices into :data:`REGIONS`.

    The three violation tests use the same arithmetic as
    :func:`cluster_ent.criteria.reduced_margins`, so region and criteria
    flags never disagree through rounding.
    """
    P, Q, R, S = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (P, Q, R, S)))
    s = P + Q
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(s > 0, (1 - s) / s, np.inf)
        p_ab = np.where(s > 0, Q * ratio, np.inf)
        p_aa = np.where(s > 0, P * ratio, np.inf)
    v5 = s - 0.5 > eps
    v6 = 2 * P + Q + S - 1 > eps
    v7 = 2 * Q + P + R - 1 > eps

    # with v5 violated, S > p_AB implies v6 and R > p_A'A'' implies v7; the
    # flags break rounding ties so labels never contradict the criteria
    a_side = (S <= p_ab) | ~v6
    upper = np.select(
        [a_side & ((R <= p_aa) | ~v7), a_side & (R < P), a_side, S < Q],
        [0, 1, 2, 3],
        default=4,
    )
    lower = np.select([v6, v7, S < Q], [5, 6, 7], default=8)
    return np.where(v5, upper, lower)


def _check_quad(P, Q, R, S):
    vals = (P, Q, R, S)
    if any(not math.isfinite(v) or v < -QUAD_TOL for v in vals):
        raise InvalidQuad(f"quad entries must be finite and nonnegative: {vals}")
    if R > 3 * P + QUAD_TOL or S > 3 * Q + QUAD_TOL:
        raise InvalidQuad(f"residual exceeds three times its block maximum: {vals}")
    if P + Q + R + S > 1 + QUAD_TOL:
        raise InvalidQuad(f"quad mass {P + Q + R + S!r} exceeds 1")


def classify_quad(P: float, Q: float, R: float, S: float, eps: float = 0.0) -> str:
    _check_quad(P, Q, R, S)
    return REGIONS[int(region_codes(P, Q, R, S, eps))]


@dataclass(frozen=True)
class RegionLabel:
    """Classification of a state.

    ``half`` names the inequality triple that drove the label and is
    ``"none"`` for biseparable states, whose first-half sub-label (``D1''``
    or ``D2``) is kept in ``detail``.
    """

    region: str
    half: str
    detail: str | None = None

    @property
    def entangled(self) -> bool:
        return self.region in ENTANGLED

    @property
    def name(self) -> str:
        return self.detail if self.region == BISEPARABLE else self.region


def classify(F, eps: float = 0.0) -> RegionLabel:
    bp = block_params(F)
    report = reduced_criteria(bp, eps)
    if report.first_half:
        return RegionLabel(classify_quad(*bp.first_half, eps=eps), "first")
    if report.second_half:
        return RegionLabel(classify_quad(*bp.second_half, eps=eps), "second")
    return RegionLabel(BISEPARABLE, "none", classify_quad(*bp.first_half, eps=eps))


def classify_batch(F: np.ndarray, eps: float = 0.0):
    """Classify an ``(n, 16)`` batch.

    Returns ``(codes, halves, details)``: region codes (see
    :data:`REGION_CODES`), indices into :data:`HALVES`, and the first-half
    region code that biseparable states carry as detail.
    """
    p = block_params_batch(F)
    m = reduced_margins(p)
    first = (m[:, :3] > eps).any(axis=1)
    second = (m[:, 3:] > eps).any(axis=1)
    c1 = region_codes(p[:, 0], p[:, 3], p[:, 4], p[:, 7], eps)
    c2 = region_codes(p[:, 1], p[:, 2], p[:, 5], p[:, 6], eps)
    bisep = REGION_CODES[BISEPARABLE]
    codes = np.where(first, c1, np.where(second, c2, bisep))
    halves = np.where(first, 0, np.where(second, 1, 2))
    return codes, halves, c1


# --------------------------------------------------------------------------
# figure data


@dataclass
class RegionGrid:
    """Labelled grid for one of the region maps.

    ``x`` is always p3; ``y`` is p7 (three-parameter view, p4 = 0) or p4
    (layer view, p7 held fixed).
    """

    p0: float
    x_name: str
    y_name: str
    x: np.ndarray
    y: np.ndarray
    labels: np.ndarray  # shape (len(y), len(x)), region name or "unphysical"
    fixed: dict
    boundaries: dict = field(default_factory=dict)
    intersections: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "label"])
        for j, yv in enumerate(self.y):
            for i, xv in enumerate(self.x):
                w.writerow([f"{xv:.17g}", f"{yv:.17g}", self.labels[j, i]])
        return buf.getvalue()

    def boundaries_dict(self) -> dict:
        return {
            "p0": self.p0,
            "x": self.x_name,
            "y": self.y_name,
            "fixed": self.fixed,
            "polylines": {k: [[float(a), float(b)] for a, b in v] for k, v in self.boundaries.items()},
            "intersections": {k: [float(a), float(b)] for k, v in self.intersections.items() for a, b in [v]},
        }


def _clip(xs, ys, lo, hi):
    keep = np.isfinite(ys) & (ys >= lo - 1e-15) & (ys <= hi + 1e-15)
    return np.column_stack([xs[keep], ys[keep]])


def _p_ab_meets_diagonal(p0: float) -> float | None:
    """p3 where the curve p7 = p_AB(p3) crosses p7 = p3, found numerically."""
    if p0 >= 0.5:
        return None

    def g(x):
        return thresholds(p0, x).p_ab - x

    return brentq(g, 1e-15, 1 - p0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def region_grid(p0: float, axis_max: float | None = None, resolution: int = 400, p4_slice: float | None = None) -> RegionGrid:
    """Label a grid of quads at fixed p0.

    Without ``p4_slice`` the grid spans (p3, p7) at p4 = 0, the bottom of
    each three-dimensional region.  With ``p4_slice`` it spans (p3, p4) and
    the given value is the fixed p7 of that plane.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0 must lie in [0, 1], got {p0}")
    if axis_max is None:
        axis_max = 1.0 - p0
    x = np.linspace(0.0, axis_max, resolution)
    y = np.linspace(0.0, axis_max, resolution)
    X, Y = np.meshgrid(x, y)
    P = np.full_like(X, p0)
    if p4_slice is None:
        Q, S, R = X, Y, np.zeros_like(X)
        y_name, fixed = "p7", {"p4": 0.0}
    else:
        Q, R, S = X, Y, np.full_like(X, float(p4_slice))
        y_name, fixed = "p4", {"p7": float(p4_slice)}

    codes = region_codes(P, Q, R, S)
    names = np.array(REGIONS, dtype=object)[codes]
    unphysical = (R > 3 * P + QUAD_TOL) | (S > 3 * Q + QUAD_TOL) | (P + Q + R + S > 1 + QUAD_TOL)
    names[unphysical] = "unphysical"

    grid = RegionGrid(p0, "p3", y_name, x, y, names, fixed)
    xs = np.linspace(0.0, axis_max, resolution)
    edge = 0.5 - p0
    polys = {}
    if 0.0 <= edge <= axis_max:
        polys["p0+p3=1/2"] = np.array([[edge, 0.0], [edge, axis_max]])
    upper = xs[xs > edge] if edge >= 0 else xs
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (1 - p0 - upper) / (p0 + upper)
    if p4_slice is None:
        polys["p7=p_AB"] = _clip(upper, upper * ratio, 0.0, axis_max)
        polys["p7=p3"] = _clip(xs, xs, 0.0, axis_max)
        polys["2p0+p3+p7=1"] = _clip(xs, 1 - 2 * p0 - xs, 0.0, axis_max)
        polys["p7=3p3"] = _clip(xs, 3 * xs, 0.0, axis_max)
        polys["p0+p3+p7=1"] = _clip(xs, 1 - p0 - xs, 0.0, axis_max)
        cross = _p_ab_meets_diagonal(p0)
        if cross is not None and cross <= axis_max:
            grid.intersections["p7=p_AB & p7=p3"] = (cross, cross)
    else:
        s7 = float(p4_slice)
        polys["p4=p_A'A''"] = _clip(upper, p0 * ratio, 0.0, axis_max)
        polys["p4=p0"] = _clip(upper, np.full_like(upper, p0), 0.0, axis_max)
        lower = xs[xs <= edge]
        polys["p4=1-p0-2p3"] = _clip(lower, 1 - p0 - 2 * lower, 0.0, axis_max)
        polys["p4=3p0"] = _clip(xs, np.full_like(xs, 3 * p0), 0.0, axis_max)
        polys["p0+p3+p4+p7=1"] = _clip(xs, 1 - p0 - s7 - xs, 0.0, axis_max)
    grid.boundaries = {k: v for k, v in polys.items() if len(v)}
    return grid


# --------------------------------------------------------------------------
# biseparable polytope section at fixed lambda_0

_BISEP_SURFACES = ("I", "II", "IV")
_PHYS_SURFACES = ("VI", "VII", "L73")


def _surface_values(l0, l3, l7, l4):
    return {
        "I": l0 + l3 - 0.5,
        "II": 2 * l0 + l3 + l7 - 1,
        "IV": l0 + 2 * l3 + l4 - 1,
        "VI": l0 + l3 + l4 + l7 - 1,
        "VII": l4 - 3 * l0,
        "L73": l7 - 3 * l3,
    }


def _merge(active: list[str]) -> str:
    act = list(active)
    if "I" in act and "II" in act:
        act = ["III"] + [a for a in act if a not in ("I", "II")]
    elif "I" in act and "IV" in act:
        act = ["V"] + [a for a in act if a not in ("I", "IV")]
    return "+".join(act)


def surface_labels(l0, l3, l7, l4, atol: float = 1e-12) -> np.ndarray:
    """Label points of the (lambda3, lambda7, lambda4) section at ``lambda0 = l0``.

    Returns ``"unphysical"`` outside the parameter domain, ``"entangled"``
    outside the biseparable set, ``"interior"`` strictly inside, and
    otherwise the ``+``-joined identifiers of the surfaces the point lies on
    (``III`` for I and II together, ``V`` for I and IV together).
    Identifiers: I ``l0+l3=1/2``, II ``2l0+l3+l7=1``, IV ``l0+2l3+l4=1``,
    VI ``l0+l3+l4+l7=1``, VII ``l4=3l0``, L73 ``l7=3l3``.
    """
    l3, l7, l4 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (l3, l7, l4)))
    shape = l3.shape
    l3, l7, l4 = (v.reshape(-1) for v in (l3, l7, l4))
    g = _surface_values(l0, l3, l7, l4)
    unphys = np.zeros(l3.shape, dtype=bool)
    for k in _PHYS_SURFACES:
        unphys |= g[k] > atol
    ent = np.zeros(l3.shape, dtype=bool)
    for k in _BISEP_SURFACES:
        ent |= g[k] > atol
    order = _BISEP_SURFACES + _PHYS_SURFACES
    key = np.zeros(l3.shape, dtype=int)
    for bit, k in enumerate(order):
        key |= (np.abs(g[k]) <= atol).astype(int) << bit
    table = np.empty(2 ** len(order), dtype=object)
    for code in range(table.size):
        active = [k for bit, k in enumerate(order) if code >> bit & 1]
        table[code] = _merge(active) if active else "interior"
    out = table[key]
    out[ent] = "entangled"
    out[unphys] = "unphysical"
    return out.reshape(shape)[()]


@dataclass
class SurfaceGrid:
    l0: float
    axis: np.ndarray
    labels: np.ndarray  # indexed [i3, i7, i4]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l3", "l7", "l4", "label"])
        a = [f"{v:.17g}" for v in self.axis]
        for (i, j, k), lab in np.ndenumerate(self.labels):
            w.writerow([a[i], a[j], a[k], lab])
        return buf.getvalue()


def bisep_surface(l0: float, resolution: int = 100, axis_max: float | None = None) -> SurfaceGrid:
    """Label a cubic grid over (lambda3, lambda7, lambda4) at ``lambda0 = l0``.

    Points within half a grid step of a surface carry that surface's label.
    """
    if not 0.0 <= l0 <= 1.0:
        raise ValueError(f"l0 must lie in [0, 1], got {l0}")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if axis_max is None:
        axis_max = 1.0 - l0
    axis = np.linspace(0.0, axis_max, resolution)
    L3, L7, L4 = np.meshgrid(axis, axis, axis, indexing="ij")
    step = axis_max / (resolution - 1)
    return SurfaceGrid(l0, axis, surface_labels(l0, L3, L7, L4, atol=step / 2))
