"""Biseparability criteria for cluster-diagonal states.

Two equivalent forms are provided.  :func:`raw_criteria` enumerates the two
original inequality families over every index choice and serves as the slow
reference.  :func:`reduced_criteria` evaluates six inequalities on the block
parameters:

====  ==========================
v5    p0 + p3 <= 1/2
v6    2 p0 + p3 + p7 <= 1
v7    2 p3 + p0 + p4 <= 1
v8    p1 + p2 <= 1/2
v9    2 p1 + p2 + p6 <= 1
v10   2 p2 + p1 + p5 <= 1
====  ==========================

A state is biseparable iff none of them is violated.  The first three
involve only blocks (0,0) and (1,1), the last three only (0,1) and (1,0),
and at most one of the two triples can be violated at once.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import MutualExclusionBreach
from .state_model import BlockParams, block_params

NAMES = ("v5", "v6", "v7", "v8", "v9", "v10")


class RawViolation(NamedTuple):
    family: int
    indices: tuple[int, ...]
    margin: float


@dataclass(frozen=True)
class CriteriaReport:
    violated: tuple[bool, ...]
    margins: tuple[float, ...]
    raw: tuple[RawViolation, ...] | None = None

    @property
    def violated_names(self) -> list[str]:
        return [n for n, v in zip(NAMES, self.violated) if v]

    @property
    def first_half(self) -> bool:
        return any(self.violated[:3])

    @property
    def second_half(self) -> bool:
        return any(self.violated[3:])

    @property
    def biseparable(self) -> bool:
        return not any(self.violated)

    def to_dict(self) -> dict:
        return {
            "biseparable": self.biseparable,
            "violated": self.violated_names,
            "margins": list(self.margins),
        }


def _f(F, a, b, c, d):
    return F[8 * a + 4 * b + 2 * c + d]


def raw_criteria(F, eps: float = 0.0) -> list[RawViolation]:
    """Every violated instance of the two original inequality families.

    Family 1 is indexed by ``(alpha, beta, gamma, delta)``, family 2 by
    ``(alpha, beta, gamma, delta, mu, nu)``.  Margins are reported on the
    scale of the normalised forms ``2F_a + sum(opposite block) <= 1`` and
    ``F_a + F_b <= 1/2`` so they are comparable with the reduced margins.
    """
    F = np.asarray(F, dtype=float)
    out = []
    bits = (0, 1)
    for a, b, c, d in itertools.product(bits, repeat=4):
        na, nd = 1 - a, 1 - d
        same = sum(_f(F, a, x, y, d) for x in bits for y in bits)
        flip_d = sum(_f(F, a, x, y, nd) for x in bits for y in bits)
        flip_a = sum(_f(F, na, x, y, d) for x in bits for y in bits)
        opposite = sum(_f(F, na, x, y, nd) for x in bits for y in bits)
        m1 = 2 * _f(F, a, b, c, d) - (same + flip_d + flip_a)
        if m1 > eps:
            out.append(RawViolation(1, (a, b, c, d), m1))
        rhs2 = same + flip_d + flip_a + opposite
        for mu, nu in itertools.product(bits, repeat=2):
            m2 = (2 * _f(F, a, b, c, d) + 2 * _f(F, na, mu, nu, nd) - rhs2) / 2
            if m2 > eps:
                out.append(RawViolation(2, (a, b, c, d, mu, nu), m2))
    return out


def reduced_margins(p) -> np.ndarray:
    """Left minus right side of the six reduced inequalities.

    Accepts a single length-8 parameter vector or an ``(n, 8)`` batch.
    """
    p = np.asarray(p, dtype=float)
    p0, p1, p2, p3, p4, p5, p6, p7 = np.moveaxis(p, -1, 0)
    return np.stack(
        [
            p0 + p3 - 0.5,
            2 * p0 + p3 + p7 - 1,
            2 * p3 + p0 + p4 - 1,
            p1 + p2 - 0.5,
            2 * p1 + p2 + p6 - 1,
            2 * p2 + p1 + p5 - 1,
        ],
        axis=-1,
    )


def reduced_criteria(p: BlockParams, eps: float = 0.0) -> CriteriaReport:
    margins = reduced_margins(p.p)
    flags = tuple(bool(m > eps) for m in margins)
    if any(flags[:3]) and any(flags[3:]):
        raise MutualExclusionBreach(
            f"both inequality halves violated ({', '.join(n for n, v in zip(NAMES, flags) if v)})"
        )
    return CriteriaReport(flags, tuple(float(m) for m in margins))


def biseparable_verdict(F, eps: float = 0.0, with_raw: bool = False) -> tuple[bool, CriteriaReport]:
    """Return ``(is_biseparable, report)`` from the reduced criteria.

    With ``with_raw=True`` the report also carries the raw violated
    instances.
    """
    report = reduced_criteria(block_params(F), eps)
    if with_raw:
        report = CriteriaReport(report.violated, report.margins, tuple(raw_criteria(F, eps)))
    return report.biseparable, report
