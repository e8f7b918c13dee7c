"""Numerical minimisation of relative entropy over the biseparable polytope.

This is the reference the closed forms are checked against, so it shares
nothing with them except the constraint list.  The method is a standard
feasible-start log-barrier interior point scheme with equality-constrained
Newton centering.  Convergence is certified by an explicit Lagrange dual
bound: from the barrier multipliers ``u = 1/(t * slack)`` the dual function

    g(u, nu) = 1 - u.b - nu + sum_{F_a > 0} F_a log((A^T u)_a + nu)

is maximised over the scalar ``nu`` and ``f(x) - g`` is reported as the
gap.  By weak duality ``g`` is a lower bound on the true minimum.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, lsq_linear

from .errors import NotConverged
from .state_model import validate

LN2 = math.log(2)
DEFAULT_TOL = 1e-6
MAX_ITER = 10**6
CENTER_ITER = 100
NEGLIGIBLE = 1e-15


def default_tol() -> float:
    """Solver tolerance in bits, overridable through ``CLUSTER_ENT_TOL``."""
    env = os.environ.get("CLUSTER_ENT_TOL")
    return float(env) if env else DEFAULT_TOL


@dataclass(frozen=True)
class LinearConstraint:
    """``coefficients . lam <= bound``."""

    coefficients: np.ndarray
    bound: float
    family: int
    indices: tuple[int, ...]


def _idx(a, b, c, d):
    return 8 * a + 4 * b + 2 * c + d


def constraint_set() -> list[LinearConstraint]:
    """The 16 + 64 linear biseparability constraints on a probability vector.

    Family 1: ``2 L[a,b,c,d] + sum_{x,y} L[~a,x,y,~d] <= 1``.
    Family 2: ``L[a,b,c,d] + L[~a,m,n,~d] <= 1/2``.
    Symmetric duplicates in family 2 are kept.
    """
    out = []
    bits = (0, 1)
    for a, b, c, d in itertools.product(bits, repeat=4):
        row = np.zeros(16)
        row[_idx(a, b, c, d)] += 2
        for x, y in itertools.product(bits, repeat=2):
            row[_idx(1 - a, x, y, 1 - d)] += 1
        out.append(LinearConstraint(row, 1.0, 1, (a, b, c, d)))
    for a, b, c, d in itertools.product(bits, repeat=4):
        for m, n in itertools.product(bits, repeat=2):
            row = np.zeros(16)
            row[_idx(a, b, c, d)] += 1
            row[_idx(1 - a, m, n, 1 - d)] += 1
            out.append(LinearConstraint(row, 0.5, 2, (a, b, c, d, m, n)))
    return out


def constraint_matrix() -> tuple[np.ndarray, np.ndarray]:
    cons = constraint_set()
    return np.array([c.coefficients for c in cons]), np.array([c.bound for c in cons])


@dataclass
class SolveReport:
    value: float  # bits
    lambda_opt: np.ndarray
    iterations: int
    gap: float  # bits, certified upper bound on value - optimum
    feasibility_residual: float
    lower_bound: float  # bits
    history: list[float] = field(default_factory=list)  # objective (bits) after each centering


def _objective(F, supp, x):
    f = F[supp]
    return math.fsum(f * np.log(f / x[supp]))


def _dual_bound(F, supp, A, b, u):
    """Maximise the dual function over nu for fixed ``u >= 0`` (nats)."""
    d = A.T @ u
    f = F[supp]
    ds = d[supp]
    lo = max(-ds.min(), -d.min())
    # derivative sum f/(ds+nu) - 1 is decreasing in nu
    def slope(nu):
        return math.fsum(f / (ds + nu)) - 1.0

    tiny = 1e-300 + abs(lo) * 1e-15
    if slope(lo + tiny) <= 0:
        nu = lo + tiny
    else:
        hi = 1.0 - ds.min()
        nu = brentq(slope, lo + tiny, hi, xtol=1e-16, rtol=1e-15, maxiter=500)
    return 1.0 - float(u @ b) - nu + math.fsum(f * np.log(ds + nu))


def _cuts(slack):
    """Slack thresholds above which barrier multipliers are dropped."""
    low = float(slack.min())
    return (np.inf, 1e-3, 1e-6) + tuple(low * k for k in (1e4, 1e2, 10))


def _refit(F, supp, A, x, active):
    """Multipliers on ``active`` rows fitted to stationarity at ``x``.

    Solves ``x_a ((A^T u)_a + nu) = F_a`` on the support in the least-squares
    sense with ``u >= 0``.  Barrier multipliers carry roundoff from tiny
    slacks; this fit does not, and any nonnegative ``u`` is dual feasible.
    """
    u = np.zeros(A.shape[0])
    if not active.any():
        return u
    M = np.column_stack([A[active].T, np.ones(16)])[supp] * x[supp, None]
    k = int(active.sum())
    lb = np.r_[np.zeros(k), -np.inf]
    fit = lsq_linear(M, F[supp], bounds=(lb, np.inf), method="bvls", tol=1e-15)
    u[active] = fit.x[:k]
    return u


def solve_min_relent(F, tol: float | None = None, max_iter: int = MAX_ITER) -> SolveReport:
    """Minimise ``sum F log2(F / L)`` over biseparable cluster-diagonal ``L``.

    Parameters
    ----------
    F : array_like, shape (16,)
        Cluster-basis probabilities.
    tol : float, optional
        Required certified gap in bits, between 1e-10 and 1e-3.  Defaults
        to :func:`default_tol`.
    max_iter : int
        Budget of Newton steps.

    Raises
    ------
    NotConverged
        If the budget runs out before the gap drops below ``tol``.
    """
    F = np.asarray(validate(F))
    if tol is None:
        tol = default_tol()
    if not 1e-10 <= tol <= 1e-3:
        raise ValueError(f"tol must lie in [1e-10, 1e-3], got {tol}")
    A, b = constraint_matrix()
    G = np.vstack([A, -np.eye(16)])
    h = np.concatenate([b, np.zeros(16)])
    m = G.shape[0]
    # entries below NEGLIGIBLE leave the working objective; since L <= 1 their
    # terms are at least F log F, so subtracting their entropy keeps the bound valid
    full = F > 0
    supp = F > NEGLIGIBLE
    tiny = F[full & ~supp]
    shift = math.fsum(-tiny * np.log(tiny)) if tiny.size else 0.0
    Fs = np.where(supp, F, 0.0)
    ones = np.ones(16)

    x = np.full(16, 1.0 / 16)
    t = 1.0
    mu = 8.0
    iters = 0
    history = []
    tol_nats = tol * LN2
    lower = -math.inf  # best dual bound so far; every one of them is valid

    def phi(t, x, s):
        return t * _objective(F, supp, x) - math.fsum(np.log(s))

    while True:
        # centering; an inexact center only weakens the dual bound, never its validity
        inner = 0
        while True:
            s = h - G @ x
            grad = t * (-Fs / x) + G.T @ (1.0 / s)
            # entries with F near 1e-50 can push x low enough to overflow; cap
            # the curvature so those coordinates simply stay put
            with np.errstate(over="ignore"):
                curv = np.minimum(t * (Fs / x) / x, 1e250)
                wts = np.minimum(1.0 / s**2, 1e250)
            hess = np.diag(curv) + (G.T * wts) @ G
            # symmetric diagonal scaling tames the 1/s^2 spread near the boundary
            dscale = 1.0 / np.sqrt(np.diag(hess))
            scaled = hess * np.outer(dscale, dscale)
            sol = np.linalg.solve(scaled, np.column_stack([grad, ones]) * dscale[:, None])
            hinv_g, hinv_1 = (sol * dscale[:, None]).T
            w = -(ones @ hinv_g) / (ones @ hinv_1)
            dx = -(hinv_g + w * hinv_1)
            dx -= dx.sum() / 16  # keep the simplex equality exact
            decrement = -(grad @ dx)
            if decrement / 2 <= 1e-10 or inner >= CENTER_ITER:
                break
            inner += 1
            iters += 1
            if iters > max_iter:
                raise NotConverged(f"Newton budget of {max_iter} steps exhausted")
            # backtracking: stay strictly feasible, then Armijo
            gdx = G @ dx
            step = 1.0
            pos = gdx > 0
            if np.any(pos):
                step = min(1.0, 0.99 * float(np.min(s[pos] / gdx[pos])))
            f0 = phi(t, x, s)
            slack = 1e-13 * abs(f0)
            while True:
                xn = x + step * dx
                sn = h - G @ xn
                if np.all(sn > 0) and phi(t, xn, sn) <= f0 - 0.25 * step * decrement + slack:
                    break
                step *= 0.5
                if step < 1e-20:
                    break
            if step < 1e-20:
                break
            x = xn

        s = h - G @ x
        fval = _objective(F, full, x)
        history.append(fval / LN2)
        slack_a = s[: A.shape[0]]
        u = 1.0 / (t * slack_a)
        # any u >= 0 is dual feasible; dropping multipliers of slack
        # constraints removes their 1/t share of the gap
        lower = max(
            [lower]
            + [_dual_bound(F, supp, A, b, np.where(slack_a <= cut, u, 0.0)) - shift for cut in _cuts(slack_a)]
            + [_dual_bound(F, supp, A, b, _refit(F, supp, A, x, slack_a <= cut)) - shift for cut in _cuts(slack_a)[1:]]
        )
        gap = max(fval - lower, 0.0)
        if gap <= tol_nats:
            break
        if m / t < 1e-3 * tol_nats:
            raise NotConverged(f"barrier parameter saturated with gap {gap / LN2:.3g} bits")
        t *= mu

    s = h - G @ x
    resid = max(0.0, float(-s.min()), abs(float(x.sum()) - 1.0))
    return SolveReport(
        value=fval / LN2,
        lambda_opt=x.copy(),
        iterations=iters,
        gap=gap / LN2,
        feasibility_residual=resid,
        lower_bound=lower / LN2,
        history=history,
    )


@dataclass
class VerifyReport:
    analytic: float
    oracle: float
    discrepancy: float
    region: str
    half: str
    class_tag: str
    lambda_analytic: np.ndarray
    lambda_oracle: np.ndarray
    oracle_gap: float
    oracle_boundary_residual: float
    same_boundary: bool

    def to_dict(self) -> dict:
        return {
            "E_analytic": self.analytic,
            "E_oracle": self.oracle,
            "discrepancy": self.discrepancy,
            "region": self.region,
            "half": self.half,
            "class": self.class_tag,
            "oracle_gap": self.oracle_gap,
            "oracle_boundary_residual": self.oracle_boundary_residual,
            "same_boundary": self.same_boundary,
            "closest_analytic": [float(v) for v in self.lambda_analytic],
            "closest_oracle": [float(v) for v in self.lambda_oracle],
        }


BOUNDARY_ATOL = 1e-4


def verify(F, tol: float | None = None) -> VerifyReport:
    """Compare the closed-form REE of ``F`` with the numerical optimum.

    ``same_boundary`` reports whether the oracle's minimiser meets the
    equalities of the analytic boundary class to within ``BOUNDARY_ATOL``.
    """
    from .ree_analytic import ClosestState, genuine_ree

    F = validate(F)
    res = genuine_ree(F)
    sol = solve_min_relent(F, tol)
    probe = ClosestState(sol.lambda_opt, res.closest.class_tag, res.closest.half)
    residuals = probe.boundary_residuals()
    worst = max((abs(v) for v in residuals.values()), default=0.0)
    return VerifyReport(
        analytic=res.value,
        oracle=sol.value,
        discrepancy=abs(res.value - sol.value),
        region=res.region.name,
        half=res.region.half,
        class_tag=res.closest.class_tag,
        lambda_analytic=np.array(res.closest.lam),
        lambda_oracle=sol.lambda_opt,
        oracle_gap=sol.gap,
        oracle_boundary_residual=worst,
        same_boundary=worst <= BOUNDARY_ATOL,
    )
