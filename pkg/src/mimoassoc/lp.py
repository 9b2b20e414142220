"""Dense simplex LP engine and primal recovery of the activity fractions.

The recovery step turns converged dual prices into a feasible association
configuration: with R~ = R / r* the max-min program maximize theta subject
to theta <= sum_j alpha R~, plus the association constraints, attains
theta = 1 exactly at the optimum, so the achieved theta certifies how
consistent the prices and throughputs are.

The engine is a two-phase dense tableau simplex with Bland's rule:
instances here are small and deterministic pivoting matters more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import feasibility_report, sanitize_alpha
from .dual import SUPPORT_RATIO_TOL


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """maximize c.x subject to A x <= b, x >= 0."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float)
        m, n = self.A.shape
        if self.c.shape != (n,) or self.b.shape != (m,):
            raise ValueError("inconsistent LP dimensions")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A))
                and np.all(np.isfinite(self.b))):
            raise ValueError("LP coefficients must be finite")


@dataclass
class LpSolution:
    x: np.ndarray
    objective_value: float
    status: LpStatus
    is_vertex: bool
    pivots: int = 0


class LpPivotLimit(RuntimeError):
    pass


def _pivot(T, obj, basis, row, col):
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    obj -= obj[col] * T[row]
    basis[row] = col


def _simplex_phase(T, obj, basis, allowed_cols, tol, max_pivots):
    """Maximize the priced-out objective row; Bland's rule throughout."""
    m = T.shape[0]
    pivots = 0
    while True:
        enter = -1
        for j in allowed_cols:
            if obj[j] > tol:
                enter = j
                break
        if enter < 0:
            return LpStatus.OPTIMAL, pivots
        leave = -1
        best = np.inf
        for i in range(m):
            if T[i, enter] > tol:
                ratio = T[i, -1] / T[i, enter]
                if ratio < best - 1e-12 or (abs(ratio - best) <= 1e-12
                                            and (leave < 0 or basis[i] < basis[leave])):
                    best = ratio
                    leave = i
        if leave < 0:
            return LpStatus.UNBOUNDED, pivots
        _pivot(T, obj, basis, leave, enter)
        pivots += 1
        if pivots > max_pivots:
            raise LpPivotLimit(f"simplex exceeded {max_pivots} pivots "
                               f"(m={m}, n={len(obj) - 1})")


def solve_lp(lp: LinearProgram, tol: float = 1e-9, max_pivots: int = 100_000) -> LpSolution:
    """Solve the LP to an optimal vertex, or report infeasible/unbounded."""
    m, n = lp.A.shape
    neg = lp.b < 0
    n_art = int(neg.sum())
    ncols = n + m + n_art

    T = np.zeros((m, ncols + 1))
    basis = np.empty(m, dtype=int)
    art_col = n + m
    for i in range(m):
        if neg[i]:
            T[i, :n] = -lp.A[i]
            T[i, n + i] = -1.0
            T[i, art_col] = 1.0
            T[i, -1] = -lp.b[i]
            basis[i] = art_col
            art_col += 1
        else:
            T[i, :n] = lp.A[i]
            T[i, n + i] = 1.0
            T[i, -1] = lp.b[i]
            basis[i] = n + i

    total_pivots = 0
    if n_art:
        # phase 1: drive the artificial variables to zero
        c1 = np.zeros(ncols + 1)
        c1[n + m:ncols] = -1.0
        obj = c1.copy()
        for i in range(m):
            if obj[basis[i]] != 0.0:
                obj -= obj[basis[i]] * T[i]
        status, piv = _simplex_phase(T, obj, basis, range(ncols), tol, max_pivots)
        total_pivots += piv
        # the objective row constant carries minus the attained value, so a
        # positive constant means some artificial is still positive
        if status != LpStatus.OPTIMAL or obj[-1] > tol * max(1.0, abs(lp.b).max()):
            return LpSolution(np.zeros(n), float("nan"), LpStatus.INFEASIBLE, False, total_pivots)
        # pivot surviving artificials out of the basis (they sit at value 0)
        for i in range(m):
            if basis[i] >= n + m:
                for j in range(n + m):
                    if abs(T[i, j]) > tol:
                        _pivot(T, obj, basis, i, j)
                        total_pivots += 1
                        break
                # an all-zero row is a redundant constraint; leaving the
                # artificial basic at value zero is harmless for phase 2

    c2 = np.zeros(ncols + 1)
    c2[:n] = lp.c
    obj = c2.copy()
    for i in range(m):
        if obj[basis[i]] != 0.0:
            obj -= obj[basis[i]] * T[i]
    structural = [j for j in range(n + m)]  # artificials are never re-admitted
    status, piv = _simplex_phase(T, obj, basis, structural, tol, max_pivots)
    total_pivots += piv
    if status == LpStatus.UNBOUNDED:
        return LpSolution(np.zeros(n), np.inf, LpStatus.UNBOUNDED, False, total_pivots)

    x = np.zeros(ncols)
    for i in range(m):
        x[basis[i]] = T[i, -1]
    xs = x[:n]
    return LpSolution(xs, float(lp.c @ xs), LpStatus.OPTIMAL, True, total_pivots)


# ---------------------------------------------------------------------------
# Primal recovery
# ---------------------------------------------------------------------------

class RecoveryError(RuntimeError):
    """theta_max fell outside its certification band: the throughput targets
    are inconsistent with the rates, usually because the dual prices are
    stale or insufficiently converged."""


def recover_alpha_ladder(rates, r_star, streams, allowed=None, prices=None,
                         theta_tol: float = 1e-3,
                         ratios=(SUPPORT_RATIO_TOL, 1e-4, 1e-2, None)) -> AlphaRecovery:
    """recover_alpha with progressively wider support pruning.

    With inexact dual prices the tightest argmax window can drop a BS a
    fractional user genuinely needs, collapsing theta; widening the window
    restores it.  Returns the first recovery landing inside the theta band,
    else the one closest to theta = 1.
    """
    best = None
    for ratio in ratios:
        rec = recover_alpha(rates, r_star, streams, allowed=allowed,
                            prices=prices if ratio is not None else None,
                            theta_tol=np.inf, prune_ratio=ratio or 1.0)
        if abs(rec.theta_max - 1.0) <= theta_tol:
            return rec
        if best is None or abs(rec.theta_max - 1.0) < abs(best.theta_max - 1.0):
            best = rec
    return best




@dataclass
class AlphaRecovery:
    alpha: np.ndarray
    theta_max: float
    lp_pivots: int


def recover_alpha(rates, r_star, streams, allowed=None, prices=None,
                  theta_tol: float = 1e-3, prune_ratio: float = SUPPORT_RATIO_TOL,
                  feas_tol: float = 1e-9) -> AlphaRecovery:
    """Recover a feasible activity matrix achieving the target throughputs.

    When dual ``prices`` (p, lam) are supplied, variables outside each user's
    maximum bang-per-buck set (within ``prune_ratio``) are fixed to zero,
    matching the optimal support and shrinking the LP.  Raises RecoveryError
    unless theta_max lands in [1 - theta_tol, 1 + theta_tol].
    """
    rates = np.asarray(rates, dtype=float)
    r_star = np.asarray(r_star, dtype=float)
    streams = np.asarray(streams, dtype=float)
    K, J = rates.shape
    if np.any(r_star <= 0):
        raise ValueError("target throughputs must be positive")
    mask = np.ones((K, J), dtype=bool) if allowed is None else np.asarray(allowed, dtype=bool)

    if prices is not None:
        p, lam = prices
        den = np.asarray(p, dtype=float)[None, :] + np.asarray(lam, dtype=float)[:, None]
        w = np.where(mask & (den > 0), rates / np.where(den > 0, den, 1.0), -np.inf)
        wmax = w.max(axis=1)
        mask = mask & (w >= (1.0 - prune_ratio) * wmax[:, None])

    pairs = [(k, j) for k in range(K) for j in range(J) if mask[k, j]]
    col_of = {kj: i + 1 for i, kj in enumerate(pairs)}  # column 0 is theta
    nv = 1 + len(pairs)
    rt = rates / r_star[:, None]

    rows = []
    rhs = []
    for k in range(K):  # theta - sum_j alpha R~ <= 0
        row = np.zeros(nv)
        row[0] = 1.0
        for j in range(J):
            if mask[k, j]:
                row[col_of[(k, j)]] = -rt[k, j]
        rows.append(row)
        rhs.append(0.0)
    for j in range(J):  # per-BS stream budget
        row = np.zeros(nv)
        for k in range(K):
            if mask[k, j]:
                row[col_of[(k, j)]] = 1.0
        rows.append(row)
        rhs.append(streams[j])
    for k in range(K):  # per-user airtime budget
        row = np.zeros(nv)
        for j in range(J):
            if mask[k, j]:
                row[col_of[(k, j)]] = 1.0
        rows.append(row)
        rhs.append(1.0)

    c = np.zeros(nv)
    c[0] = 1.0
    sol = solve_lp(LinearProgram(c, np.array(rows), np.array(rhs)))
    if sol.status != LpStatus.OPTIMAL:
        raise RecoveryError(f"recovery LP ended with status {sol.status.value}")
    theta = float(sol.x[0])
    if not (1.0 - theta_tol <= theta <= 1.0 + theta_tol):
        raise RecoveryError(f"theta_max = {theta:.6g} outside [{1 - theta_tol:.4g}, "
                            f"{1 + theta_tol:.4g}]; dual prices look inconsistent")

    alpha = np.zeros((K, J))
    for (k, j), col in col_of.items():
        alpha[k, j] = sol.x[col]
    # simplex arithmetic can overshoot a budget by ~1e-9 at scale; scale the
    # excess away so downstream exact-budget passes start from a clean point
    alpha = sanitize_alpha(alpha, streams)
    bad = feasibility_report(alpha, streams, tol=feas_tol)
    if bad:
        raise RecoveryError("recovered alpha violates feasibility: " + "; ".join(bad))
    return AlphaRecovery(alpha, theta, sol.pivots)
