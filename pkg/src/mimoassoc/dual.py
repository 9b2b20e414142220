"""Centralized network-utility maximization via the dual subgradient method.

The NUM over activity fractions is solved in the dual: one price p_j per BS
stream budget and one price lambda_k per user airtime budget.  Each iteration
routes every user to the BS maximizing R / (p + lambda) and nudges prices
along the subgradient with diminishing steps a / (b + i).  Optimal user
throughputs follow from the prices in closed form; the activity fractions
are recovered separately (see lp.recover_alpha).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels
from .core import FairnessParam, Partition, throughput_of

SUPPORT_RATIO_TOL = 1e-6  # bang-per-buck ties within this ratio count as the argmax set
PRICE_FLOOR = 1e-3        # BS prices are projected onto [PRICE_FLOOR, inf)


@dataclass
class DualState:
    p: np.ndarray            # (J,) BS prices, >= 0
    lam: np.ndarray          # (K,) user prices, >= 0
    iter: int = 0
    step_a: float = 1.0
    step_b: float = 10.0
    best_dual: float = math.inf

    def step_size(self) -> float:
        return self.step_a / (self.step_b + self.iter)


def _allowed_mask(rates: np.ndarray, allowed) -> np.ndarray:
    if allowed is None:
        return np.ones(rates.shape, dtype=bool)
    allowed = np.asarray(allowed, dtype=bool)
    if allowed.shape != rates.shape:
        raise ValueError("allowed mask shape mismatch")
    if not allowed.any(axis=1).all():
        raise ValueError("every user needs at least one allowed BS")
    return allowed


def dual_objective(p, lam, rates, streams, gamma, allowed=None) -> float:
    """Value of the dual function at prices (p, lam); upper-bounds the primal utility."""
    rho = FairnessParam(gamma).rho
    rates = np.asarray(rates, dtype=float)
    mask = _allowed_mask(rates, allowed)
    p = np.asarray(p, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(p < 0) or np.any(lam < 0):
        raise ValueError("prices must be nonnegative")
    den = p[None, :] + lam[:, None]
    ratio = np.where(mask, den / rates, np.inf)
    beta = ratio.min(axis=1)
    if np.any(beta <= 0):
        raise ValueError("dual objective unbounded: some beta_k is zero "
                         "(a user sees zero total price)")
    if gamma == 1:
        phi_star = -np.log(beta) - 1.0
    else:
        phi_star = beta ** (1.0 - rho) / (rho - 1.0)
    return float(np.dot(streams, p) + lam.sum() + phi_star.sum())


def _argmax_bs(p, lam, rates, mask):
    """Per-user argmax of R / (p + lambda); ties go to the lowest BS index."""
    den = p[None, :] + lam[:, None]
    if np.any(den[mask] <= 0):
        raise ZeroDivisionError("price sum p_j + lambda_k hit zero")
    w = np.where(mask, rates / den, -np.inf)
    return np.argmax(w, axis=1)


def subgradient_step(state: DualState, rates, streams, gamma, allowed=None,
                     price_floor: float = PRICE_FLOOR) -> DualState:
    """One projected subgradient iteration (numpy reference implementation).

    BS prices are kept at or above ``price_floor``: with slack user budgets
    an exactly-zero price would make the dual value blow up and the next
    subgradient unbounded."""
    rho = FairnessParam(gamma).rho
    rates = np.asarray(rates, dtype=float)
    streams = np.asarray(streams, dtype=float)
    mask = _allowed_mask(rates, allowed)
    K, J = rates.shape
    s = state.step_size()

    jk = _argmax_bs(state.p, state.lam, rates, mask)
    rows = np.arange(K)
    den_sel = state.p[jk] + state.lam
    g = rates[rows, jk] ** (rho - 1.0) / den_sel ** rho

    grad_p = np.bincount(jk, weights=g, minlength=J) - streams
    p_new = np.maximum(state.p + s * grad_p, price_floor)
    lam_new = np.maximum(state.lam + s * (g - 1.0), 0.0)
    d = dual_objective(p_new, lam_new, rates, streams, gamma, allowed)
    return replace(state, p=p_new, lam=lam_new, iter=state.iter + 1,
                   best_dual=min(state.best_dual, d))


def throughputs_from_prices(p, lam, rates, gamma, allowed=None) -> np.ndarray:
    """Optimal throughputs r_k = (max_j R / (p + lambda))^rho at given prices."""
    rho = FairnessParam(gamma).rho
    rates = np.asarray(rates, dtype=float)
    mask = _allowed_mask(rates, allowed)
    den = np.asarray(p, dtype=float)[None, :] + np.asarray(lam, dtype=float)[:, None]
    if np.any(den[mask] <= 0):
        raise ZeroDivisionError("price sum p_j + lambda_k hit zero")
    w = np.where(mask, rates / den, -np.inf)
    return w.max(axis=1) ** rho


def solve_dual(rates, streams, gamma, i_max: int = 200_000, a: float = 1.0,
               b: float = 10.0, init: float = 1.0, allowed=None,
               early_stop: bool = False, early_stop_window: int = 1000,
               early_stop_tol: float = 1e-10, trace_path=None,
               trace_every: int = 100, price_floor: float = PRICE_FLOOR):
    """Run the dual subgradient method and return (DualState, throughputs).

    Prices start at the positive constant ``init`` (or arrays of matching
    shape).  When ``trace_path`` is given, a convergence trace CSV with rows
    (iteration, dual, best_dual, max_price_change) is written every
    ``trace_every`` iterations.
    """
    if i_max < 1:
        raise ValueError("need at least one iteration")
    rho = FairnessParam(gamma).rho
    rates = np.asarray(rates, dtype=float)
    streams = np.asarray(streams, dtype=float)
    mask = _allowed_mask(rates, allowed)
    K, J = rates.shape
    if np.any(rates[mask] <= 0):
        raise ValueError("rates must be positive on allowed pairs")

    p = np.full(J, float(init)) if np.isscalar(init) else np.asarray(init[0], dtype=float).copy()
    lam = np.full(K, float(init)) if np.isscalar(init) else np.asarray(init[1], dtype=float).copy()
    if np.any(p <= 0) or np.any(lam <= 0):
        raise ValueError("initial prices must be strictly positive")

    rpow = rates ** (rho - 1.0)
    want_trace = trace_path is not None
    n_rows = (i_max // trace_every + 1) if want_trace else 1
    trace = np.zeros((n_rows, 4))
    done, best, n_trace = _kernels.dual_iterations(
        rates, rpow, mask, streams, rho, gamma == 1.0, p, lam, 0, i_max,
        a, b, math.inf, trace_every if want_trace else 0, trace,
        early_stop, early_stop_window, early_stop_tol, price_floor)

    if want_trace:
        with open(trace_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["iteration", "dual", "best_dual", "max_price_change"])
            for row in trace[:n_trace]:
                w.writerow([int(row[0])] + [f"{x:.12g}" for x in row[1:]])

    state = DualState(p=p, lam=lam, iter=done, step_a=a, step_b=b, best_dual=best)
    return state, throughputs_from_prices(p, lam, rates, gamma, allowed)


# ---------------------------------------------------------------------------
# KKT diagnostics
# ---------------------------------------------------------------------------

@dataclass
class KktReport:
    bang_per_buck_gap: np.ndarray   # (K,) relative gap between r_k and the best offer
    support_residual: np.ndarray    # (K,) activity mass outside the argmax BS set
    slackness_bs: np.ndarray        # (J,) normalized complementary slackness p_j (sum - S_j)
    slackness_user: np.ndarray      # (K,) normalized complementary slackness lam_k (sum - 1)
    max_residual: float


def kkt_report(alpha, p, lam, rates, streams, gamma, tol: float = 1e-9,
               allowed=None) -> KktReport:
    """Measure how far (alpha, p, lam) sit from the optimality conditions.

    Residuals are normalized: the throughput condition relative to the best
    bang-per-buck offer, the slackness terms relative to max(1, price scale).
    """
    rho = FairnessParam(gamma).rho
    rates = np.asarray(rates, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    p = np.asarray(p, dtype=float)
    lam = np.asarray(lam, dtype=float)
    streams = np.asarray(streams, dtype=float)
    mask = _allowed_mask(rates, allowed)

    den = p[None, :] + lam[:, None]
    w = np.where(mask & (den > 0), rates / np.where(den > 0, den, 1.0), np.inf)
    w = np.where(mask, w, -np.inf)
    wmax = w.max(axis=1)
    bpb = wmax ** rho
    r = throughput_of(alpha, rates)
    bang_gap = np.abs(r - bpb) / np.maximum(np.abs(bpb), 1e-300)

    in_support = w >= (1.0 - SUPPORT_RATIO_TOL) * wmax[:, None]
    support_res = np.where(~in_support, alpha, 0.0).sum(axis=1)

    col = alpha.sum(axis=0)
    row = alpha.sum(axis=1)
    slack_bs = np.abs(p * (col - streams)) / np.maximum(1.0, p * streams)
    slack_user = np.abs(lam * (row - 1.0)) / np.maximum(1.0, lam)

    max_res = max(bang_gap.max(initial=0.0), support_res.max(initial=0.0),
                  slack_bs.max(initial=0.0), slack_user.max(initial=0.0))
    return KktReport(bang_gap, support_res, slack_bs, slack_user, float(max_res))


def polish_prices(p, lam, rates, streams, gamma, allowed=None,
                  max_iter: int = 400):
    """Sharpen subgradient prices by minimizing the dual in epigraph form.

    The dual objective contains beta_k = min_j (p_j + lam_k) / R_{k,j};
    lifting beta into explicit variables turns the problem into a smooth
    convex program with linear constraints, which scipy's SLSQP drives to
    high accuracy from the subgradient warm start.  Returns (p, lam), or
    None when the result fails to improve the dual value (the caller keeps
    the unpolished prices).
    """
    from scipy.optimize import minimize

    rho = FairnessParam(gamma).rho
    rates = np.asarray(rates, dtype=float)
    streams = np.asarray(streams, dtype=float)
    mask = _allowed_mask(rates, allowed)
    p = np.asarray(p, dtype=float)
    lam = np.asarray(lam, dtype=float)
    K, J = rates.shape
    nv = J + 2 * K

    den = p[None, :] + lam[:, None]
    beta0 = np.where(mask, den / rates, np.inf).min(axis=1)
    x0 = np.concatenate([p, lam, np.maximum(beta0, 1e-12)])

    def fg(x):
        pv, lv, beta = x[:J], x[J:J + K], np.maximum(x[J + K:], 1e-300)
        if gamma == 1:
            phi = -np.log(beta) - 1.0
            dphi = -1.0 / beta
        else:
            phi = beta ** (1.0 - rho) / (rho - 1.0)
            dphi = (1.0 - rho) / (rho - 1.0) * beta ** -rho
        f = float(streams @ pv + lv.sum() + phi.sum())
        return f, np.concatenate([streams, np.ones(K), dphi])

    pairs = [(k, j) for k in range(K) for j in range(J) if mask[k, j]]
    A = np.zeros((len(pairs), nv))
    for i, (k, j) in enumerate(pairs):
        A[i, j] = 1.0
        A[i, J + k] = 1.0
        A[i, J + K + k] = -rates[k, j]
    constraints = [{"type": "ineq", "fun": lambda x: A @ x, "jac": lambda x: A}]
    bounds = [(0.0, None)] * (J + K) + [(1e-14, None)] * K

    with np.errstate(all="ignore"):
        res = minimize(fg, x0, jac=True, method="SLSQP", bounds=bounds,
                       constraints=constraints,
                       options={"maxiter": max_iter, "ftol": 1e-16})
    p_new = np.maximum(res.x[:J], 0.0)
    lam_new = np.maximum(res.x[J:J + K], 0.0)
    if not (np.all(np.isfinite(p_new)) and np.all(np.isfinite(lam_new))):
        return None
    try:
        before = dual_objective(p, lam, rates, streams, gamma, allowed)
        after = dual_objective(p_new, lam_new, rates, streams, gamma, allowed)
    except (ValueError, ZeroDivisionError):
        return None
    if not after <= before + 1e-9 * max(1.0, abs(before)):
        return None
    return p_new, lam_new


def closed_form_unique_prices(partition: Partition, rates, streams, rho: float):
    """Optimal dual prices for a unique association in the heavy-load regime.

    p_j = ((1/S_j) sum_{k in cell j} R_{k,j}^(rho-1))^(1/rho) and lambda = 0.
    Empty cells get price zero.
    """
    rates = np.asarray(rates, dtype=float)
    streams = np.asarray(streams, dtype=float)
    K, J = rates.shape
    p = np.zeros(J)
    for j, members in partition.cells(J).items():
        if members:
            load = sum(rates[k, j] ** (rho - 1.0) for k in members)
            p[j] = (load / streams[j]) ** (1.0 / rho)
    return p, np.zeros(K)
