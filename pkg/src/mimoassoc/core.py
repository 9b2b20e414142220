"""Shared association domain: activity fractions, throughputs, fairness utility.

Activity fractions are plain (K, J) float arrays throughout the package;
alpha[k, j] is the long-run fraction of slots on which BS j serves user k.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DEFAULT_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class FairnessParam:
    """Fairness exponent gamma >= 1; gamma = 1 is proportional fairness."""

    gamma: float

    def __post_init__(self):
        if self.gamma < 1:
            raise ValueError("fairness exponent gamma must be >= 1")

    @property
    def rho(self) -> float:
        return 1.0 / self.gamma


def throughput_of(alpha: np.ndarray, rates: np.ndarray) -> np.ndarray:
    """Per-user throughputs r_k = sum_j alpha[k, j] * R[k, j]."""
    alpha = np.asarray(alpha, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if alpha.shape != rates.shape:
        raise ValueError(f"shape mismatch: alpha {alpha.shape} vs rates {rates.shape}")
    return (alpha * rates).sum(axis=1)


def utility(r: np.ndarray, gamma: float) -> float:
    """Fairness utility sum_k phi_gamma(r_k); -inf when any throughput is zero."""
    FairnessParam(gamma)  # validates gamma >= 1
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("throughputs must be nonnegative")
    if np.any(r == 0):
        return -math.inf
    if gamma == 1:
        return float(np.sum(np.log(r)))
    return float(np.sum(r ** (1 - gamma)) / (1 - gamma))


def sanitize_alpha(alpha, streams) -> np.ndarray:
    """Scale alpha down to exact feasibility.

    Solver outputs are feasible only within a tolerance; downstream passes
    that renormalize repeatedly need budgets to hold exactly.  Scaling is
    always downward and changes alpha by no more than its own infeasibility.
    """
    streams = np.asarray(streams, dtype=float)
    work = np.clip(np.asarray(alpha, dtype=float), 0.0, None)
    col = work.sum(axis=0)
    over = col > streams
    if over.any():
        work[:, over] *= streams[over] / col[over]
    row = work.sum(axis=1)
    over = row > 1.0
    if over.any():
        work[over] *= (1.0 / row[over])[:, None]
    return work


def feasibility_report(alpha: np.ndarray, streams: np.ndarray,
                       allowed: Optional[np.ndarray] = None,
                       tol: float = DEFAULT_FEAS_TOL) -> list:
    """List of violated association constraints; empty iff alpha is feasible.

    Checks, within absolute tolerance tol: alpha >= 0, per-BS column sums
    <= S_j, per-user row sums <= 1, and zero activity on disallowed pairs.
    """
    alpha = np.asarray(alpha, dtype=float)
    streams = np.asarray(streams, dtype=float)
    violations = []
    neg = np.argwhere(alpha < -tol)
    for k, j in neg:
        violations.append(f"alpha[{k},{j}] = {alpha[k, j]:.3g} is negative")
    col = alpha.sum(axis=0)
    for j in np.nonzero(col > streams + tol)[0]:
        violations.append(f"BS {j} column sum {col[j]:.12g} exceeds S_j = {streams[j]:g}")
    row = alpha.sum(axis=1)
    for k in np.nonzero(row > 1 + tol)[0]:
        violations.append(f"user {k} row sum {row[k]:.12g} exceeds 1")
    if allowed is not None:
        bad = np.argwhere((~np.asarray(allowed, dtype=bool)) & (alpha > tol))
        for k, j in bad:
            violations.append(f"alpha[{k},{j}] > 0 on a disallowed pair")
    return violations


@dataclass
class Partition:
    """Unique association: every user attached to exactly one BS."""

    assoc: np.ndarray  # (K,) BS index per user

    def __post_init__(self):
        self.assoc = np.asarray(self.assoc, dtype=int)

    @property
    def n_users(self) -> int:
        return self.assoc.shape[0]

    def cells(self, n_bs: int) -> dict:
        """BS index -> sorted list of attached user indices."""
        out = {j: [] for j in range(n_bs)}
        for k, j in enumerate(self.assoc):
            out[int(j)].append(k)
        return out

    def validate(self, n_bs: int, allowed: Optional[np.ndarray] = None) -> None:
        if np.any(self.assoc < 0) or np.any(self.assoc >= n_bs):
            raise ValueError("association targets outside the BS index range")
        if allowed is not None:
            allowed = np.asarray(allowed, dtype=bool)
            for k, j in enumerate(self.assoc):
                if not allowed[k, j]:
                    raise ValueError(f"user {k} attached to disallowed BS {j}")


def partition_to_alpha(partition: Partition, allocations: dict, n_bs: int) -> np.ndarray:
    """Expand per-cell allocations into a full (K, J) activity-fraction matrix.

    ``allocations`` maps BS index -> CellAllocation for that BS's members
    (see localpolicy); columns of empty cells stay zero.
    """
    K = partition.n_users
    alpha = np.zeros((K, n_bs))
    for j, cell in allocations.items():
        for k, a in zip(cell.members, cell.alpha_in_cell):
            if partition.assoc[k] != j:
                raise ValueError(f"allocation of BS {j} lists user {k} not attached to it")
            alpha[k, j] = a
    return alpha


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

def save_alpha(alpha: np.ndarray, path, user_ids=None, bs_ids=None) -> None:
    alpha = np.asarray(alpha, dtype=float)
    K, J = alpha.shape
    user_ids = list(range(K)) if user_ids is None else list(user_ids)
    bs_ids = list(range(J)) if bs_ids is None else list(bs_ids)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["user_id"] + [str(b) for b in bs_ids])
        for k in range(K):
            w.writerow([str(user_ids[k])] + [f"{x:.12g}" for x in alpha[k]])


def load_alpha(path) -> np.ndarray:
    with open(path, newline="") as f:
        r = csv.reader(f)
        next(r)
        rows = [[float(x) for x in line[1:]] for line in r]
    return np.array(rows)


def save_throughputs(r: np.ndarray, path, user_ids=None) -> None:
    r = np.asarray(r, dtype=float)
    user_ids = list(range(r.shape[0])) if user_ids is None else list(user_ids)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["user_id", "throughput"])
        for k, x in zip(user_ids, r):
            w.writerow([str(k), f"{x:.12g}"])


def load_throughputs(path) -> np.ndarray:
    with open(path, newline="") as f:
        r = csv.reader(f)
        next(r)
        return np.array([float(line[1]) for line in r])


def save_partition(p: Partition, path, user_ids=None, bs_ids=None) -> None:
    user_ids = list(range(p.n_users)) if user_ids is None else list(user_ids)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["user_id", "bs_id"])
        for k, j in enumerate(p.assoc):
            bid = j if bs_ids is None else bs_ids[j]
            w.writerow([str(user_ids[k]), str(bid)])


def load_partition(path) -> Partition:
    with open(path, newline="") as f:
        r = csv.reader(f)
        next(r)
        return Partition(np.array([int(line[1]) for line in r]))
