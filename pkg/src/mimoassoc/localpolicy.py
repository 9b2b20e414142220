"""Per-BS gamma-fair resource split among a cell's attached users.

Given member rates R_k and a stream budget S, the cell solves
maximize sum_k phi_gamma(alpha_k R_k) subject to sum_k alpha_k <= S and
0 <= alpha_k <= 1.  The optimum has a water-filling closed form: users with
large R^(rho-1) saturate at alpha = 1 and the rest share the remaining
streams proportionally to R^(rho-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FairnessParam


@dataclass
class CellAllocation:
    """Resource split of one cell; alpha_in_cell aligns with members."""

    bs_id: int
    members: tuple           # user ids, in the caller's order
    alpha_in_cell: np.ndarray
    k_star: int              # 1-based pivot in the sorted order; n+1 when nobody is constrained

    def total(self) -> float:
        return float(np.sum(self.alpha_in_cell))


def local_alpha(cell_rates, streams: int, gamma: float, member_ids=None,
                bs_id: int = -1) -> CellAllocation:
    """Closed-form optimal activity fractions for one cell.

    Members are ranked by R^(rho-1) non-increasing (ties to the lower user
    id).  The pivot k* is the first rank at which the proportional share of
    the remaining budget stops exceeding 1; earlier ranks saturate at 1.
    """
    rates = np.asarray(cell_rates, dtype=float)
    n = rates.shape[0]
    if n == 0:
        raise ValueError("cell has no members")
    if np.any(rates <= 0):
        raise ValueError("member rates must be positive")
    if streams <= 0:
        raise ValueError("stream budget must be positive")
    rho = FairnessParam(gamma).rho
    ids = np.arange(n) if member_ids is None else np.asarray(member_ids)

    if n <= streams:
        # more streams than members: everyone is served on every slot
        return CellAllocation(bs_id, tuple(ids), np.ones(n), n + 1)

    pw = rates ** (rho - 1.0)
    order = np.lexsort((ids, -pw))
    pw_sorted = pw[order]
    suffix = np.cumsum(pw_sorted[::-1])[::-1]

    k_star = streams  # scan always terminates by k* = S
    for i in range(streams):
        # share of the remaining budget at pivot i (0-based; k* = i + 1)
        if suffix[i] / (streams - i) >= pw_sorted[i]:
            k_star = i + 1
            break
    i0 = k_star - 1
    alpha_sorted = np.ones(n)
    alpha_sorted[i0:] = (streams - i0) * pw_sorted[i0:] / suffix[i0]
    alpha = np.empty(n)
    alpha[order] = alpha_sorted
    return CellAllocation(bs_id, tuple(ids), alpha, k_star)


def heavy_load_holds(cell_rates, streams: int, rho: float) -> bool:
    """True when every member's unconstrained share S R^(rho-1) / sum R^(rho-1) is <= 1."""
    rates = np.asarray(cell_rates, dtype=float)
    if np.any(rates <= 0):
        raise ValueError("member rates must be positive")
    pw = rates ** (rho - 1.0)
    return bool(np.max(streams * pw / np.sum(pw)) <= 1.0 + 1e-12)


def local_throughputs(allocation: CellAllocation, cell_rates) -> np.ndarray:
    """Per-member throughputs alpha_k * R_k."""
    rates = np.asarray(cell_rates, dtype=float)
    if rates.shape[0] != len(allocation.members):
        raise ValueError("rate vector does not match the allocation's members")
    return allocation.alpha_in_cell * rates
