"""Realize fractional activity matrices as time-shared integer schedules.

Any feasible activity matrix is a convex combination of integer scheduling
configurations (0/1 matrices with at most one BS per user and at most S_j
users per BS).  The decomposition peels one configuration at a time: an
integer configuration agreeing with the currently tight users/BSs is found
by a max-flow with lower bounds on the support graph, the largest weight
keeping the remainder feasible is subtracted, and the remainder rescaled.
A deficit-rule interleaving then emits a slot sequence whose empirical
activity fractions converge to the target at rate (components / horizon).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from . import _kernels
from .core import feasibility_report, sanitize_alpha

SUPPORT_EPS = 1e-12   # entries below this are treated as structural zeros
TIGHT_TOL = 1e-7      # row/column sums this close to their bound count as tight
STOP_EPS = 1e-12      # residual mass below which peeling stops


def validate_integer_schedule(sigma: np.ndarray, streams) -> None:
    """Check the generalized-matching invariants exactly (integers, no tolerances)."""
    sigma = np.asarray(sigma)
    if not np.isin(sigma, (0, 1)).all():
        raise ValueError("schedule entries must be 0 or 1")
    if np.any(sigma.sum(axis=1) > 1):
        raise ValueError("a user is scheduled by more than one BS")
    if np.any(sigma.sum(axis=0) > np.asarray(streams)):
        raise ValueError("a BS exceeds its stream budget")


def extreme_config(alpha, streams, tol: float = TIGHT_TOL) -> np.ndarray:
    """Integer configuration supported on support(alpha) that serves every
    tight user exactly once and fills every tight BS to its stream budget.

    Found as a feasible integer flow: source -> user (capacity 1, lower
    bound 1 if the user's row sum is tight), user -> BS for support pairs
    (capacity 1), BS -> sink (capacity S_j, lower bound S_j if tight).  The
    association polytope is integral, so a feasible flow always exists for
    feasible alpha; infeasibility signals a bug in the caller.
    """
    alpha = np.asarray(alpha, dtype=float)
    K, J = alpha.shape
    s_int = np.asarray(streams)
    if np.any(np.abs(s_int - np.round(s_int)) > 0):
        raise ValueError("stream budgets must be integers")
    s_int = np.round(s_int).astype(np.int64)

    support = alpha > SUPPORT_EPS
    rows = alpha.sum(axis=1)
    cols = alpha.sum(axis=0)
    tight_user = rows >= 1.0 - tol
    tight_bs = cols >= s_int - tol

    # nodes: source, K users, J BSs, sink, then the circulation super pair
    src, snk = 0, K + J + 1
    ssrc, ssnk = K + J + 2, K + J + 3
    n = K + J + 4
    cap = np.zeros((n, n), dtype=np.int32)
    demand = np.zeros(n, dtype=np.int64)

    def add_edge(u, v, lower, upper):
        cap[u, v] += upper - lower
        demand[v] += lower
        demand[u] -= lower

    for k in range(K):
        add_edge(src, 1 + k, 1 if tight_user[k] else 0, 1)
    for k in range(K):
        for j in range(J):
            if support[k, j]:
                add_edge(1 + k, 1 + K + j, 0, 1)
    for j in range(J):
        lo = int(s_int[j]) if tight_bs[j] else 0
        add_edge(1 + K + j, snk, lo, int(s_int[j]))
    add_edge(snk, src, 0, K + 1)  # close the circulation

    total_demand = 0
    for v in range(n):
        if demand[v] > 0:
            cap[ssrc, v] = demand[v]
            total_demand += demand[v]
        elif demand[v] < 0:
            cap[v, ssnk] = -demand[v]

    if total_demand == 0:
        # no tight constraints: the empty configuration is valid
        return np.zeros((K, J), dtype=np.int64)

    res = maximum_flow(csr_matrix(cap), ssrc, ssnk)
    if res.flow_value != total_demand:
        raise RuntimeError("lower-bounded flow infeasible for a feasible alpha; "
                           "this indicates an internal invariant violation")
    flow = res.flow.toarray()
    sigma = np.zeros((K, J), dtype=np.int64)
    for k in range(K):
        for j in range(J):
            if support[k, j] and flow[1 + k, 1 + K + j] > 0:
                sigma[k, j] = 1
    validate_integer_schedule(sigma, s_int)
    return sigma


@dataclass
class ScheduleDecomposition:
    """Convex combination of integer scheduling configurations."""

    weights: list          # floats in (0, 1], summing to 1
    schedules: list        # matching list of (K, J) 0/1 integer arrays
    n_users: int
    n_bs: int

    def __len__(self):
        return len(self.weights)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.n_users, self.n_bs))
        for w, sig in zip(self.weights, self.schedules):
            out += w * sig
        return out


def decompose(alpha, streams, tol: float = TIGHT_TOL) -> ScheduleDecomposition:
    """Peel a feasible alpha into at most K*J + K + J + 1 integer configurations."""
    alpha0 = np.asarray(alpha, dtype=float)
    K, J = alpha0.shape
    streams = np.asarray(streams, dtype=float)
    bad = feasibility_report(alpha0, streams, tol=tol)
    if bad:
        raise ValueError("alpha is not feasible: " + "; ".join(bad))

    work = sanitize_alpha(alpha0, streams)
    weights, schedules = [], []
    mass = 1.0
    max_iter = K * J + K + J + 2
    for _ in range(max_iter):
        # drop numerical dust so near-unit peel steps cannot amplify it
        work[work <= SUPPORT_EPS] = 0.0
        if work.max(initial=0.0) <= STOP_EPS:
            break
        sigma = extreme_config(work, streams, tol)
        on = sigma == 1
        cands = [work[on].min()] if on.any() else []
        rows = work.sum(axis=1)
        cols = work.sum(axis=0)
        sig_rows = sigma.sum(axis=1)
        sig_cols = sigma.sum(axis=0)
        for k in range(K):
            if sig_rows[k] == 0 and rows[k] < 1.0 - tol:
                cands.append(1.0 - rows[k])
        for j in range(J):
            if sig_cols[j] < streams[j]:
                cands.append((streams[j] - cols[j]) / (streams[j] - sig_cols[j]))
        theta = min(min(cands), 1.0) if cands else 1.0
        if theta <= 0:
            raise RuntimeError("peeling stalled with a nonpositive step")
        if theta >= 1.0 - 1e-10:
            # the remainder mass is below reconstruction tolerance; absorb it
            weights.append(float(mass))
            schedules.append(sigma)
            mass = 0.0
            break
        weights.append(float(theta * mass))
        schedules.append(sigma)
        work = np.maximum(work - theta * sigma, 0.0) / (1.0 - theta)
        # a near-unit step amplifies rounding noise; rescale any budget
        # excess away (the correction is noise-sized times the leftover mass)
        work = sanitize_alpha(work, streams)
        mass *= 1.0 - theta
    else:
        raise RuntimeError(f"decomposition exceeded {max_iter} peeling steps")

    if mass > STOP_EPS or not weights:
        weights.append(float(mass) if weights else 1.0)
        schedules.append(np.zeros((K, J), dtype=np.int64))
    return ScheduleDecomposition(weights, schedules, K, J)


@dataclass
class ScheduleStream:
    """Slot-by-slot realization of a decomposition over a finite horizon."""

    decomposition: ScheduleDecomposition
    component_index: np.ndarray  # (T,) which component is active on each slot

    def __len__(self):
        return self.component_index.shape[0]

    def active_sets(self, t: int) -> dict:
        """BS index -> frozenset of users scheduled on slot t."""
        sig = self.decomposition.schedules[int(self.component_index[t])]
        return {j: frozenset(np.nonzero(sig[:, j])[0].tolist())
                for j in range(self.decomposition.n_bs)}

    def __iter__(self):
        cache = {}
        for t in range(len(self)):
            i = int(self.component_index[t])
            if i not in cache:
                cache[i] = self.active_sets(t)
            yield cache[i]

    def empirical_alpha(self) -> np.ndarray:
        counts = np.bincount(self.component_index, minlength=len(self.decomposition))
        out = np.zeros((self.decomposition.n_users, self.decomposition.n_bs))
        for c, sig in zip(counts, self.decomposition.schedules):
            if c:
                out += (c / len(self)) * sig
        return out


def schedule_stream(decomposition: ScheduleDecomposition, n_slots: int) -> ScheduleStream:
    """Deterministic low-discrepancy interleaving of the components."""
    if n_slots < 1:
        raise ValueError("need at least one slot")
    w = np.asarray(decomposition.weights, dtype=float)
    seq = _kernels.deficit_sequence(w, n_slots)
    return ScheduleStream(decomposition, seq)


# ---------------------------------------------------------------------------
# Serialization: header "K J n_components", then per component a weight line
# and a line of space-separated "k,j" support pairs (blank for the empty one).
# ---------------------------------------------------------------------------

def save_decomposition(dec: ScheduleDecomposition, path) -> None:
    with open(path, "w") as f:
        f.write(f"{dec.n_users} {dec.n_bs} {len(dec)}\n")
        for w, sig in zip(dec.weights, dec.schedules):
            f.write(f"{float(w)!r}\n")
            ks, js = np.nonzero(sig)
            f.write(" ".join(f"{k},{j}" for k, j in zip(ks, js)) + "\n")


def load_decomposition(path) -> ScheduleDecomposition:
    with open(path) as f:
        K, J, n = (int(x) for x in f.readline().split())
        weights, schedules = [], []
        for _ in range(n):
            weights.append(float(f.readline()))
            sig = np.zeros((K, J), dtype=np.int64)
            line = f.readline().strip()
            if line:
                for pair in line.split():
                    k, j = pair.split(",")
                    sig[int(k), int(j)] = 1
            schedules.append(sig)
    return ScheduleDecomposition(weights, schedules, K, J)
