"""Decentralized user-centric association game.

Users are the players; each BS splits its streams among attached users with
the gamma-fair local policy, so a user's payoff is its resulting throughput.
On every round each user compares its throughput against the best throughput
any other BS would promise it (computed as if it joined that cell) and, when
the best promise is a strict improvement, switches with probability pi.
Pure Nash equilibria are absorbing states of this chain.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Partition, utility
from .localpolicy import local_alpha


@dataclass
class GameState:
    partition: Partition
    pi: float = 0.1
    step_count: int = 0
    rng_seed: int = 0
    update_mode: str = "synchronous"   # or "sequential"

    def __post_init__(self):
        if not 0 < self.pi < 1:
            raise ValueError("switch probability must lie in (0, 1)")
        if self.update_mode not in ("synchronous", "sequential"):
            raise ValueError("update_mode must be 'synchronous' or 'sequential'")


@dataclass
class GameResult:
    converged: bool
    steps: int
    final: Partition
    throughputs: np.ndarray
    nash_certified: bool


def cell_throughputs(partition: Partition, rates, streams, gamma) -> np.ndarray:
    """Throughput of every user under its current cell's local policy."""
    rates = np.asarray(rates, dtype=float)
    K, J = rates.shape
    r = np.zeros(K)
    for j, members in partition.cells(J).items():
        if not members:
            continue
        cell = local_alpha(rates[members, j], int(streams[j]), gamma,
                           member_ids=members, bs_id=j)
        r[members] = cell.alpha_in_cell * rates[members, j]
    return r


def _promise(k: int, target_bs: int, members: list, rates, streams, gamma) -> float:
    """Throughput the target cell would give user k on top of ``members``."""
    s = int(streams[target_bs])
    if gamma == 1:
        # PF closed form: equal split of streams over the augmented cell
        share = min(1.0, s / (len(members) + 1))
        return float(share * rates[k, target_bs])
    aug = list(members) + [k]
    cell = local_alpha(rates[aug, target_bs], s, gamma, member_ids=aug,
                       bs_id=target_bs)
    return float(cell.alpha_in_cell[-1] * rates[k, target_bs])


def promised_throughput(k: int, target_bs: int, partition: Partition, rates,
                        streams, gamma) -> float:
    """Throughput BS ``target_bs`` would give user k if k joined its cell.

    Evaluated with the local policy on the augmented member set (current
    members plus k), i.e. the promise already accounts for the extra load.
    """
    rates = np.asarray(rates, dtype=float)
    if partition.assoc[k] == target_bs:
        raise ValueError("target BS must differ from the current association")
    members = np.nonzero(partition.assoc == target_bs)[0].tolist()
    return _promise(k, target_bs, members, rates, streams, gamma)


def _mask(rates, allowed):
    if allowed is None:
        return np.ones(rates.shape, dtype=bool)
    return np.asarray(allowed, dtype=bool)


@dataclass
class _RoundScan:
    r: np.ndarray          # current throughputs
    best_promise: np.ndarray
    best_target: np.ndarray


def _scan(partition: Partition, rates, streams, gamma, mask) -> _RoundScan:
    """Current throughputs plus each user's best alternative promise."""
    K, J = rates.shape
    cells = partition.cells(J)
    r = cell_throughputs(partition, rates, streams, gamma)
    best = np.full(K, -np.inf)
    target = np.full(K, -1, dtype=int)
    for k in range(K):
        for j in range(J):
            if j == partition.assoc[k] or not mask[k, j]:
                continue
            prom = _promise(k, j, cells[j], rates, streams, gamma)
            if prom > best[k]:  # strict keeps the lowest BS index on ties
                best[k] = prom
                target[k] = j
    return _RoundScan(r, best, target)


def step_synchronous(state: GameState, rates, streams, gamma, rng,
                     allowed=None, scan: Optional[_RoundScan] = None):
    """One synchronous round; every improvable user flips its own pi-coin.

    Returns (new state, number of switches).
    """
    rates = np.asarray(rates, dtype=float)
    mask = _mask(rates, allowed)
    K = rates.shape[0]
    if scan is None:
        scan = _scan(state.partition, rates, streams, gamma, mask)
    coins = rng.random(K)
    assoc = state.partition.assoc.copy()
    movers = (scan.best_target >= 0) & (scan.best_promise > scan.r) & (coins < state.pi)
    assoc[movers] = scan.best_target[movers]
    new = GameState(Partition(assoc), state.pi, state.step_count + 1,
                    state.rng_seed, state.update_mode)
    return new, int(movers.sum())


def step_sequential(state: GameState, rates, streams, gamma, rng,
                    allowed=None, scan: Optional[_RoundScan] = None):
    """One asynchronous step: a single uniformly chosen user may switch."""
    rates = np.asarray(rates, dtype=float)
    mask = _mask(rates, allowed)
    K = rates.shape[0]
    if scan is None:
        scan = _scan(state.partition, rates, streams, gamma, mask)
    k = int(rng.integers(K))
    coin = rng.random()
    assoc = state.partition.assoc.copy()
    switches = 0
    if scan.best_target[k] >= 0 and scan.best_promise[k] > scan.r[k] and coin < state.pi:
        assoc[k] = scan.best_target[k]
        switches = 1
    new = GameState(Partition(assoc), state.pi, state.step_count + 1,
                    state.rng_seed, state.update_mode)
    return new, switches


def is_nash(partition: Partition, rates, streams, gamma, allowed=None):
    """(certified, witness): no user can strictly improve by moving alone.

    On failure the witness is a violating (user, target BS) pair.
    """
    rates = np.asarray(rates, dtype=float)
    scan = _scan(partition, rates, streams, gamma, _mask(rates, allowed))
    bad = np.nonzero(scan.best_promise > scan.r)[0]
    if bad.size:
        k = int(bad[0])
        return False, (k, int(scan.best_target[k]))
    return True, None


def run(state: GameState, rates, streams, gamma, max_steps: int = 10_000,
        allowed=None, trace_path=None) -> GameResult:
    """Iterate the switching dynamics until Nash certification or max_steps.

    Non-convergence within max_steps is a valid outcome (converged=False);
    the chain provably reaches an equilibrium for gamma = 1 but is only
    conjectured to for general gamma.
    """
    if max_steps < 1:
        raise ValueError("need at least one step")
    rates = np.asarray(rates, dtype=float)
    mask = _mask(rates, allowed)
    rng = np.random.default_rng(state.rng_seed)
    step_fn = step_synchronous if state.update_mode == "synchronous" else step_sequential

    rows = []
    scan = _scan(state.partition, rates, streams, gamma, mask)
    nash = not np.any(scan.best_promise > scan.r)
    if trace_path is not None:
        rows.append((0, 0, utility(scan.r, gamma), nash))
    steps = 0
    while not nash and steps < max_steps:
        state, switches = step_fn(state, rates, streams, gamma, rng, allowed, scan)
        steps += 1
        scan = _scan(state.partition, rates, streams, gamma, mask)
        nash = not np.any(scan.best_promise > scan.r)
        if trace_path is not None:
            rows.append((steps, switches, utility(scan.r, gamma), nash))

    if trace_path is not None:
        with open(trace_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["round", "switches", "utility", "nash"])
            for step, sw, u, flag in rows:
                w.writerow([step, sw, f"{u:.12g}", int(flag)])

    return GameResult(converged=nash, steps=steps, final=state.partition,
                      throughputs=scan.r, nash_certified=nash)


def enumerate_nash(rates, streams, gamma, allowed=None, limit: int = 10 ** 6) -> list:
    """Exhaustively scan all joint actions and return every pure Nash partition."""
    rates = np.asarray(rates, dtype=float)
    mask = _mask(rates, allowed)
    K, J = rates.shape
    choices = [np.nonzero(mask[k])[0] for k in range(K)]
    size = 1
    for c in choices:
        size *= len(c)
        if size > limit:
            raise ValueError(f"joint action space exceeds {limit} states")
    found = []
    for assoc in itertools.product(*choices):
        part = Partition(np.array(assoc))
        ok, _ = is_nash(part, rates, streams, gamma, allowed)
        if ok:
            found.append(part)
    return found
