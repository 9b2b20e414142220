"""Benchmark harness: baseline association, throughput statistics, and
multi-realization comparisons of the centralized optimum, the decentralized
game, and max-peak-rate association.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Partition, sanitize_alpha, throughput_of, utility
from .dual import dual_objective, polish_prices, solve_dual, throughputs_from_prices
from .game import GameState, cell_throughputs, run as run_game
from .lp import recover_alpha_ladder
from .phy import (PilotPolicy, Precoder, allocate_pilots, rate_matrix,
                  rate_model_params)
from .topology import (Experiment1Params, Hetnet3gppParams, NetworkTopology,
                       gain_matrix, gen_experiment1, gen_hetnet_3gpp)

ALGORITHMS = ("centralized", "distributed", "maxrate")


@dataclass(frozen=True)
class ThroughputStats:
    p5: float
    geo_mean: float
    arith_mean: float


def stats(throughputs) -> ThroughputStats:
    """Nearest-rank 5th percentile, geometric mean, arithmetic mean."""
    r = np.asarray(throughputs, dtype=float)
    if r.size == 0:
        raise ValueError("empty throughput vector")
    if np.any(r <= 0):
        raise ValueError("throughputs must be positive for the statistics")
    srt = np.sort(r)
    rank = max(1, math.ceil(0.05 * r.size))  # 1-based nearest rank
    p5 = float(srt[rank - 1])
    geo = float(np.exp(np.mean(np.log(r))))
    arith = float(np.mean(r))
    assert geo <= arith * (1 + 1e-12), "AM-GM violated; numerical corruption"
    return ThroughputStats(p5, geo, arith)


def max_peak_rate_assoc(rates, allowed=None) -> Partition:
    """Attach every user to its highest-rate allowed BS (ties to the lowest id)."""
    rates = np.asarray(rates, dtype=float)
    if allowed is not None:
        rates = np.where(np.asarray(allowed, dtype=bool), rates, -np.inf)
    return Partition(np.argmax(rates, axis=1))


def load_profile(partition: Partition, topology: NetworkTopology) -> dict:
    """Per-tier user counts, sorted in decreasing load order within each tier."""
    counts = np.bincount(partition.assoc, minlength=topology.n_bs)
    out: dict = {}
    for j, bs in enumerate(topology.base_stations):
        out.setdefault(bs.tier.value, []).append(int(counts[j]))
    return {tier: sorted(v, reverse=True) for tier, v in out.items()}


# ---------------------------------------------------------------------------
# Per-realization pipeline
# ---------------------------------------------------------------------------

def scaled_exp1_params() -> Experiment1Params:
    """Desk-scale variant of the rectangular layout: 1 macro, 10 small cells,
    around a hundred users.  The region shrinks with the cell count so the
    small-cell density (and with it the congestion-limited throughput tail)
    matches the full layout."""
    return Experiment1Params(region_width=600.0, region_height=600.0, n_small=10,
                             bg_density=1.0e-4, hot_density=6.0e-4, hot_radius=200.0,
                             macro_positions=((300.0, 300.0),))


def scaled_hetnet_params() -> Hetnet3gppParams:
    """Desk-scale hot-zone layout: 3 macro sites."""
    return Hetnet3gppParams(n_macro_sites=3, users_per_zone=10, n_background_users=20)


def default_pilot_policy(topology: NetworkTopology) -> PilotPolicy:
    return (PilotPolicy.HOT_ZONE_REUSE if topology.zone_of is not None
            else PilotPolicy.SHARED_PER_TIER)


def build_rates(topology: NetworkTopology, precoder: Precoder = Precoder.ZFBF,
                pilot_policy: Optional[PilotPolicy] = None):
    """(rates, allowed mask, streams) for a topology with default link budget."""
    policy = pilot_policy or default_pilot_policy(topology)
    plan = allocate_pilots(topology, policy)
    gains = gain_matrix(topology)
    params = rate_model_params(topology, precoder=precoder)
    rm = rate_matrix(topology, gains, plan, params)
    return rm.values, topology.allowed_mask(), topology.streams_array()


DUAL_POLISH_MAX_PAIRS = 600  # above this, the epigraph NLP becomes too slow


def run_centralized(rates, streams, gamma, allowed=None, i_max: int = 200_000,
                    a: float = 1.0, b: float = 10.0, early_stop: bool = True,
                    polish: bool = True, trace_path=None):
    """Dual solve, size-appropriate polish, and primal recovery.

    Small instances sharpen the subgradient prices by minimizing the dual
    in epigraph form, which tightens the theta and KKT certificates by
    several orders of magnitude.  Large instances instead refine the
    recovered activity matrix by projected-gradient ascent of the (convex)
    utility, which is what the benchmark comparisons need.
    Returns (throughputs, alpha, state, recovery).
    """
    from dataclasses import replace

    from . import _kernels

    rates = np.asarray(rates, dtype=float)
    streams = np.asarray(streams, dtype=float)
    K, J = rates.shape
    small = K * J <= DUAL_POLISH_MAX_PAIRS

    state, r_star = solve_dual(rates, streams, gamma, i_max=i_max, a=a, b=b,
                               allowed=allowed, early_stop=early_stop,
                               trace_path=trace_path)
    if polish and small:
        pol = polish_prices(state.p, state.lam, rates, streams, gamma, allowed)
        if pol is not None:
            p_new, lam_new = pol
            d = dual_objective(p_new, lam_new, rates, streams, gamma, allowed)
            if d <= state.best_dual + 1e-9 * max(1.0, abs(state.best_dual)):
                state = replace(state, p=p_new, lam=lam_new,
                                best_dual=min(state.best_dual, d))
                r_star = throughputs_from_prices(p_new, lam_new, rates, gamma,
                                                 allowed)
    ratios = (1e-6, 1e-4, 1e-2, None) if small else (1e-6, 1e-4, 1e-2)
    rec = recover_alpha_ladder(rates, r_star, streams, allowed=allowed,
                               prices=(state.p, state.lam), ratios=ratios)
    alpha = rec.alpha
    if polish and not small:
        mask = (np.ones((K, J), dtype=bool) if allowed is None
                else np.asarray(allowed, dtype=bool))
        refined = alpha.copy()
        f_prev = -np.inf
        for _ in range(6):  # each round restarts the step size after a stall
            refined, f = _kernels.pg_ascent(refined, rates, streams, mask,
                                            float(gamma), 4000, 48)
            if f - f_prev < 1e-9 * (1.0 + abs(f)):
                break
            f_prev = f
        refined = sanitize_alpha(refined, streams)
        if utility(throughput_of(refined, rates), gamma) > \
                utility(throughput_of(alpha, rates), gamma):
            alpha = refined
    return throughput_of(alpha, rates), alpha, state, rec


def run_distributed(rates, streams, gamma, allowed=None, seed: int = 0,
                    pi: float = 0.1, max_steps: int = 10_000):
    """Game dynamics from the max-peak-rate cold start; returns GameResult."""
    start = max_peak_rate_assoc(rates, allowed)
    state = GameState(start, pi=pi, rng_seed=seed)
    return run_game(state, rates, streams, gamma, max_steps=max_steps, allowed=allowed)


def run_maxrate(rates, streams, gamma, allowed=None):
    """Max-peak-rate association with the local fairness policy on top."""
    part = max_peak_rate_assoc(rates, allowed)
    return cell_throughputs(part, rates, streams, gamma), part


@dataclass
class ExperimentReport:
    stats_rows: list = field(default_factory=list)   # (seed, algorithm, p5, geo, arith)
    gain_rows: list = field(default_factory=list)    # (seed, statistic, ratio)
    load_rows: list = field(default_factory=list)    # (seed, algorithm, bs_id, tier, count)
    game_rows: list = field(default_factory=list)    # (seed, converged, steps)

    def stat(self, seed, algorithm) -> ThroughputStats:
        for s, alg, p5, geo, am in self.stats_rows:
            if s == seed and alg == algorithm:
                return ThroughputStats(p5, geo, am)
        raise KeyError((seed, algorithm))

    def write_csvs(self, outdir) -> None:
        import os
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "stats.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["seed", "algorithm", "p5", "geo_mean", "arith_mean"])
            for s, alg, p5, geo, am in self.stats_rows:
                w.writerow([s, alg, f"{p5:.12g}", f"{geo:.12g}", f"{am:.12g}"])
        with open(os.path.join(outdir, "gains.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["seed", "statistic", "ratio"])
            for s, stat_name, ratio in self.gain_rows:
                w.writerow([s, stat_name, f"{ratio:.12g}"])
        with open(os.path.join(outdir, "loads.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["seed", "algorithm", "bs_id", "tier", "count"])
            for row in self.load_rows:
                w.writerow(list(row))


def _game_seed(seed: int) -> int:
    return int(np.random.SeedSequence([seed, 7]).generate_state(1)[0])


def _run_one(layout_gen: Callable, gamma: float, algorithms, precoder, pilot_policy,
             pi: float, i_max: int, max_steps: int, early_stop: bool, seed: int):
    topology = layout_gen(seed)
    rates, allowed, streams = build_rates(topology, precoder, pilot_policy)
    tiers = [b.tier.value for b in topology.base_stations]

    out = ExperimentReport()
    per_alg = {}
    for alg in algorithms:
        if alg == "centralized":
            r, _, _, _ = run_centralized(rates, streams, gamma, allowed,
                                         i_max=i_max, early_stop=early_stop)
            part = None
        elif alg == "distributed":
            res = run_distributed(rates, streams, gamma, allowed,
                                  seed=_game_seed(seed), pi=pi, max_steps=max_steps)
            r, part = res.throughputs, res.final
            out.game_rows.append((seed, res.converged, res.steps))
        elif alg == "maxrate":
            r, part = run_maxrate(rates, streams, gamma, allowed)
        else:
            raise ValueError(f"unknown algorithm {alg!r}")
        st = stats(r)
        per_alg[alg] = st
        out.stats_rows.append((seed, alg, st.p5, st.geo_mean, st.arith_mean))
        if part is not None:
            counts = np.bincount(part.assoc, minlength=topology.n_bs)
            for j in range(topology.n_bs):
                out.load_rows.append((seed, alg, j, tiers[j], int(counts[j])))

    if "distributed" in per_alg and "maxrate" in per_alg:
        d, m = per_alg["distributed"], per_alg["maxrate"]
        out.gain_rows.append((seed, "p5", d.p5 / m.p5))
        out.gain_rows.append((seed, "geo_mean", d.geo_mean / m.geo_mean))
        out.gain_rows.append((seed, "arith_mean", d.arith_mean / m.arith_mean))
    return out


def run_realizations(layout_gen: Callable, seeds: Sequence[int],
                     algorithms=ALGORITHMS, gamma: float = 1.0,
                     precoder: Precoder = Precoder.ZFBF,
                     pilot_policy: Optional[PilotPolicy] = None,
                     pi: float = 0.1, i_max: int = 200_000,
                     max_steps: int = 10_000, early_stop: bool = True,
                     jobs: int = 1) -> ExperimentReport:
    """Run the full pipeline on each seed; deterministic given the seed list.

    ``layout_gen`` maps a seed to a topology (e.g. partial(gen_experiment1,
    params)).  Results are merged in seed order regardless of ``jobs``.
    """
    if not seeds:
        raise ValueError("need at least one seed")
    worker = partial(_run_one, layout_gen, gamma, tuple(algorithms), precoder,
                     pilot_policy, pi, i_max, max_steps, early_stop)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(worker, seeds))
    else:
        parts = [worker(s) for s in seeds]

    report = ExperimentReport()
    for part in parts:
        report.stats_rows.extend(part.stats_rows)
        report.gain_rows.extend(part.gain_rows)
        report.load_rows.extend(part.load_rows)
        report.game_rows.extend(part.game_rows)
    return report


def exp1_layout(params: Optional[Experiment1Params] = None) -> Callable:
    return partial(gen_experiment1, params or Experiment1Params())


def hetnet_layout(params: Optional[Hetnet3gppParams] = None) -> Callable:
    return partial(gen_hetnet_3gpp, params or Hetnet3gppParams())
