"""Command-line pipeline: gen -> rates -> solve / game / decompose, plus the
multi-realization experiment harness.

Every command writes its outputs plus a run manifest (config hash, seed,
package version) into --out, and is idempotent given identical inputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from functools import partial

import numpy as np

from . import __version__
from .core import (load_alpha, save_alpha, save_partition, save_throughputs,
                   utility)
from .dual import kkt_report
from .experiments import (ALGORITHMS, default_pilot_policy, exp1_layout,
                          hetnet_layout, run_realizations, scaled_exp1_params,
                          scaled_hetnet_params)
from .game import GameState, run as run_game
from .phy import (PilotPolicy, Precoder, allocate_pilots, load_rate_matrix,
                  rate_matrix, rate_model_params, save_rate_matrix)
from .schedule import decompose, save_decomposition
from .topology import (Experiment1Params, Hetnet3gppParams, gain_matrix,
                       gen_experiment1, gen_hetnet_3gpp, load_topology,
                       save_topology)


def _load_config(path):
    if path is None:
        return {}
    with open(path) as f:
        return json.load(f)


def _write_manifest(outdir, command, config: dict, seed) -> None:
    canonical = json.dumps(config, sort_keys=True)
    manifest = {
        "command": command,
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "config": config,
        "seed": seed,
        "version": __version__,
    }
    with open(os.path.join(outdir, f"manifest_{command}.json"), "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")


def _layout_params(args, config):
    scale = config.get("scale", getattr(args, "scale", "full"))
    if args.layout == "exp1":
        base = scaled_exp1_params() if scale == "desk" else Experiment1Params()
        return base.__class__(**{**base.__dict__, **config.get("layout_params", {})})
    if args.layout == "hetnet3gpp":
        base = scaled_hetnet_params() if scale == "desk" else Hetnet3gppParams()
        return base.__class__(**{**base.__dict__, **config.get("layout_params", {})})
    raise ValueError(f"unknown layout {args.layout!r}")


def cmd_gen(args) -> int:
    config = _load_config(args.config)
    params = _layout_params(args, config)
    gen = gen_experiment1 if args.layout == "exp1" else gen_hetnet_3gpp
    topo = gen(params, args.seed)
    os.makedirs(args.out, exist_ok=True)
    save_topology(topo, os.path.join(args.out, "topology.json"))
    _write_manifest(args.out, "gen", {"layout": args.layout, **config}, args.seed)
    n_macro = sum(1 for b in topo.base_stations if b.tier.value == "macro")
    print(f"wrote topology.json: {topo.n_bs} BSs ({n_macro} macro, "
          f"{topo.n_bs - n_macro} small), {topo.n_users} users")
    return 0


def cmd_rates(args) -> int:
    config = _load_config(args.config)
    topo = load_topology(args.topology)
    policy = (default_pilot_policy(topo) if args.pilot_policy == "auto"
              else PilotPolicy(args.pilot_policy))
    plan = allocate_pilots(topo, policy)
    params = rate_model_params(topo, precoder=Precoder(args.precoder),
                               **config.get("rate_params", {}))
    rm = rate_matrix(topo, gain_matrix(topo), plan, params)
    os.makedirs(args.out, exist_ok=True)
    save_rate_matrix(rm, os.path.join(args.out, "rates.csv"),
                     bs_ids=[b.id for b in topo.base_stations],
                     user_ids=[u.id for u in topo.users])
    _write_manifest(args.out, "rates",
                    {"precoder": args.precoder, "pilot_policy": policy.value, **config},
                    topo.seed)
    print(f"wrote rates.csv: {rm.values.shape[0]} users x {rm.values.shape[1]} BSs, "
          f"Q={plan.num_pilots}, precoder={args.precoder}")
    return 0


def _load_inputs(args):
    topo = load_topology(args.topology)
    rm, _, _ = load_rate_matrix(args.rates)
    return topo, rm.values, topo.allowed_mask(), topo.streams_array()


def cmd_solve(args) -> int:
    config = _load_config(args.config)
    topo, rates, allowed, streams = _load_inputs(args)
    os.makedirs(args.out, exist_ok=True)
    from .experiments import run_centralized
    r_vec, alpha, state, rec = run_centralized(
        rates, streams, args.gamma, allowed, i_max=args.iters,
        a=args.step_a, b=args.step_b, early_stop=args.early_stop,
        polish=not args.no_polish,
        trace_path=os.path.join(args.out, "trace.csv"))
    rep = kkt_report(rec.alpha, state.p, state.lam, rates, streams, args.gamma,
                     allowed=allowed)
    save_alpha(alpha, os.path.join(args.out, "alpha.csv"))
    save_throughputs(r_vec, os.path.join(args.out, "r_star.csv"))
    with open(os.path.join(args.out, "prices.csv"), "w") as f:
        f.write("kind,index,value\n")
        for j, v in enumerate(state.p):
            f.write(f"p,{j},{v:.12g}\n")
        for k, v in enumerate(state.lam):
            f.write(f"lambda,{k},{v:.12g}\n")
    with open(os.path.join(args.out, "kkt.json"), "w") as f:
        json.dump({"max_residual": rep.max_residual, "theta_max": rec.theta_max,
                   "best_dual": state.best_dual,
                   "utility": utility(r_vec, args.gamma)}, f, indent=1)
        f.write("\n")
    _write_manifest(args.out, "solve",
                    {"gamma": args.gamma, "iters": args.iters, "a": args.step_a,
                     "b": args.step_b, **config}, topo.seed)
    print(f"solved: utility={utility(r_vec, args.gamma):.6g} best_dual={state.best_dual:.6g} "
          f"theta_max={rec.theta_max:.6g} kkt_residual={rep.max_residual:.3g}")
    return 0


def cmd_game(args) -> int:
    config = _load_config(args.config)
    topo, rates, allowed, streams = _load_inputs(args)
    os.makedirs(args.out, exist_ok=True)
    from .experiments import max_peak_rate_assoc
    if args.init == "maxrate":
        start = max_peak_rate_assoc(rates, allowed)
    else:
        rng = np.random.default_rng(args.seed)
        from .core import Partition
        choice = [rng.choice(np.nonzero(allowed[k])[0]) for k in range(rates.shape[0])]
        start = Partition(np.array(choice))
    state = GameState(start, pi=args.pi, rng_seed=args.seed, update_mode=args.mode)
    result = run_game(state, rates, streams, args.gamma, max_steps=args.max_steps,
                      allowed=allowed, trace_path=os.path.join(args.out, "trace.csv"))
    save_partition(result.final, os.path.join(args.out, "partition.csv"))
    save_throughputs(result.throughputs, os.path.join(args.out, "throughputs.csv"))
    _write_manifest(args.out, "game",
                    {"gamma": args.gamma, "pi": args.pi, "max_steps": args.max_steps,
                     "mode": args.mode, "init": args.init, **config}, args.seed)
    print(f"game: converged={result.converged} steps={result.steps} "
          f"utility={utility(result.throughputs, args.gamma):.6g}")
    return 0


def cmd_decompose(args) -> int:
    topo = load_topology(args.topology)
    alpha = load_alpha(args.alpha)
    dec = decompose(alpha, topo.streams_array())
    os.makedirs(args.out, exist_ok=True)
    save_decomposition(dec, os.path.join(args.out, "decomposition.txt"))
    err = float(np.max(np.abs(dec.reconstruct() - alpha)))
    _write_manifest(args.out, "decompose", {"alpha": os.path.basename(args.alpha)},
                    topo.seed)
    print(f"decomposed into {len(dec)} components, reconstruction error {err:.3g}")
    return 0


def cmd_experiment(args) -> int:
    config = _load_config(args.config)
    params = _layout_params(args, config)
    layout = (exp1_layout(params) if args.layout == "exp1" else hetnet_layout(params))
    seeds = list(range(args.seed, args.seed + args.n))
    report = run_realizations(layout, seeds, algorithms=tuple(args.algorithms.split(",")),
                              gamma=args.gamma, precoder=Precoder(args.precoder),
                              pi=args.pi, i_max=args.iters, max_steps=args.max_steps,
                              jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    report.write_csvs(args.out)
    _write_manifest(args.out, "experiment",
                    {"layout": args.layout, "gamma": args.gamma, "n": args.n,
                     "algorithms": args.algorithms, **config}, args.seed)
    print(f"experiment: {len(seeds)} realizations -> stats.csv, gains.csv, loads.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mimoassoc",
                                 description="user-cell association pipeline")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("gen", help="generate a network layout")
    common(p)
    p.add_argument("--layout", choices=["exp1", "hetnet3gpp"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", choices=["full", "desk"], default="full")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("rates", help="compute the deterministic rate matrix")
    common(p)
    p.add_argument("--topology", required=True)
    p.add_argument("--precoder", choices=[x.value for x in Precoder], default="zfbf")
    p.add_argument("--pilot-policy", choices=["auto"] + [x.value for x in PilotPolicy],
                   default="auto")
    p.set_defaults(fn=cmd_rates)

    p = sub.add_parser("solve", help="centralized optimum via dual subgradient")
    common(p)
    p.add_argument("--topology", required=True)
    p.add_argument("--rates", required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=200_000)
    p.add_argument("--step-a", type=float, default=1.0)
    p.add_argument("--step-b", type=float, default=10.0)
    p.add_argument("--early-stop", action="store_true")
    p.add_argument("--no-polish", action="store_true")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("game", help="decentralized association game")
    common(p)
    p.add_argument("--topology", required=True)
    p.add_argument("--rates", required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--pi", type=float, default=0.1)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=["maxrate", "random"], default="maxrate")
    p.add_argument("--mode", choices=["synchronous", "sequential"], default="synchronous")
    p.set_defaults(fn=cmd_game)

    p = sub.add_parser("decompose", help="decompose alpha into integer schedules")
    common(p)
    p.add_argument("--topology", required=True)
    p.add_argument("--alpha", required=True)
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("experiment", help="multi-realization benchmark")
    common(p)
    p.add_argument("--layout", choices=["exp1", "hetnet3gpp"], required=True)
    p.add_argument("--scale", choices=["full", "desk"], default="desk")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--seed", type=int, default=0, help="first seed of the range")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--pi", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=200_000)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--precoder", choices=[x.value for x in Precoder], default="zfbf")
    p.add_argument("--algorithms", default=",".join(ALGORITHMS))
    p.set_defaults(fn=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, RuntimeError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
