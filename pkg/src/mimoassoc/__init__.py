"""User-cell association toolkit for massive-MIMO heterogeneous networks.

The package is organized as a pipeline:

    topology     -- network layouts and large-scale gains
    phy          -- pilot allocation and deterministic per-pair link rates
    core         -- activity fractions, throughputs, fairness utilities
    dual         -- centralized network-utility maximization via dual subgradient
    lp           -- dense simplex engine and primal recovery of activity fractions
    schedule     -- decomposition of activity fractions into integer schedules
    localpolicy  -- per-BS gamma-fair resource split (closed form)
    game         -- decentralized user-centric association game
    experiments  -- multi-realization benchmark harness
    cli          -- command-line pipeline
"""

__version__ = "0.1.0"
