# Generate a two-tier layout, allocate pilots, and inspect the deterministic
# per-pair rate matrix.
#
# Run: python3 demos/01_topology_and_rates.py

import numpy as np

from mimoassoc.experiments import scaled_exp1_params
from mimoassoc.phy import (PilotPolicy, Precoder, allocate_pilots, rate_matrix,
                           rate_model_params)
from mimoassoc.topology import gain_matrix, gen_experiment1

topo = gen_experiment1(scaled_exp1_params(), seed=0)
macros = [b for b in topo.base_stations if b.tier.value == "macro"]
print(f"layout: {topo.n_bs} BSs ({len(macros)} macro), {topo.n_users} users "
      f"on a {topo.region.width:.0f} x {topo.region.height:.0f} m torus")

plan = allocate_pilots(topo, PilotPolicy.SHARED_PER_TIER)
print(f"pilots: {plan.num_pilots} total; every macro shares the first "
      f"{macros[0].streams}, every small cell the remaining block")

gains = gain_matrix(topo)
params = rate_model_params(topo, precoder=Precoder.ZFBF)
rates = rate_matrix(topo, gains, plan, params).values

print(f"rates (bit/dimension): min {rates.min():.2e}, median "
      f"{np.median(rates):.2e}, max {rates.max():.2f} "
      f"(most pairs are far apart, hence the tiny tail)")
best = rates.max(axis=1)
print(f"per-user peak rate: 5th pct {np.percentile(best, 5):.3f}, "
      f"median {np.median(best):.3f}")

# a user's own column dominates close to the macro, small cells win nearby
k = int(np.argmax(gains[:, 0]))
order = np.argsort(rates[k])[::-1][:3]
print(f"user {k} (closest to the macro) sees its best rates from BSs "
      f"{order.tolist()}: {[float(f'{x:.3g}') for x in rates[k, order]]}")
