"""Deterministic per-pair link rates for the large-antenna regime.

Rates are computed from large-scale gains only: with many antennas per
stream the per-slot rate of a user-BS pair concentrates on a deterministic
value that depends on the pilot allocation (through the set of BSs sharing
the user's pilot), the per-BS SNR and spatial load, but not on which other
users happen to be scheduled.  Both conjugate beamforming (CBF) and
zero-forcing beamforming (ZFBF) front-ends are supported.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .topology import NetworkTopology, Tier

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """Deterministic 64-bit mix; stable across runs unlike builtin hash."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return (z ^ (z >> 31)) & _MASK64


class Precoder(str, Enum):
    CBF = "cbf"
    ZFBF = "zfbf"


class PilotPolicy(str, Enum):
    SHARED_PER_TIER = "shared-per-tier"
    HOT_ZONE_REUSE = "hot-zone-reuse"


@dataclass
class PilotPlan:
    """Pilot bookkeeping: per-BS pilot sets, per-pair pilot choice, reuse sets."""

    num_pilots: int
    per_bs_sets: dict            # BS index -> tuple of pilot ids, len == S_j
    pilot_of: np.ndarray         # (K, J) pilot id used when evaluating pair (k, j)
    contamination_sets: dict     # pilot id -> frozenset of BS indices using it

    def validate(self) -> None:
        for j, pilots in self.per_bs_sets.items():
            if len(set(pilots)) != len(pilots):
                raise ValueError(f"BS {j} has repeated pilots")
            for q in pilots:
                if not 0 <= q < self.num_pilots:
                    raise ValueError("pilot id out of range")
        for q, bss in self.contamination_sets.items():
            expect = frozenset(j for j, ps in self.per_bs_sets.items() if q in ps)
            if bss != expect:
                raise ValueError(f"contamination set of pilot {q} inconsistent")
        K, J = self.pilot_of.shape
        for j in range(J):
            if not set(np.unique(self.pilot_of[:, j])) <= set(self.per_bs_sets[j]):
                raise ValueError(f"pilot_of column {j} leaves the BS pilot set")


def allocate_pilots(topology: NetworkTopology, policy: PilotPolicy) -> PilotPlan:
    """Assign pilot sets to BSs and a deterministic per-pair pilot to users.

    shared-per-tier: all macros share one orthogonal pool, all small cells a
    second pool (pools mutually orthogonal).  hot-zone-reuse: macros share
    one pool; within a hot zone each small cell gets its own block, and the
    zone-local blocks are reused across zones.
    """
    bss = topology.base_stations
    macro_idx = [i for i, b in enumerate(bss) if b.tier == Tier.MACRO]
    small_idx = [i for i, b in enumerate(bss) if b.tier == Tier.SMALL]
    per_bs: dict = {}

    if policy == PilotPolicy.SHARED_PER_TIER:
        macro_pool = max((bss[i].streams for i in macro_idx), default=0)
        small_pool = max((bss[i].streams for i in small_idx), default=0)
        for i in macro_idx:
            per_bs[i] = tuple(range(bss[i].streams))
        for i in small_idx:
            per_bs[i] = tuple(range(macro_pool, macro_pool + bss[i].streams))
        Q = macro_pool + small_pool
    elif policy == PilotPolicy.HOT_ZONE_REUSE:
        if topology.zone_of is None:
            raise ValueError("hot-zone-reuse policy needs zone metadata in the topology")
        macro_pool = max((bss[i].streams for i in macro_idx), default=0)
        for i in macro_idx:
            per_bs[i] = tuple(range(bss[i].streams))
        zones: dict = {}
        for i in small_idx:
            if i not in topology.zone_of:
                raise ValueError(f"small cell {i} missing from zone metadata")
            zones.setdefault(topology.zone_of[i], []).append(i)
        # block widths per in-zone position; blocks are reused across zones
        n_pos = max((len(v) for v in zones.values()), default=0)
        widths = [0] * n_pos
        for members in zones.values():
            for pos, i in enumerate(sorted(members)):
                widths[pos] = max(widths[pos], bss[i].streams)
        offsets = np.concatenate(([0], np.cumsum(widths))).astype(int) + macro_pool
        for members in zones.values():
            for pos, i in enumerate(sorted(members)):
                per_bs[i] = tuple(range(offsets[pos], offsets[pos] + bss[i].streams))
        Q = int(macro_pool + sum(widths))
    else:
        raise ValueError(f"unknown pilot policy: {policy}")

    K, J = topology.n_users, topology.n_bs
    pilot_of = np.zeros((K, J), dtype=np.int64)
    for k, u in enumerate(topology.users):
        h = _splitmix64(u.id)
        for j in range(J):
            pilots = per_bs[j]
            pilot_of[k, j] = pilots[h % len(pilots)]

    contamination = {}
    for q in range(Q):
        contamination[q] = frozenset(j for j, ps in per_bs.items() if q in ps)
    plan = PilotPlan(Q, per_bs, pilot_of, contamination)
    plan.validate()
    return plan


# ---------------------------------------------------------------------------
# Rate model
# ---------------------------------------------------------------------------

def default_noise_power(bandwidth_hz: float = 180e3, noise_figure_db: float = 9.0) -> float:
    """Thermal noise power in watts over one resource block (-174 dBm/Hz floor)."""
    dbm = -174.0 + 10.0 * math.log10(bandwidth_hz) + noise_figure_db
    return 10 ** ((dbm - 30.0) / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10 ** ((dbm - 30.0) / 10.0)


@dataclass
class RateModelParams:
    """Link-budget constants plus per-BS derived vectors (SNR, spatial load)."""

    noise_power_w: float
    slot_dim: int = 196                  # channel uses per slot (T)
    pilot_dim: Optional[int] = None      # uplink pilot dimension Q; None -> plan size
    uplink_pilot_energy: float = 0.2     # energy per uplink pilot symbol (23 dBm)
    eta: float = 1.0                     # power-normalization margin, >= 1
    precoder: Precoder = Precoder.ZFBF
    snr: Optional[np.ndarray] = None     # (J,) P_j / N0
    nu: Optional[np.ndarray] = None      # (J,) streams per antenna

    def __post_init__(self):
        if self.eta < 1:
            raise ValueError("eta must be >= 1")
        if self.noise_power_w <= 0:
            raise ValueError("noise power must be positive")
        if self.pilot_dim is not None and not 0 < self.pilot_dim <= self.slot_dim:
            raise ValueError("need 0 < Q <= T")

    def effective_pilot_dim(self, plan: PilotPlan) -> int:
        q = self.pilot_dim if self.pilot_dim is not None else plan.num_pilots
        if not 0 < q <= self.slot_dim:
            raise ValueError(f"pilot dimension {q} outside (0, {self.slot_dim}]")
        return q

    def sigma2(self, pilot_dim: int) -> float:
        """Projected channel-estimation noise variance N0 / (Q * P_u)."""
        return self.noise_power_w / (pilot_dim * self.uplink_pilot_energy)


def rate_model_params(topology: NetworkTopology, precoder: Precoder = Precoder.ZFBF,
                      noise_power_w: Optional[float] = None, slot_dim: int = 196,
                      pilot_dim: Optional[int] = None, uplink_pilot_energy: float = 0.2,
                      eta: float = 1.0) -> RateModelParams:
    """Build rate-model parameters with per-BS SNR/load derived from the topology."""
    n0 = noise_power_w if noise_power_w is not None else default_noise_power()
    snr = np.array([dbm_to_watts(b.tx_power_dbm) / n0 for b in topology.base_stations])
    nu = np.array([b.spatial_load for b in topology.base_stations])
    return RateModelParams(noise_power_w=n0, slot_dim=slot_dim, pilot_dim=pilot_dim,
                           uplink_pilot_energy=uplink_pilot_energy, eta=eta,
                           precoder=precoder, snr=snr, nu=nu)


def _require_links(params: RateModelParams):
    if params.snr is None or params.nu is None:
        raise ValueError("params lack per-BS snr/nu; build them via rate_model_params()")
    return np.asarray(params.snr, dtype=float), np.asarray(params.nu, dtype=float)


def sinr_cbf(k: int, j: int, gains: np.ndarray, plan: PilotPlan,
             params: RateModelParams) -> float:
    """Deterministic SINR of pair (k, j) under conjugate beamforming."""
    snr, nu = _require_links(params)
    if nu[j] <= 0:
        raise ValueError("spatial load of the serving BS must be positive")
    g = gains[k]
    num = g[j] ** 2 * snr[j] / nu[j]
    interf = float(np.dot(g, snr))
    contam = 0.0
    for ell in plan.contamination_sets[int(plan.pilot_of[k, j])]:
        if ell != j:
            contam += g[ell] ** 2 * snr[ell] / nu[ell]
    return num / (params.eta + interf + contam)


def sinr_zfbf(k: int, j: int, gains: np.ndarray, plan: PilotPlan,
              params: RateModelParams) -> float:
    """Deterministic SINR of pair (k, j) under zero-forcing beamforming."""
    snr, nu = _require_links(params)
    if nu[j] >= 1:
        raise ValueError("ZFBF needs spatial load < 1 at the serving BS")
    if nu[j] <= 0:
        raise ValueError("spatial load of the serving BS must be positive")
    g = gains[k]
    q_dim = params.effective_pilot_dim(plan)
    s2 = params.sigma2(q_dim)
    num = (1 - nu[j]) * g[j] ** 2 * snr[j] / nu[j]
    interf = float(np.dot(g, snr)) - g[j] * snr[j]
    contam = 0.0
    for ell in plan.contamination_sets[int(plan.pilot_of[k, j])]:
        if ell != j:
            contam += (1 - nu[ell]) * g[ell] ** 2 * snr[ell] / nu[ell]
    return num / (params.eta + s2 * g[j] * snr[j] + interf + contam)


@dataclass
class RateMatrix:
    """Per-pair deterministic rates in bit/dimension."""

    values: np.ndarray  # (K, J)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("rates must be finite")
        if np.any(v < 0):
            raise ValueError("rates must be nonnegative")
        self.values = v


def rate_matrix(topology: NetworkTopology, gains: np.ndarray, plan: PilotPlan,
                params: RateModelParams) -> RateMatrix:
    """(1 - Q/T) log2(1 + SINR) for every pair, vectorized over the pilot sets."""
    snr, nu = _require_links(params)
    q_dim = params.effective_pilot_dim(plan)
    K, J = gains.shape
    A = gains * snr                       # g * SNR
    B = gains ** 2 * snr / nu             # beamforming-gain terms
    total_a = A.sum(axis=1)

    if params.precoder == Precoder.CBF:
        num = B
        contam_basis = B
    else:
        if np.any(nu >= 1):
            raise ValueError("ZFBF needs spatial load < 1 at every BS")
        num = (1 - nu) * B
        contam_basis = (1 - nu) * B

    # per-pilot contamination sums, then subtract the serving BS's own term
    contam_by_pilot = np.zeros((plan.num_pilots, K))
    for q, bs_set in plan.contamination_sets.items():
        idx = sorted(bs_set)
        if idx:
            contam_by_pilot[q] = contam_basis[:, idx].sum(axis=1)
    rows = np.arange(K)[:, None]
    contam = contam_by_pilot[plan.pilot_of, rows] - contam_basis

    if params.precoder == Precoder.CBF:
        den = params.eta + total_a[:, None] + contam
    else:
        s2 = params.sigma2(q_dim)
        den = params.eta + s2 * A + (total_a[:, None] - A) + contam

    sinr = num / den
    rates = (1 - q_dim / params.slot_dim) * np.log2(1 + sinr)
    return RateMatrix(rates)


# ---------------------------------------------------------------------------
# CSV serialization: header of BS ids, one row per user id, 12 significant digits
# ---------------------------------------------------------------------------

def save_rate_matrix(rates: RateMatrix, path, bs_ids=None, user_ids=None) -> None:
    K, J = rates.values.shape
    bs_ids = list(range(J)) if bs_ids is None else list(bs_ids)
    user_ids = list(range(K)) if user_ids is None else list(user_ids)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["user_id"] + [str(b) for b in bs_ids])
        for k in range(K):
            w.writerow([str(user_ids[k])] + [f"{x:.12g}" for x in rates.values[k]])


def load_rate_matrix(path):
    """Returns (RateMatrix, user_ids, bs_ids)."""
    with open(path, newline="") as f:
        r = csv.reader(f)
        header = next(r)
        bs_ids = [int(x) for x in header[1:]]
        user_ids, rows = [], []
        for line in r:
            user_ids.append(int(line[0]))
            rows.append([float(x) for x in line[1:]])
    return RateMatrix(np.array(rows)), user_ids, bs_ids
