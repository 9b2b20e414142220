"""Network layouts: BS/user placement, tiers, and large-scale channel gains.

Two generators are provided: a rectangular two-tier layout with macro
hot-spots (``gen_experiment1``) and a hex-grid layout with small-cell hot
zones (``gen_hetnet_3gpp``).  Both are pure functions of (params, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np


class Tier(str, Enum):
    MACRO = "macro"
    SMALL = "small"


@dataclass(frozen=True)
class Region:
    width: float
    height: float
    wraparound: bool = True

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("region dimensions must be positive")


@dataclass(frozen=True)
class BaseStation:
    id: int
    x: float
    y: float
    tier: Tier
    antennas: int
    streams: int
    tx_power_dbm: float

    def __post_init__(self):
        if self.antennas <= 0 or self.streams <= 0:
            raise ValueError("antennas and streams must be positive")
        if self.streams > self.antennas:
            raise ValueError(f"BS {self.id}: streams ({self.streams}) exceed antennas ({self.antennas})")
        if not math.isfinite(self.tx_power_dbm):
            raise ValueError("tx power must be finite")

    @property
    def spatial_load(self) -> float:
        return self.streams / self.antennas


@dataclass(frozen=True)
class UserTerminal:
    id: int
    x: float
    y: float
    allowed_bs: Optional[frozenset] = None  # None means all BSs reachable

    def __post_init__(self):
        if self.allowed_bs is not None and len(self.allowed_bs) == 0:
            raise ValueError(f"user {self.id}: allowed BS set must be nonempty when given")


@dataclass(frozen=True)
class PathlossModel:
    """Distance-based gain 1 / (1 + (d/d0)^e), exponent per tier."""

    reference_distance: float = 40.0
    exponent_macro: float = 3.5
    exponent_small: float = 4.0

    def __post_init__(self):
        if self.reference_distance <= 0:
            raise ValueError("reference distance must be positive")
        if self.exponent_macro <= 2 or self.exponent_small <= 2:
            raise ValueError("pathloss exponents must exceed 2")

    def exponent(self, tier: Tier) -> float:
        return self.exponent_macro if tier == Tier.MACRO else self.exponent_small


@dataclass
class NetworkTopology:
    region: Region
    base_stations: list
    users: list
    seed: int
    zone_of: Optional[dict] = None  # BS id -> hot-zone id (hot-zone layouts only)

    def __post_init__(self):
        if not self.base_stations or not self.users:
            raise ValueError("topology needs at least one BS and one user")
        bs_ids = [b.id for b in self.base_stations]
        ue_ids = [u.id for u in self.users]
        if len(set(bs_ids)) != len(bs_ids) or len(set(ue_ids)) != len(ue_ids):
            raise ValueError("duplicate ids in topology")
        for b in self.base_stations:
            if not (0 <= b.x <= self.region.width and 0 <= b.y <= self.region.height):
                raise ValueError(f"BS {b.id} outside region")
        for u in self.users:
            if not (0 <= u.x <= self.region.width and 0 <= u.y <= self.region.height):
                raise ValueError(f"user {u.id} outside region")

    @property
    def n_bs(self) -> int:
        return len(self.base_stations)

    @property
    def n_users(self) -> int:
        return len(self.users)

    def streams_array(self) -> np.ndarray:
        return np.array([b.streams for b in self.base_stations], dtype=float)

    def allowed_mask(self) -> np.ndarray:
        """(K, J) boolean mask of user-BS pairs permitted to associate."""
        index_of = {b.id: i for i, b in enumerate(self.base_stations)}
        mask = np.ones((self.n_users, self.n_bs), dtype=bool)
        for i, u in enumerate(self.users):
            if u.allowed_bs is not None:
                mask[i, :] = False
                for bid in u.allowed_bs:
                    mask[i, index_of[bid]] = True
        return mask


def toroidal_distance(a, b, region: Region) -> float:
    """Distance between two points; min-image metric when the region wraps."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    if region.wraparound:
        dx = min(dx, region.width - dx)
        dy = min(dy, region.height - dy)
    return math.hypot(dx, dy)


def pathloss_gain(d: float, tier: Tier, model: PathlossModel = PathlossModel()) -> float:
    """Large-scale gain in (0, 1] at distance d for the given tier."""
    if d < 0:
        raise ValueError("distance must be nonnegative")
    e = model.exponent(tier)
    return 1.0 / (1.0 + (d / model.reference_distance) ** e)


def gain_matrix(topology: NetworkTopology, model: PathlossModel = PathlossModel()) -> np.ndarray:
    """K x J matrix of large-scale gains between every user and BS."""
    K, J = topology.n_users, topology.n_bs
    ux = np.array([u.x for u in topology.users])
    uy = np.array([u.y for u in topology.users])
    g = np.empty((K, J))
    for j, bs in enumerate(topology.base_stations):
        dx = np.abs(ux - bs.x)
        dy = np.abs(uy - bs.y)
        if topology.region.wraparound:
            dx = np.minimum(dx, topology.region.width - dx)
            dy = np.minimum(dy, topology.region.height - dy)
        d = np.hypot(dx, dy)
        g[:, j] = 1.0 / (1.0 + (d / model.reference_distance) ** model.exponent(bs.tier))
    return g


# ---------------------------------------------------------------------------
# Layout generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Experiment1Params:
    """Rectangular layout: fixed macro sites, uniform small cells, non-homogeneous users.

    User process: background Poisson density ``bg_density`` over the whole
    region plus additional density inside a disc of ``hot_radius`` around each
    macro so that the total density there is ``hot_density``.  Defaults target
    a mean of roughly 300 users on the full 900 x 1800 m region.
    """

    region_width: float = 900.0
    region_height: float = 1800.0
    wraparound: bool = True
    n_small: int = 40
    bg_density: float = 1.0e-4          # users per m^2
    hot_density: float = 4.5e-4         # total density inside hot discs (>= bg)
    hot_radius: float = 250.0
    macro_positions: Optional[tuple] = None  # default: centers of the two squares
    macro_antennas: int = 100
    macro_streams: int = 10
    macro_power_dbm: float = 46.0
    small_antennas: int = 40
    small_streams: int = 4
    small_power_dbm: float = 35.0

    def resolved_macro_positions(self) -> tuple:
        if self.macro_positions is not None:
            return tuple(self.macro_positions)
        # two square sub-regions stacked along the longer axis
        w, h = self.region_width, self.region_height
        if h >= w:
            return ((w / 2, h / 4), (w / 2, 3 * h / 4))
        return ((w / 4, h / 2), (3 * w / 4, h / 2))


def gen_experiment1(params: Experiment1Params, seed: int) -> NetworkTopology:
    """Two-tier rectangular layout with user hot-spots around the macros."""
    if params.bg_density <= 0 and params.hot_density <= 0:
        raise ValueError("user densities are zero; no users can be generated")
    if params.hot_density < params.bg_density:
        raise ValueError("hot_density is the total density in hot discs and must be >= bg_density")
    rng = np.random.default_rng(seed)
    region = Region(params.region_width, params.region_height, params.wraparound)

    macros = params.resolved_macro_positions()
    bss = []
    for mx, my in macros:
        bss.append(BaseStation(len(bss), mx, my, Tier.MACRO, params.macro_antennas,
                               params.macro_streams, params.macro_power_dbm))
    sx = rng.uniform(0, region.width, params.n_small)
    sy = rng.uniform(0, region.height, params.n_small)
    for i in range(params.n_small):
        bss.append(BaseStation(len(bss), float(sx[i]), float(sy[i]), Tier.SMALL,
                               params.small_antennas, params.small_streams,
                               params.small_power_dbm))

    # background users: homogeneous Poisson over the region
    area = region.width * region.height
    n_bg = rng.poisson(params.bg_density * area)
    pts = [(float(x), float(y)) for x, y in
           zip(rng.uniform(0, region.width, n_bg), rng.uniform(0, region.height, n_bg))]
    # hot-spot users: extra density inside each macro disc
    extra = params.hot_density - params.bg_density
    disc_area = math.pi * params.hot_radius ** 2
    for mx, my in macros:
        n_hot = rng.poisson(extra * disc_area)
        radii = params.hot_radius * np.sqrt(rng.uniform(0, 1, n_hot))
        angles = rng.uniform(0, 2 * math.pi, n_hot)
        hx = mx + radii * np.cos(angles)
        hy = my + radii * np.sin(angles)
        if region.wraparound:
            hx = np.mod(hx, region.width)
            hy = np.mod(hy, region.height)
        else:
            hx = np.clip(hx, 0, region.width)
            hy = np.clip(hy, 0, region.height)
        pts.extend((float(x), float(y)) for x, y in zip(hx, hy))

    if not pts:
        raise ValueError(f"seed {seed} produced zero users; increase densities")
    users = [UserTerminal(i, x, y) for i, (x, y) in enumerate(pts)]
    return NetworkTopology(region, bss, users, seed)


@dataclass(frozen=True)
class Hetnet3gppParams:
    """Hex-grid macro layout with clustered small cells in user hot zones.

    Inter-site distance and drop radii default to TR 36.842-style values;
    user counts are fixed per zone plus a uniform background population.
    """

    isd: float = 500.0
    n_macro_sites: int = 7              # 1 = center only, 3 = desk scale, 7 = center + ring
    zones_per_macro: int = 3
    smalls_per_zone: int = 4
    zone_radius: float = 50.0           # small-cell drop radius around the zone center
    zone_user_radius: float = 70.0      # user drop radius around the zone center
    users_per_zone: int = 15
    n_background_users: int = 30
    zone_drop_max_radius: Optional[float] = None  # default 0.4 * isd
    min_zone_separation: Optional[float] = None   # default 2 * zone_radius + 10
    retry_budget: int = 1000
    wraparound: bool = True
    macro_antennas: int = 100
    macro_streams: int = 10
    macro_power_dbm: float = 46.0
    small_antennas: int = 40
    small_streams: int = 4
    small_power_dbm: float = 35.0


def _hex_sites(params: Hetnet3gppParams):
    side = 3.0 * params.isd
    cx, cy = side / 2, side / 2
    sites = [(cx, cy)]
    for a in range(6):
        ang = math.pi / 3 * a
        sites.append((cx + params.isd * math.cos(ang), cy + params.isd * math.sin(ang)))
    if not 1 <= params.n_macro_sites <= 7:
        raise ValueError("n_macro_sites must be within 1..7")
    return side, sites[: params.n_macro_sites]


def gen_hetnet_3gpp(params: Hetnet3gppParams, seed: int) -> NetworkTopology:
    """Hex-grid heterogeneous layout with non-overlapping small-cell hot zones."""
    rng = np.random.default_rng(seed)
    side, sites = _hex_sites(params)
    region = Region(side, side, params.wraparound)
    drop_r = params.zone_drop_max_radius if params.zone_drop_max_radius is not None else 0.4 * params.isd
    min_sep = params.min_zone_separation if params.min_zone_separation is not None else 2 * params.zone_radius + 10

    bss = []
    for mx, my in sites:
        bss.append(BaseStation(len(bss), mx, my, Tier.MACRO, params.macro_antennas,
                               params.macro_streams, params.macro_power_dbm))

    def sample_in_disc(cx, cy, radius):
        r = radius * math.sqrt(rng.uniform())
        ang = rng.uniform(0, 2 * math.pi)
        x, y = cx + r * math.cos(ang), cy + r * math.sin(ang)
        if region.wraparound:
            return x % region.width, y % region.height
        return min(max(x, 0.0), region.width), min(max(y, 0.0), region.height)

    # drop zone centers, rejecting overlaps across the whole layout
    zone_centers = []
    for mx, my in sites:
        for _ in range(params.zones_per_macro):
            for attempt in range(params.retry_budget + 1):
                if attempt == params.retry_budget:
                    raise RuntimeError("zone placement retry budget exceeded; "
                                       "loosen min_zone_separation or zone_drop_max_radius")
                zx, zy = sample_in_disc(mx, my, drop_r)
                if all(toroidal_distance((zx, zy), c, region) >= min_sep for c in zone_centers):
                    zone_centers.append((zx, zy))
                    break

    zone_of = {}
    for z, (zx, zy) in enumerate(zone_centers):
        for _ in range(params.smalls_per_zone):
            x, y = sample_in_disc(zx, zy, params.zone_radius)
            bs = BaseStation(len(bss), x, y, Tier.SMALL, params.small_antennas,
                             params.small_streams, params.small_power_dbm)
            zone_of[bs.id] = z
            bss.append(bs)

    pts = []
    for zx, zy in zone_centers:
        for _ in range(params.users_per_zone):
            pts.append(sample_in_disc(zx, zy, params.zone_user_radius))
    for _ in range(params.n_background_users):
        pts.append((float(rng.uniform(0, region.width)), float(rng.uniform(0, region.height))))
    if not pts:
        raise ValueError("layout parameters produced zero users")

    users = [UserTerminal(i, x, y) for i, (x, y) in enumerate(pts)]
    return NetworkTopology(region, bss, users, seed, zone_of=zone_of or None)


# ---------------------------------------------------------------------------
# Serialization (JSON; floats round-trip bit-identically via repr)
# ---------------------------------------------------------------------------

def topology_to_dict(t: NetworkTopology) -> dict:
    d = {
        "region": {"width": t.region.width, "height": t.region.height,
                   "wraparound": t.region.wraparound},
        "seed": t.seed,
        "base_stations": [
            {"id": b.id, "x": b.x, "y": b.y, "tier": b.tier.value,
             "antennas": b.antennas, "streams": b.streams,
             "tx_power_dbm": b.tx_power_dbm}
            for b in t.base_stations
        ],
        "users": [
            {"id": u.id, "x": u.x, "y": u.y,
             **({"allowed_bs": sorted(u.allowed_bs)} if u.allowed_bs is not None else {})}
            for u in t.users
        ],
    }
    if t.zone_of is not None:
        d["zone_of"] = {str(k): v for k, v in sorted(t.zone_of.items())}
    return d


def topology_from_dict(d: dict) -> NetworkTopology:
    region = Region(d["region"]["width"], d["region"]["height"], d["region"]["wraparound"])
    bss = [BaseStation(b["id"], b["x"], b["y"], Tier(b["tier"]), b["antennas"],
                       b["streams"], b["tx_power_dbm"]) for b in d["base_stations"]]
    users = [UserTerminal(u["id"], u["x"], u["y"],
                          frozenset(u["allowed_bs"]) if "allowed_bs" in u else None)
             for u in d["users"]]
    zone_of = {int(k): v for k, v in d["zone_of"].items()} if "zone_of" in d else None
    return NetworkTopology(region, bss, users, d["seed"], zone_of=zone_of)


def save_topology(t: NetworkTopology, path) -> None:
    with open(path, "w") as f:
        json.dump(topology_to_dict(t), f, indent=1)
        f.write("\n")


def load_topology(path) -> NetworkTopology:
    with open(path) as f:
        return topology_from_dict(json.load(f))
