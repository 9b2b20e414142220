import json

import numpy as np
import pytest

from mimoassoc.topology import (BaseStation, Experiment1Params, Hetnet3gppParams,
                                NetworkTopology, PathlossModel, Region, Tier,
                                UserTerminal, gain_matrix, gen_experiment1,
                                gen_hetnet_3gpp, load_topology, pathloss_gain,
                                save_topology, toroidal_distance)


def test_toroidal_distance_identity():
    region = Region(100, 100, wraparound=True)
    assert toroidal_distance((3, 4), (3, 4), region) == 0


def test_toroidal_distance_min_image():
    region = Region(100, 100, wraparound=True)
    assert toroidal_distance((1, 50), (99, 50), region) == pytest.approx(2)


def test_plain_distance_without_wraparound():
    region = Region(100, 100, wraparound=False)
    assert toroidal_distance((1, 50), (99, 50), region) == pytest.approx(98)


def test_wraparound_translation_invariance():
    region = Region(200, 120, wraparound=True)
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.uniform(0, [200, 120])
        b = rng.uniform(0, [200, 120])
        shift = rng.uniform(0, [200, 120])
        a2 = (a + shift) % [200, 120]
        b2 = (b + shift) % [200, 120]
        assert toroidal_distance(a2, b2, region) == pytest.approx(
            toroidal_distance(a, b, region), abs=1e-9)


def test_pathloss_at_zero_distance():
    assert pathloss_gain(0.0, Tier.MACRO) == 1.0


def test_pathloss_at_reference_distance():
    assert pathloss_gain(40.0, Tier.MACRO) == pytest.approx(0.5)
    assert pathloss_gain(40.0, Tier.SMALL) == pytest.approx(0.5)


def test_pathloss_monotone_and_bounded():
    d = np.linspace(0, 2000, 200)
    for tier in (Tier.MACRO, Tier.SMALL):
        g = np.array([pathloss_gain(x, tier) for x in d])
        assert np.all(g > 0) and np.all(g <= 1)
        assert np.all(np.diff(g) <= 0)


def _toy_topology():
    region = Region(1000, 1000, wraparound=False)
    bss = [BaseStation(0, 100, 100, Tier.MACRO, 100, 10, 46.0),
           BaseStation(1, 140, 100, Tier.MACRO, 100, 10, 46.0)]
    users = [UserTerminal(0, 100, 100)]
    return NetworkTopology(region, bss, users, seed=0)


def test_gain_matrix_colocated_and_reference():
    g = gain_matrix(_toy_topology())
    assert g[0, 0] == 1.0
    assert g[0, 1] == pytest.approx(0.5)  # 40 m from a macro


def test_gain_matrix_matches_scalar():
    topo = gen_experiment1(Experiment1Params(bg_density=2e-5, hot_density=2e-5), seed=5)
    model = PathlossModel()
    g = gain_matrix(topo, model)
    rng = np.random.default_rng(0)
    for _ in range(30):
        k = int(rng.integers(topo.n_users))
        j = int(rng.integers(topo.n_bs))
        bs = topo.base_stations[j]
        u = topo.users[k]
        d = toroidal_distance((u.x, u.y), (bs.x, bs.y), topo.region)
        assert g[k, j] == pytest.approx(pathloss_gain(d, bs.tier, model), rel=1e-12)


def test_experiment1_counts_and_parameters():
    topo = gen_experiment1(Experiment1Params(), seed=1)
    macros = [b for b in topo.base_stations if b.tier == Tier.MACRO]
    smalls = [b for b in topo.base_stations if b.tier == Tier.SMALL]
    assert len(macros) == 2
    assert len(smalls) == 40
    assert all(b.antennas == 100 and b.streams == 10 and b.tx_power_dbm == 46.0
               for b in macros)
    assert all(b.antennas == 40 and b.streams == 4 and b.tx_power_dbm == 35.0
               for b in smalls)
    assert topo.n_users > 0


def test_experiment1_determinism():
    params = Experiment1Params()
    t1 = gen_experiment1(params, seed=7)
    t2 = gen_experiment1(params, seed=7)
    assert [(u.x, u.y) for u in t1.users] == [(u.x, u.y) for u in t2.users]
    assert [(b.x, b.y) for b in t1.base_stations] == [(b.x, b.y) for b in t2.base_stations]


def test_experiment1_degenerate_density_is_homogeneous_poisson():
    # equal hot and background density leaves no extra hot-disc mass
    params = Experiment1Params(bg_density=1e-4, hot_density=1e-4)
    counts = [gen_experiment1(params, seed=s).n_users for s in range(60)]
    area = params.region_width * params.region_height
    mean = params.bg_density * area
    # Poisson(mean): the sample average should sit within 5 sigma
    assert abs(np.mean(counts) - mean) < 5 * np.sqrt(mean / len(counts))


def test_experiment1_rejects_zero_densities():
    with pytest.raises(ValueError):
        gen_experiment1(Experiment1Params(bg_density=0.0, hot_density=0.0), seed=0)


def test_hetnet_counts():
    topo = gen_hetnet_3gpp(Hetnet3gppParams(), seed=2)
    macros = [b for b in topo.base_stations if b.tier == Tier.MACRO]
    smalls = [b for b in topo.base_stations if b.tier == Tier.SMALL]
    assert len(macros) == 7
    assert len(smalls) == 84  # 7 sites x 3 zones x 4 cells
    assert set(topo.zone_of.values()) == set(range(21))


def test_hetnet_macro_only():
    topo = gen_hetnet_3gpp(Hetnet3gppParams(zones_per_macro=0,
                                            n_background_users=10), seed=3)
    assert all(b.tier == Tier.MACRO for b in topo.base_stations)
    assert topo.n_users == 10


def test_hetnet_determinism():
    params = Hetnet3gppParams(n_macro_sites=3)
    t1 = gen_hetnet_3gpp(params, seed=11)
    t2 = gen_hetnet_3gpp(params, seed=11)
    assert [(b.x, b.y) for b in t1.base_stations] == [(b.x, b.y) for b in t2.base_stations]
    assert [(u.x, u.y) for u in t1.users] == [(u.x, u.y) for u in t2.users]


def test_hetnet_retry_budget():
    # zone separation so large that placements cannot all fit
    params = Hetnet3gppParams(min_zone_separation=5000.0, retry_budget=50)
    with pytest.raises(RuntimeError):
        gen_hetnet_3gpp(params, seed=0)


def test_topology_json_roundtrip(tmp_path):
    topo = gen_hetnet_3gpp(Hetnet3gppParams(n_macro_sites=3), seed=4)
    path = tmp_path / "topo.json"
    save_topology(topo, path)
    again = load_topology(path)
    assert [(b.x, b.y, b.tier, b.streams) for b in topo.base_stations] == \
           [(b.x, b.y, b.tier, b.streams) for b in again.base_stations]
    assert [(u.x, u.y) for u in topo.users] == [(u.x, u.y) for u in again.users]
    assert topo.zone_of == again.zone_of
    # bit-identical on re-serialization
    path2 = tmp_path / "topo2.json"
    save_topology(again, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_validation_rejects_bad_stations():
    with pytest.raises(ValueError):
        BaseStation(0, 0, 0, Tier.MACRO, antennas=4, streams=8, tx_power_dbm=40.0)
    with pytest.raises(ValueError):
        BaseStation(0, 0, 0, Tier.MACRO, antennas=8, streams=4,
                    tx_power_dbm=float("inf"))
    with pytest.raises(ValueError):
        UserTerminal(0, 1, 1, allowed_bs=frozenset())
