import numpy as np
import pytest

from mimoassoc.phy import (PilotPolicy, Precoder, RateModelParams,
                           allocate_pilots, load_rate_matrix, rate_matrix,
                           rate_model_params, save_rate_matrix, sinr_cbf,
                           sinr_zfbf)
from mimoassoc.topology import (BaseStation, Experiment1Params,
                                Hetnet3gppParams, NetworkTopology, Region,
                                Tier, UserTerminal, gain_matrix,
                                gen_experiment1, gen_hetnet_3gpp)


def _params(snr, nu, eta=1.0, sigma_zero=False, precoder=Precoder.CBF,
            slot_dim=196, pilot_dim=None):
    return RateModelParams(noise_power_w=1e-15, slot_dim=slot_dim,
                           pilot_dim=pilot_dim,
                           uplink_pilot_energy=np.inf if sigma_zero else 0.2,
                           eta=eta, precoder=precoder,
                           snr=np.asarray(snr, float), nu=np.asarray(nu, float))


def _single_pilot_plan(K, J):
    per_bs = {j: (0,) for j in range(J)}
    return_plan = __import__("mimoassoc.phy", fromlist=["PilotPlan"]).PilotPlan(
        1, per_bs, np.zeros((K, J), dtype=np.int64),
        {0: frozenset(range(J))})
    return_plan.validate()
    return return_plan


# ---------------------------------------------------------------------------
# pilot allocation
# ---------------------------------------------------------------------------

def test_pilots_exp1_shared_per_tier():
    topo = gen_experiment1(Experiment1Params(bg_density=3e-5, hot_density=3e-5), seed=0)
    plan = allocate_pilots(topo, PilotPolicy.SHARED_PER_TIER)
    assert plan.num_pilots == 14
    macros = {i for i, b in enumerate(topo.base_stations) if b.tier == Tier.MACRO}
    smalls = {i for i, b in enumerate(topo.base_stations) if b.tier == Tier.SMALL}
    for q in range(10):
        assert plan.contamination_sets[q] == frozenset(macros)
    for q in range(10, 14):
        assert plan.contamination_sets[q] == frozenset(smalls)


def test_pilots_single_bs_singletons():
    region = Region(100, 100, False)
    topo = NetworkTopology(region, [BaseStation(0, 50, 50, Tier.SMALL, 40, 4, 35.0)],
                           [UserTerminal(0, 10, 10)], seed=0)
    plan = allocate_pilots(topo, PilotPolicy.SHARED_PER_TIER)
    assert all(len(s) == 1 for s in plan.contamination_sets.values())


def test_pilots_hetnet_hot_zone_reuse():
    topo = gen_hetnet_3gpp(Hetnet3gppParams(), seed=1)
    plan = allocate_pilots(topo, PilotPolicy.HOT_ZONE_REUSE)
    assert plan.num_pilots == 26  # 10 macro pilots + 16 per zone, reused
    # rebuild the reuse sets exhaustively from the per-BS sets
    for q, members in plan.contamination_sets.items():
        expect = frozenset(j for j, ps in plan.per_bs_sets.items() if q in ps)
        assert members == expect
    for q in range(10):
        assert len(plan.contamination_sets[q]) == 7  # every macro shares them
    for q in range(10, 26):
        assert len(plan.contamination_sets[q]) == 21  # one small cell per zone


def test_pilots_hot_zone_requires_metadata():
    topo = gen_experiment1(Experiment1Params(bg_density=3e-5, hot_density=3e-5), seed=0)
    with pytest.raises(ValueError):
        allocate_pilots(topo, PilotPolicy.HOT_ZONE_REUSE)


def test_pilot_of_deterministic_and_in_set():
    topo = gen_experiment1(Experiment1Params(bg_density=3e-5, hot_density=3e-5), seed=0)
    p1 = allocate_pilots(topo, PilotPolicy.SHARED_PER_TIER)
    p2 = allocate_pilots(topo, PilotPolicy.SHARED_PER_TIER)
    assert np.array_equal(p1.pilot_of, p2.pilot_of)


# ---------------------------------------------------------------------------
# SINR formulas
# ---------------------------------------------------------------------------

def test_cbf_small_load_limit():
    # two symmetric BSs sharing one pilot: with vanishing spatial load the
    # SINR approaches own-gain^2 over the sum of interferer gains^2
    gains = np.array([[1.0, 0.5]])
    plan = _single_pilot_plan(1, 2)
    params = _params([10.0, 10.0], [1e-12, 1e-12])
    assert sinr_cbf(0, 0, gains, plan, params) == pytest.approx(1 / 0.25, rel=1e-6)


def test_cbf_zero_gain_numerator():
    gains = np.array([[0.0, 0.5]])
    plan = _single_pilot_plan(1, 2)
    params = _params([10.0, 10.0], [0.1, 0.1])
    assert sinr_cbf(0, 0, gains, plan, params) == 0.0


def test_cbf_hand_value():
    # single BS: g^2 SNR / nu over (eta + g SNR)
    gains = np.array([[1.0]])
    plan = _single_pilot_plan(1, 1)
    params = _params([10.0], [0.1])
    expect = (1.0 * 10.0 / 0.1) / (1.0 + 10.0)
    assert sinr_cbf(0, 0, gains, plan, params) == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(100 / 11)


def test_zfbf_hand_value():
    gains = np.array([[1.0]])
    plan = _single_pilot_plan(1, 1)
    params = _params([10.0], [0.1], sigma_zero=True)
    assert sinr_zfbf(0, 0, gains, plan, params) == pytest.approx(90.0, rel=1e-12)


def test_zfbf_single_cell_no_intracell_interference():
    # ideal estimation: denominator reduces to eta exactly
    gains = np.array([[0.7]])
    plan = _single_pilot_plan(1, 1)
    params = _params([25.0], [0.2], eta=1.5, sigma_zero=True)
    expect = (1 - 0.2) * 0.7 ** 2 * 25.0 / 0.2 / 1.5
    assert sinr_zfbf(0, 0, gains, plan, params) == pytest.approx(expect, rel=1e-12)


def test_zfbf_matches_cbf_at_vanishing_load():
    rng = np.random.default_rng(7)
    for _ in range(40):
        J = int(rng.integers(2, 5))
        gains = rng.uniform(0.1, 1.0, (1, J))
        plan = _single_pilot_plan(1, J)
        snr = rng.uniform(5, 50, J)
        nu = np.full(J, 1e-9)
        pc = _params(snr, nu, sigma_zero=True)
        pz = _params(snr, nu, sigma_zero=True, precoder=Precoder.ZFBF)
        c = sinr_cbf(0, 0, gains, plan, pc)
        z = sinr_zfbf(0, 0, gains, plan, pz)
        assert abs(z - c) / c < 1e-6


def test_sinr_monotonicity():
    plan = _single_pilot_plan(1, 3)
    params = _params([10.0, 10.0, 10.0], [0.1, 0.1, 0.1])
    base = np.array([[0.5, 0.3, 0.2]])
    s0 = sinr_cbf(0, 0, base, plan, params)
    up = base.copy(); up[0, 0] += 0.1
    assert sinr_cbf(0, 0, up, plan, params) > s0
    worse = base.copy(); worse[0, 1] += 0.1
    assert sinr_cbf(0, 0, worse, plan, params) < s0


def test_zfbf_vs_cbf_single_cell_ordering():
    # single cell, sigma^2 = 0: ZFBF wins iff (1 - nu)(eta + g SNR) >= eta
    rng = np.random.default_rng(11)
    plan = _single_pilot_plan(1, 1)
    for _ in range(50):
        g = rng.uniform(0.05, 1.0)
        snr = rng.uniform(1.0, 100.0)
        nu = rng.uniform(0.01, 0.9)
        eta = rng.uniform(1.0, 3.0)
        gains = np.array([[g]])
        c = sinr_cbf(0, 0, gains, plan, _params([snr], [nu], eta=eta, sigma_zero=True))
        z = sinr_zfbf(0, 0, gains, plan, _params([snr], [nu], eta=eta, sigma_zero=True))
        assert (z >= c) == ((1 - nu) * (eta + g * snr) >= eta - 1e-12)


def test_zfbf_rejects_full_load():
    gains = np.array([[1.0]])
    plan = _single_pilot_plan(1, 1)
    params = _params([10.0], [1.0])
    with pytest.raises(ValueError):
        sinr_zfbf(0, 0, gains, plan, params)


# ---------------------------------------------------------------------------
# rate matrix
# ---------------------------------------------------------------------------

def test_rates_zero_when_pilots_fill_slot():
    topo = gen_experiment1(Experiment1Params(bg_density=3e-5, hot_density=3e-5), seed=0)
    plan = allocate_pilots(topo, PilotPolicy.SHARED_PER_TIER)
    params = rate_model_params(topo, slot_dim=plan.num_pilots)
    rm = rate_matrix(topo, gain_matrix(topo), plan, params)
    assert np.all(rm.values == 0)


def test_rate_half_bit_at_unit_sinr():
    # SINR = 1 and Q/T = 1/2 give exactly half a bit per dimension
    region = Region(100, 100, False)
    topo = NetworkTopology(region, [BaseStation(0, 0, 0, Tier.SMALL, 40, 4, 35.0)],
                           [UserTerminal(0, 50, 50)], seed=0)
    plan = allocate_pilots(topo, PilotPolicy.SHARED_PER_TIER)
    params = rate_model_params(topo, precoder=Precoder.CBF, slot_dim=2 * plan.num_pilots)
    gains = gain_matrix(topo)
    s = sinr_cbf(0, 0, gains, plan, params)
    rm = rate_matrix(topo, gains, plan, params)
    assert rm.values[0, 0] == pytest.approx(0.5 * np.log2(1 + s), rel=1e-12)


def test_rate_matrix_matches_scalar_recomputation():
    topo = gen_experiment1(Experiment1Params(bg_density=4e-5, hot_density=1.5e-4), seed=9)
    plan = allocate_pilots(topo, PilotPolicy.SHARED_PER_TIER)
    gains = gain_matrix(topo)
    for precoder, scalar in ((Precoder.CBF, sinr_cbf), (Precoder.ZFBF, sinr_zfbf)):
        params = rate_model_params(topo, precoder=precoder)
        rm = rate_matrix(topo, gains, plan, params)
        assert np.all(rm.values > 0) and np.all(np.isfinite(rm.values))
        q = params.effective_pilot_dim(plan)
        rng = np.random.default_rng(1)
        for _ in range(40):
            k = int(rng.integers(topo.n_users))
            j = int(rng.integers(topo.n_bs))
            expect = (1 - q / params.slot_dim) * np.log2(
                1 + scalar(k, j, gains, plan, params))
            assert rm.values[k, j] == pytest.approx(expect, rel=1e-10)


def test_macro_beats_far_small_cell_at_macro_site():
    params = Experiment1Params(bg_density=3e-5, hot_density=3e-5)
    topo = gen_experiment1(params, seed=3)
    # plant a user exactly at the first macro site
    mx, my = params.resolved_macro_positions()[0]
    users = list(topo.users) + [UserTerminal(topo.n_users, mx, my)]
    topo = NetworkTopology(topo.region, topo.base_stations, users, topo.seed)
    plan = allocate_pilots(topo, PilotPolicy.SHARED_PER_TIER)
    rm = rate_matrix(topo, gain_matrix(topo), plan, rate_model_params(topo))
    k = topo.n_users - 1
    smalls = [j for j, b in enumerate(topo.base_stations) if b.tier == Tier.SMALL]
    assert rm.values[k, 0] > max(rm.values[k, j] for j in smalls)


def test_rate_matrix_csv_roundtrip(tmp_path):
    topo = gen_experiment1(Experiment1Params(bg_density=3e-5, hot_density=3e-5), seed=0)
    plan = allocate_pilots(topo, PilotPolicy.SHARED_PER_TIER)
    rm = rate_matrix(topo, gain_matrix(topo), plan, rate_model_params(topo))
    path = tmp_path / "rates.csv"
    save_rate_matrix(rm, path)
    again, user_ids, bs_ids = load_rate_matrix(path)
    assert np.allclose(again.values, rm.values, rtol=1e-11)
    assert user_ids == list(range(topo.n_users))
    assert bs_ids == list(range(topo.n_bs))
