import numpy as np
import pytest

from mimoassoc.core import Partition
from mimoassoc.experiments import (exp1_layout, hetnet_layout, load_profile,
                                   max_peak_rate_assoc, run_centralized,
                                   run_distributed, run_maxrate,
                                   run_realizations, scaled_exp1_params,
                                   scaled_hetnet_params, stats)
from mimoassoc.topology import (BaseStation, NetworkTopology, Region, Tier,
                                UserTerminal)


def test_max_peak_rate_examples():
    rates = np.array([[1.0, 5.0, 3.0], [2.0, 2.0, 2.0]])
    part = max_peak_rate_assoc(rates)
    assert part.assoc.tolist() == [1, 0]  # max, then tie to the lowest id


def test_max_peak_rate_respects_allowed():
    rates = np.array([[1.0, 5.0]])
    allowed = np.array([[True, False]])
    assert max_peak_rate_assoc(rates, allowed).assoc.tolist() == [0]


def test_stats_nearest_rank():
    st = stats(np.arange(1.0, 101.0))
    assert st.p5 == 5.0
    st = stats(np.array([2.0, 8.0]))
    assert st.geo_mean == pytest.approx(4.0)
    assert st.arith_mean == pytest.approx(5.0)
    st = stats(np.full(7, 3.0))
    assert st.p5 == pytest.approx(3.0)
    assert st.geo_mean == pytest.approx(3.0)
    assert st.arith_mean == pytest.approx(3.0)


def test_stats_rejects_nonpositive():
    with pytest.raises(ValueError):
        stats(np.array([1.0, 0.0]))


def test_stats_am_gm_on_random():
    rng = np.random.default_rng(0)
    for _ in range(30):
        r = rng.uniform(0.01, 5.0, int(rng.integers(2, 60)))
        st = stats(r)
        assert st.geo_mean <= st.arith_mean * (1 + 1e-12)


def test_load_profile():
    region = Region(100, 100, False)
    bss = [BaseStation(0, 10, 10, Tier.MACRO, 100, 10, 46.0),
           BaseStation(1, 50, 50, Tier.SMALL, 40, 4, 35.0),
           BaseStation(2, 90, 90, Tier.SMALL, 40, 4, 35.0)]
    users = [UserTerminal(i, 5.0 * i, 5.0) for i in range(6)]
    topo = NetworkTopology(region, bss, users, seed=0)
    prof = load_profile(Partition(np.array([0, 0, 0, 1, 2, 2])), topo)
    assert prof == {"macro": [3], "small": [2, 1]}


def _single_bs_layout(seed):
    region = Region(200, 200, False)
    rng = np.random.default_rng(seed)
    bss = [BaseStation(0, 100, 100, Tier.MACRO, 100, 10, 46.0)]
    users = [UserTerminal(i, float(x), float(y))
             for i, (x, y) in enumerate(rng.uniform(0, 200, (30, 2)))]
    return NetworkTopology(region, bss, users, seed=seed)


def test_single_bs_all_algorithms_agree():
    rep = run_realizations(_single_bs_layout, [4], gamma=1.0, i_max=50_000)
    rows = {alg: (p5, geo, am) for _, alg, p5, geo, am in rep.stats_rows}
    assert rows["centralized"] == pytest.approx(rows["maxrate"], rel=1e-5)
    assert rows["distributed"] == pytest.approx(rows["maxrate"], rel=1e-12)


def test_report_deterministic_and_parallel_consistent(tmp_path):
    layout = exp1_layout(scaled_exp1_params())
    kw = dict(gamma=1.0, i_max=50_000, algorithms=("distributed", "maxrate"))
    rep1 = run_realizations(layout, [0, 1], **kw)
    rep2 = run_realizations(layout, [0, 1], **kw)
    assert rep1.stats_rows == rep2.stats_rows
    assert rep1.gain_rows == rep2.gain_rows
    rep_par = run_realizations(layout, [0, 1], jobs=2, **kw)
    assert rep_par.stats_rows == rep1.stats_rows

    out1, out2 = tmp_path / "a", tmp_path / "b"
    rep1.write_csvs(out1)
    rep2.write_csvs(out2)
    for name in ("stats.csv", "gains.csv", "loads.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_csv_headers(tmp_path):
    layout = exp1_layout(scaled_exp1_params())
    rep = run_realizations(layout, [7], gamma=1.0, algorithms=("distributed", "maxrate"))
    rep.write_csvs(tmp_path)
    assert (tmp_path / "stats.csv").read_text().splitlines()[0] == \
        "seed,algorithm,p5,geo_mean,arith_mean"
    assert (tmp_path / "gains.csv").read_text().splitlines()[0] == \
        "seed,statistic,ratio"
    assert (tmp_path / "loads.csv").read_text().splitlines()[0] == \
        "seed,algorithm,bs_id,tier,count"
    # loads listed only for the partition-based algorithms
    algs = {line.split(",")[1] for line in
            (tmp_path / "loads.csv").read_text().splitlines()[1:]}
    assert algs == {"distributed", "maxrate"}


def test_centralized_beats_partition_algorithms():
    from mimoassoc.core import utility
    from mimoassoc.experiments import build_rates
    layout = exp1_layout(scaled_exp1_params())
    topo = layout(3)
    rates, allowed, streams = build_rates(topo)
    r_c, _, _, _ = run_centralized(rates, streams, 1.0, allowed, i_max=200_000)
    res = run_distributed(rates, streams, 1.0, allowed, seed=1)
    r_m, _ = run_maxrate(rates, streams, 1.0, allowed)
    u_c = utility(r_c, 1.0)
    assert u_c >= utility(res.throughputs, 1.0) - 1e-9
    assert u_c >= utility(r_m, 1.0) - 1e-9


def test_hetnet_desk_scale_runs_and_balances_load():
    layout = hetnet_layout(scaled_hetnet_params())
    rep = run_realizations(layout, [0, 1], gamma=1.0,
                           algorithms=("distributed", "maxrate"))
    for seed in (0, 1):
        by_alg = {}
        for s, alg, bs, tier, count in rep.load_rows:
            if s == seed:
                by_alg.setdefault(alg, []).append(count)
        assert max(by_alg["distributed"]) <= max(by_alg["maxrate"])
