import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yuleperc import analytics, oracle, stats


def test_poisson_pmf():
    assert stats.poisson_pmf(2, 0) == pytest.approx(math.exp(-2))
    assert stats.poisson_pmf(2, 1) == pytest.approx(2 * math.exp(-2))
    tiny = stats.poisson_pmf(1, 100)
    assert tiny > 0
    assert math.log(tiny) == pytest.approx(-1 - math.lgamma(101))
    for lam in (0.01, 1, 7.5, 300):
        assert stats.poisson_law(lam).total() == pytest.approx(1, abs=1e-9)


def test_lecam_bound():
    assert stats.lecam_bound([0.5]) == 0.5
    assert stats.lecam_bound([]) == 0
    assert stats.lecam_bound([0.1] * 10) == pytest.approx(0.2)


def test_bernoulli_sum():
    assert stats.bernoulli_sum_pmf([0.5, 0.5]).as_dict() == pytest.approx({0: 0.25, 1: 0.5, 2: 0.25})
    assert stats.bernoulli_sum_pmf([1.0]).as_dict() == {0: 0.0, 1: 1.0}
    with pytest.raises(ValueError):
        stats.bernoulli_sum_pmf([0.1] * 31)


@settings(max_examples=100, deadline=None)
@given(qs=st.lists(st.floats(0, 0.5), min_size=1, max_size=20))
def test_lecam_inequality(qs):
    law = stats.bernoulli_sum_pmf(qs)
    lam = sum(qs)
    if lam == 0:
        return
    pois = stats.poisson_law(lam)
    assert stats.l1_distance(law, pois) <= stats.lecam_bound(qs) + 1e-12
    assert stats.tv_distance(law, pois) <= sum(q * q for q in qs) + 1e-12


def test_tv_examples():
    f = {0: 0.2, 3: 0.8}
    assert stats.tv_distance(f, f) == 0
    assert stats.tv_distance({0: 1}, {1: 1}) == 1
    assert stats.tv_distance({0: 0.5, 1: 0.5}, {0: 1}) == 0.5
    with pytest.raises(ValueError):
        stats.tv_distance({0: 0.5}, {0: 1})


pmfs = st.lists(st.floats(0.01, 1), min_size=1, max_size=8).map(
    lambda w: {i: v / sum(w) for i, v in enumerate(w)}
)


@settings(max_examples=60, deadline=None)
@given(f=pmfs, g=pmfs, h=pmfs)
def test_tv_axioms(f, g, h):
    assert stats.tv_distance(f, g) == pytest.approx(stats.tv_distance(g, f))
    assert stats.tv_distance(f, h) <= stats.tv_distance(f, g) + stats.tv_distance(g, h) + 1e-12
    assert stats.tv_distance(f, f) == 0


def test_ks_distance():
    rng = np.random.default_rng(1)
    assert stats.ks_distance(rng.exponential(size=100_000), "exp") <= 0.01
    assert stats.ks_distance(np.full(100, 0.5), "exp") >= 1 - math.exp(-0.5) - 1e-12
    mu = 1.3
    draws = rng.gumbel(mu, 2.0, size=20_000)
    assert stats.ks_distance(draws, "gumbel", mu=mu) <= 0.02
    with pytest.raises(ValueError):
        stats.ks_distance([], "exp")
    with pytest.raises(ValueError):
        stats.ks_distance([1.0], "normal")


def test_divergence_check_exact():
    assert stats.divergence_check([1, 2, 4, 8])
    assert not stats.divergence_check([5, 5, 5, 5])
    with pytest.raises(ValueError):
        stats.divergence_check([1, 2])


def test_divergence_check_noisy():
    se = [0.1] * 4
    assert stats.divergence_check([1.0, 1.5, 2.1, 2.4], stderrs=se)
    assert not stats.divergence_check([1.0, 1.02, 0.98, 1.01], stderrs=se)
    # a single large drop fails even with an upward trend
    assert not stats.divergence_check([1, 5, 3, 9], stderrs=se)


def test_divergence_of_top_sizes():
    regime = analytics.Bounded(2, 1)
    means, ses = [], []
    for n in (10**3, 10**4, 10**5):
        vals = stats.simulate_many(n, regime.p(n), ["equal:1"], 100, 0)["equal:1"]
        means.append(vals.mean())
        ses.append(vals.std(ddof=1) / math.sqrt(vals.size))
    assert stats.divergence_check(means, stderrs=ses)


def test_parse_statistic():
    assert stats.parse_statistic("exceed:2") == ("exceed", 2)
    assert stats.parse_statistic("largest") == ("largest", None)
    for bad in ("exceed", "equal:0", "median", "root:3", "exceed:-1"):
        with pytest.raises(ValueError):
            stats.parse_statistic(bad)


def test_default_threads(monkeypatch):
    monkeypatch.setenv("YULE_PERC_THREADS", "3")
    assert stats.default_threads() == 3
    monkeypatch.delenv("YULE_PERC_THREADS")
    assert stats.default_threads() >= 1


def test_run_mc_all_mutants():
    cfg = stats.McConfig(n=5, regime=analytics.Explicit(0.0), statistic="largest", replicates=1000)
    rep = stats.run_mc(cfg)
    assert rep.empirical_pmf.as_dict() == {1: 1.0}
    assert rep.variance == 0 and rep.std_error == 0


def test_run_mc_oracle_distance():
    cfg = stats.McConfig(
        n=20, regime=analytics.Explicit(0.3), statistic="exceed:2", replicates=20_000, oracle=True, poisson=1.0
    )
    rep = stats.run_mc(cfg)
    assert rep.distances["tv_oracle"] <= 0.02
    assert 0 <= rep.distances["tv_poisson"] <= 1
    assert rep.std_error == pytest.approx(math.sqrt(rep.variance / rep.replicates))
    assert rep.empirical_pmf.total() == pytest.approx(1)


def test_run_mc_independent_of_threads():
    base = dict(n=300, regime=analytics.Explicit(0.4), statistic="largest", replicates=200, master_seed=5)
    one = stats.run_mc(stats.McConfig(threads=1, **base))
    four = stats.run_mc(stats.McConfig(threads=4, **base))
    assert np.array_equal(one.values, four.values)
    assert one.to_dict()["mean"] == four.to_dict()["mean"]


def test_tau_statistic():
    cfg = stats.McConfig(n=1000, regime=analytics.Explicit(0.0), statistic="tau", replicates=5000, ks="exp")
    rep = stats.run_mc(cfg)
    assert rep.empirical_pmf is None
    assert rep.distances["ks_exp"] < 0.04


def test_config_validation():
    with pytest.raises(ValueError):
        stats.McConfig(n=0, regime=analytics.Explicit(0.3), statistic="largest")
    with pytest.raises(ValueError):
        stats.McConfig(n=5, regime=analytics.Explicit(0.3), statistic="largest", replicates=0)
    with pytest.raises(ValueError):
        stats.McConfig(n=5, regime=analytics.Explicit(0.3), statistic="largest", oracle=True)


def test_root_oracle_distance():
    cfg = stats.McConfig(n=50, regime=analytics.Explicit(0.5), statistic="root", replicates=20_000, oracle=True)
    rep = stats.run_mc(cfg)
    assert rep.distances["tv_oracle"] < 0.03
    assert abs(rep.mean - oracle.root_cluster_pmf(50, 0.5).mean()) < 5 * rep.std_error
