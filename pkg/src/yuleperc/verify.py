"""Named verification scenarios pairing predictions with simulation and oracles.

Each scenario returns a list of :class:`Check` rows; the CLI prints them as a
pass/fail table.  Defaults are the desk-scale settings of the acceptance suite.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import analytics, oracle, process, stats


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    bound: float
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _le(name: str, value: float, bound: float, detail: str = "") -> Check:
    return Check(name, bool(value <= bound), float(value), float(bound), detail)


def _ge(name: str, value: float, bound: float, detail: str = "") -> Check:
    return Check(name, bool(value >= bound), float(value), float(bound), detail)


def bounded(
    ell: int = 2, a: float = 1.0, n: int = 10**6, reps: int = 2000, seed: int = 0, threads: int = 1
) -> list[Check]:
    regime = analytics.Bounded(ell, a)
    lam = math.factorial(ell) * a**ell
    top, over = f"equal:{ell + 1}", f"exceed:{ell + 1}"
    vals = stats.simulate_many(n, regime.p(n), [top, over], reps, seed, threads)
    delta = vals[top]
    return [
        _le(f"|mean Delta({ell + 1}) - {lam:g}|", abs(delta.mean() - lam), 0.15),
        _le(
            f"TV(Delta({ell + 1}), Poisson({lam:g}))",
            stats.tv_distance(oracle.ExactPmf.from_samples(delta), stats.poisson_law(lam)),
            0.05,
        ),
        _le(f"P(N({ell + 1}) >= 1)", float(np.mean(vals[over] >= 1)), 0.02),
    ]


def critical(
    a: float = 1.0, n: int = 10**6, reps: int = 3000, window: float = 15.0, seed: int = 0, threads: int = 1
) -> list[Check]:
    p = analytics.Critical(a).p(n)
    b_n = analytics.threshold_b(n, a)
    c_max = stats.simulate_many(n, p, ["largest"], reps, seed, threads)["largest"]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        aa, bb, rr = rng.uniform(0.1, 10), rng.uniform(0, 1), rng.uniform(-5, 5)
        mu, scale = analytics.gumbel_params(aa, bb)
        lhs = math.exp(-analytics.intensity_lambda(aa, bb, analytics.lambda_ar(aa, rr)))
        rhs = analytics.gumbel_cdf(rr, mu, scale)
        worst = max(worst, abs(lhs - rhs) / rhs)
    return [
        _le(f"P(C* > b_n + {window:g})", float(np.mean(c_max > b_n + window)), 0.05, f"b_n={b_n:.4f}"),
        _ge(f"P(C* > b_n - {window:g})", float(np.mean(c_max > b_n - window)), 0.95, f"b_n={b_n:.4f}"),
        _le("Gumbel identity, max relative error", worst, 1e-10),
    ]


def intermediate(
    n: int = 10**6, lam: float = 1.0, reps: int = 2000, seed: int = 0, threads: int = 1
) -> list[Check]:
    p = analytics.Intermediate("loglog").p(n)
    x_n = analytics.threshold_x(n, p, lam)
    lo = analytics.threshold_u(n, p, 0.5 / math.e)
    hi = analytics.threshold_u(n, p, 2 / math.e)
    specs = [f"exceed:{x_n}", f"exceed:{lo}", f"exceed:{hi}"]
    vals = stats.simulate_many(n, p, specs, reps, seed, threads)
    return [
        _le(f"|mean N({x_n}) - {lam:g}|", abs(vals[specs[0]].mean() - lam), 0.2, f"p={p:.5f}"),
        _ge(f"P(N({lo}) >= 1), u=e^-1/2", float(np.mean(vals[specs[1]] >= 1)), 0.9),
        _le(f"P(N({hi}) >= 1), u=2e^-1", float(np.mean(vals[specs[2]] >= 1)), 0.1),
    ]


def ancestral(
    n: int = 1000, p: float = 0.05, reps: int = 10**5, seed: int = 0, threads: int = 1
) -> list[Check]:
    checks = []
    worst = 0.0
    for nn in (2, 10, 100, 1000):
        for pp in (0.05, 0.1, 0.5):
            exact = analytics.ancestral_mean(nn, pp)
            worst = max(worst, abs(oracle.root_cluster_pmf(nn, pp).mean() - exact) / exact)
    checks.append(_le("root DP mean vs closed form, relative", worst, 1e-9))

    roots = stats.simulate_many(n, p, ["root"], reps, seed, threads)["root"]
    se = roots.std(ddof=1) / math.sqrt(reps)
    exact = analytics.ancestral_mean(n, p)
    checks.append(_le("|MC root mean - exact| / SE", abs(roots.mean() - exact) / se, 3.0))

    tvs = []
    for nn in (10**2, 10**3, 10**4):
        pmf = oracle.root_cluster_pmf(nn, 1 / math.log(nn))
        tvs.append(stats.tv_distance(pmf, oracle.geometric_pmf(math.exp(-1), nn)))
    decreasing = all(b < a for a, b in zip(tvs, tvs[1:]))
    checks.append(
        Check("TV(root, Geo(1/e)) decreasing in n", decreasing, tvs[-1], tvs[0], repr(tvs))
    )
    return checks


def tau(n: int = 10**4, reps: int = 10**5, seed: int = 0, threads: int = 1) -> list[Check]:
    vals = stats.simulate_many(n, 0.0, ["tau"], reps, seed, threads)["tau"]
    return [_le("KS(n exp(-tau_n), Exp(1))", stats.ks_distance(vals, "exp"), 0.02)]


def lecam(trials: int = 100, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst_gap = -math.inf
    for _ in range(trials):
        qs = rng.uniform(0, 0.5, size=rng.integers(1, 21))
        l1 = stats.l1_distance(stats.bernoulli_sum_pmf(qs), stats.poisson_law(float(qs.sum())))
        worst_gap = max(worst_gap, l1 - stats.lecam_bound(qs))
    return [_le("max(L1 - 2 sum q^2)", worst_gap, 1e-12)]


def oracle_equivalence(
    n: int = 20, p: float = 0.3, x: int = 2, reps: int = 10**5, seed: int = 0
) -> list[Check]:
    checks = []
    for nn, pp in ((7, 0.3), (8, 0.5)):
        tv = oracle.partition_tv(oracle.enumerate_tiny(nn, pp), oracle.partition_distribution(nn, pp))
        checks.append(_le(f"TV(enumeration, DP) n={nn} p={pp}", tv, 1e-9))
    exact = oracle.exact_count_pmf(n, p, x)
    chain = [
        process.count_exceeding(process.grow_chain(n, p, process.SeedSpec(seed, i)), x)
        for i in range(reps)
    ]
    rrt = [
        process.count_exceeding(process.sample_rrt_percolation(n, p, process.SeedSpec(seed, i)), x)
        for i in range(reps)
    ]
    for label, vals in (("grow_chain", chain), ("rrt_percolation", rrt)):
        tv = stats.tv_distance(oracle.ExactPmf.from_samples(vals), exact)
        checks.append(_le(f"TV({label} N({x}), exact) n={n} p={p}", tv, 0.01))
    return checks


SCENARIOS = {
    "bounded": bounded,
    "critical": critical,
    "intermediate": intermediate,
    "ancestral": ancestral,
    "tau": tau,
    "lecam": lecam,
    "oracle-equivalence": oracle_equivalence,
}
