"""Poisson approximation, distribution distances and the Monte Carlo harness."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import process
from .analytics import Regime, gumbel_cdf, regime_name
from .oracle import ExactPmf, exact_count_pmf, root_cluster_pmf

MAX_BERNOULLI = 30


def poisson_pmf(lam: float, j: int) -> float:
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if j < 0:
        return 0.0
    return math.exp(j * math.log(lam) - lam - math.lgamma(j + 1))


def poisson_law(lam: float) -> ExactPmf:
    """Poisson(lam) truncated where the remaining mass is negligible (< 1e-15)."""
    jmax = int(lam + 20 * math.sqrt(lam) + 40)
    return ExactPmf.from_dict({j: poisson_pmf(lam, j) for j in range(jmax + 1)})


def lecam_bound(qs) -> float:
    """Le Cam's bound ``2 sum q_i^2`` on the L1 distance to Poisson(sum q_i)."""
    qs = np.asarray(qs, dtype=float)
    if qs.size and (qs.min() < 0 or qs.max() > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    return float(2 * np.sum(qs**2))


def bernoulli_sum_pmf(qs, max_len: int = MAX_BERNOULLI) -> ExactPmf:
    """Exact law of a sum of independent Bernoulli(q_i) variables."""
    qs = [float(q) for q in qs]
    if len(qs) > max_len:
        raise ValueError(f"at most {max_len} summands, got {len(qs)}")
    if any(not 0 <= q <= 1 for q in qs):
        raise ValueError("probabilities must lie in [0, 1]")
    pmf = np.array([1.0])
    for q in qs:
        pmf = np.append(pmf * (1 - q), 0.0) + np.append(0.0, pmf * q)
    return ExactPmf(tuple(range(len(pmf))), tuple(pmf.tolist()))


def _as_weights(f) -> dict[int, float]:
    if isinstance(f, ExactPmf):
        return f.as_dict()
    return {int(k): float(v) for k, v in dict(f).items()}


def l1_distance(f, g, tol: float = 1e-9) -> float:
    """``sum_j |f(j) - g(j)|`` over the union of the supports."""
    fw, gw = _as_weights(f), _as_weights(g)
    for w in (fw, gw):
        if abs(math.fsum(w.values()) - 1) > tol or any(v < 0 for v in w.values()):
            raise ValueError("pmf is not normalised")
    keys = set(fw) | set(gw)
    return math.fsum(abs(fw.get(k, 0.0) - gw.get(k, 0.0)) for k in keys)


def tv_distance(f, g, tol: float = 1e-9) -> float:
    """Total variation distance, half the L1 distance."""
    return min(1.0, 0.5 * l1_distance(f, g, tol))


def ks_distance(samples, reference: str = "exp", mu: float = 0.0, scale: float = 2.0) -> float:
    """Kolmogorov distance between the empirical CDF and ``Exp(1)`` or ``Gumbel(mu, scale)``."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("no samples")
    if reference == "exp":
        cdf = sps.expon.cdf
    elif reference == "gumbel":
        cdf = np.vectorize(lambda r: gumbel_cdf(r, mu, scale))
    else:
        raise ValueError(f"unknown reference law {reference!r}")
    return float(sps.kstest(samples, cdf).statistic)


def divergence_check(means, xs=None, stderrs=None, confidence: float = 0.95) -> bool:
    """Do the ``means`` increase along the grid, beyond Monte Carlo noise?

    Without ``stderrs`` the means are taken as exact and must be strictly
    increasing.  With ``stderrs`` a least-squares line of ``means`` against
    ``xs`` (grid positions by default) must have a slope that is positive at
    the given one-sided confidence, its uncertainty propagated from the
    standard errors, and no step may drop by more than two standard errors.
    """
    y = np.asarray(means, dtype=float)
    if y.size < 3:
        raise ValueError("need at least three grid points")
    if stderrs is None:
        return bool(np.all(np.diff(y) > 0))
    se = np.asarray(stderrs, dtype=float)
    if se.shape != y.shape:
        raise ValueError("one standard error per mean")
    x = np.arange(y.size, dtype=float) if xs is None else np.asarray(xs, dtype=float)
    dx = x - x.mean()
    sxx = float(np.sum(dx**2))
    slope = float(np.sum(dx * (y - y.mean())) / sxx)
    slope_se = math.sqrt(float(np.sum(dx**2 * se**2))) / sxx
    no_drop = bool(np.all(np.diff(y) > -2 * np.hypot(se[1:], se[:-1])))
    if slope_se == 0:
        return slope > 0 and no_drop
    return no_drop and slope / slope_se > sps.norm.ppf(confidence)


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------

STATISTICS = ("exceed", "equal", "largest", "root", "tau")


def parse_statistic(spec: str) -> tuple[str, int | None]:
    """``"exceed:2"`` -> ``("exceed", 2)``; ``"largest"`` -> ``("largest", None)``."""
    name, _, arg = spec.partition(":")
    if name not in STATISTICS:
        raise ValueError(f"unknown statistic {spec!r}; choose from {', '.join(STATISTICS)}")
    if name in ("exceed", "equal"):
        if not arg:
            raise ValueError(f"{name} needs an integer argument, e.g. {name}:2")
        value = int(arg)
        if value < (0 if name == "exceed" else 1):
            raise ValueError(f"invalid argument in {spec!r}")
        return name, value
    if arg:
        raise ValueError(f"{name} takes no argument")
    return name, None


def default_threads() -> int:
    env = os.environ.get("YULE_PERC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class McConfig:
    n: int
    regime: Regime
    statistic: str
    replicates: int = 10_000
    master_seed: int = 0
    threads: int = 1
    poisson: float | None = None
    oracle: bool = False
    ks: str | None = None
    gumbel_mu: float = 0.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        name, arg = parse_statistic(self.statistic)
        if self.ks not in (None, "exp", "gumbel"):
            raise ValueError(f"unknown KS reference {self.ks!r}")
        if self.oracle and name not in ("exceed", "root"):
            raise ValueError("an exact oracle exists only for exceed:x and root")

    def to_dict(self) -> dict:
        regime = {"kind": regime_name(self.regime), **self.regime.__dict__}
        return {
            "n": self.n,
            "regime": regime,
            "p": self.p,
            "statistic": self.statistic,
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "threads": self.threads,
            "poisson": self.poisson,
            "oracle": self.oracle,
            "ks": self.ks,
        }

    @property
    def p(self) -> float:
        return self.regime.p(self.n)


@dataclass
class McReport:
    config: McConfig
    values: np.ndarray = field(repr=False)
    empirical_pmf: ExactPmf | None
    mean: float
    variance: float
    std_error: float
    distances: dict[str, float]

    @property
    def replicates(self) -> int:
        return int(self.values.size)

    def to_dict(self) -> dict:
        pmf = None
        if self.empirical_pmf is not None:
            pmf = {str(k): q for k, q in self.empirical_pmf.as_dict().items()}
        return {
            "config": self.config.to_dict(),
            "replicates": self.replicates,
            "mean": self.mean,
            "variance": self.variance,
            "std_error": self.std_error,
            "empirical_pmf": pmf,
            "distances": dict(self.distances),
        }


def _statistic(state: process.ClusterState, name: str, arg: int | None) -> int:
    if name == "exceed":
        return process.count_exceeding(state, arg)
    if name == "equal":
        return process.count_equal(state, arg)
    if name == "largest":
        return process.largest(state)
    return int(state.sizes[0])


def simulate_many(
    n: int,
    p: float,
    statistics: list[str],
    replicates: int,
    master_seed: int = 0,
    threads: int = 1,
) -> dict[str, np.ndarray]:
    """Several statistics evaluated on the same replicates.

    Replicate ``i`` is drawn from ``SeedSpec(master_seed, i)`` and its values
    land in row ``i`` whatever the thread layout.
    """
    parsed = [parse_statistic(spec) for spec in statistics]
    out = np.empty((replicates, len(parsed)), dtype=float)
    needs_state = any(name != "tau" for name, _ in parsed)

    def work(chunk: range) -> None:
        for i in chunk:
            rng = process.SeedSpec(master_seed, i).generator()
            state = None
            if needs_state:
                state = process.grow_chain(n, p, rng)
            for col, (name, arg) in enumerate(parsed):
                if name == "tau":
                    out[i, col] = n * math.exp(-process.sample_tau(n, rng))
                else:
                    out[i, col] = _statistic(state, name, arg)

    workers = max(1, min(threads, replicates))
    if workers == 1:
        work(range(replicates))
    else:
        bounds = np.linspace(0, replicates, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]))
    return {spec: out[:, col].copy() for col, spec in enumerate(statistics)}


def simulate_values(config: McConfig) -> np.ndarray:
    """Statistic of every replicate of ``config``."""
    name, _ = parse_statistic(config.statistic)
    p = 0.0 if name == "tau" else config.p
    return simulate_many(
        config.n, p, [config.statistic], config.replicates, config.master_seed, config.threads
    )[config.statistic]


def summarize(config: McConfig, values: np.ndarray) -> McReport:
    name, arg = parse_statistic(config.statistic)
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    variance = float(values.var(ddof=1)) if values.size > 1 else 0.0
    discrete = name != "tau"
    pmf = ExactPmf.from_samples(values.astype(np.int64)) if discrete else None

    distances: dict[str, float] = {}
    if config.poisson is not None and pmf is not None:
        distances["tv_poisson"] = tv_distance(pmf, poisson_law(config.poisson))
    if config.oracle and pmf is not None:
        if name == "exceed":
            exact = exact_count_pmf(config.n, config.p, arg)
        else:
            exact = root_cluster_pmf(config.n, config.p)
        distances["tv_oracle"] = tv_distance(pmf, exact)
    if config.ks is not None:
        distances[f"ks_{config.ks}"] = ks_distance(values, config.ks, mu=config.gumbel_mu)
    return McReport(
        config=config,
        values=values,
        empirical_pmf=pmf,
        mean=mean,
        variance=variance,
        std_error=math.sqrt(variance / values.size),
        distances=distances,
    )


def run_mc(config: McConfig) -> McReport:
    """Simulate ``config.replicates`` independent replicates and summarise them.

    Replicate ``i`` always uses the stream ``SeedSpec(master_seed, i)``, so the
    report does not depend on ``threads``.
    """
    return summarize(config, simulate_values(config))
