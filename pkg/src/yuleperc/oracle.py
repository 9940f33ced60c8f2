"""Exact finite-n laws used as ground truth for the samplers and predictions."""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

PARTITION_CAP = 40
ENUMERATION_CAP = 8
ROOT_CAP = 100_000


@dataclass(frozen=True)
class ExactPmf:
    """Probability mass function on a finite, ascending integer support."""

    support: tuple[int, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.support) != len(self.probabilities):
            raise ValueError("support and probabilities differ in length")
        if list(self.support) != sorted(set(self.support)):
            raise ValueError("support must be strictly ascending")
        if any(q < 0 for q in self.probabilities):
            raise ValueError("probabilities must be non-negative")

    @classmethod
    def from_dict(cls, weights: dict[int, float]) -> ExactPmf:
        keys = sorted(weights)
        return cls(tuple(int(k) for k in keys), tuple(float(weights[k]) for k in keys))

    @classmethod
    def from_samples(cls, values) -> ExactPmf:
        vals, counts = np.unique(np.asarray(values, dtype=np.int64), return_counts=True)
        total = counts.sum()
        return cls(tuple(vals.tolist()), tuple((counts / total).tolist()))

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.support, self.probabilities))

    def total(self) -> float:
        return math.fsum(self.probabilities)

    def mean(self) -> float:
        return math.fsum(k * q for k, q in zip(self.support, self.probabilities))

    def variance(self) -> float:
        m = self.mean()
        return math.fsum((k - m) ** 2 * q for k, q in zip(self.support, self.probabilities))

    def __getitem__(self, k: int) -> float:
        return self.as_dict().get(k, 0.0)


def _normalize(weights: dict, what: str) -> dict:
    total = math.fsum(weights.values())
    if abs(total - 1.0) > 1e-9:
        raise RuntimeError(f"{what} lost normalisation: total mass {total!r}")
    if abs(total - 1.0) > 1e-12:
        weights = {key: w / total for key, w in weights.items()}
    return weights


def partition_distribution(n: int, p: float, cap: int = PARTITION_CAP) -> dict[tuple[int, ...], float]:
    """Exact law of the sorted cluster-size partition at population ``n``.

    Forward recursion over partitions: from a partition of ``k`` a new part of
    size one appears with probability ``1 - p`` and one of the ``m_c`` parts
    of size ``c`` grows with total probability ``p c m_c / k``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise ValueError(f"n={n} exceeds the partition cap {cap}")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")

    dist: dict[tuple[int, ...], float] = {(1,): 1.0}
    for k in range(1, n):
        nxt: dict[tuple[int, ...], float] = defaultdict(float)
        for parts, w in dist.items():
            if p < 1:
                nxt[parts + (1,)] += w * (1 - p)
            if p > 0:
                for c, m in _multiplicities(parts):
                    i = parts.index(c)
                    grown = tuple(sorted(parts[:i] + (c + 1,) + parts[i + 1 :], reverse=True))
                    nxt[grown] += w * p * c * m / k
        dist = dict(nxt)
    return _normalize(dist, "partition DP")


def _multiplicities(parts: tuple[int, ...]):
    for c, group in itertools.groupby(parts):
        yield c, sum(1 for _ in group)


def exact_count_pmf(n: int, p: float, x: int) -> ExactPmf:
    """Exact law of the number of clusters larger than ``x``."""
    if x < 0:
        raise ValueError("x must be >= 0")
    out: dict[int, float] = defaultdict(float)
    for parts, w in partition_distribution(n, p).items():
        out[sum(1 for c in parts if c > x)] += w
    return ExactPmf.from_dict(dict(out))


def root_cluster_pmf(n: int, p: float, cap: int = ROOT_CAP) -> ExactPmf:
    """Exact law of the ancestral cluster size ``Y_1(tau_n)``.

    The root cluster of size ``c`` absorbs individual ``k + 1`` with
    probability ``p c / k``; the recursion runs over the vector of ``c``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise ValueError(f"n={n} exceeds the quadratic-DP budget {cap}")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    probs = np.zeros(n + 1)
    probs[1] = 1.0
    sizes = np.arange(n + 1, dtype=float)
    for k in range(1, n):
        grow = p * sizes[1 : k + 1] / k * probs[1 : k + 1]
        probs[1 : k + 1] -= grow
        probs[2 : k + 2] += grow
    support = np.flatnonzero(probs > 0)
    weights = {int(c): float(probs[c]) for c in support}
    return ExactPmf.from_dict(_normalize(weights, "root-cluster DP"))


def _recursive_trees(n: int):
    """All ``(n-1)!`` parent vectors of recursive trees on ``0..n-1``."""
    return itertools.product(*(range(k) for k in range(1, n)))


def _components(n: int, edges) -> tuple[tuple[int, ...], int]:
    label = list(range(n))
    for child, parent in edges:
        # parent < child, so its label is already final
        label[child] = label[parent]
    sizes: dict[int, int] = defaultdict(int)
    for lab in label:
        sizes[lab] += 1
    parts = tuple(sorted(sizes.values(), reverse=True))
    return parts, sizes[0]


def _enumerate(n: int, p: float):
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > ENUMERATION_CAP:
        raise ValueError(f"n={n} exceeds the enumeration cap {ENUMERATION_CAP}")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    tree_weight = 1.0 / math.factorial(n - 1)
    for parents in _recursive_trees(n):
        for keep in itertools.product((False, True), repeat=n - 1):
            kept = sum(keep)
            w = tree_weight * p**kept * (1 - p) ** (n - 1 - kept)
            if w == 0:
                continue
            edges = [(child, parents[child - 1]) for child in range(1, n) if keep[child - 1]]
            yield _components(n, edges), w


def enumerate_tiny(n: int, p: float) -> dict[tuple[int, ...], float]:
    """Brute force over every recursive tree and every kept-edge subset."""
    out: dict[tuple[int, ...], float] = defaultdict(float)
    for (parts, _), w in _enumerate(n, p):
        out[parts] += w
    return _normalize(dict(out), "enumeration")


def enumerate_tiny_root(n: int, p: float) -> ExactPmf:
    """Root-cluster law obtained from the same brute-force enumeration."""
    out: dict[int, float] = defaultdict(float)
    for (_, root), w in _enumerate(n, p):
        out[root] += w
    return ExactPmf.from_dict(_normalize(dict(out), "enumeration"))


def partition_tv(f: dict, g: dict) -> float:
    """Total variation between two laws keyed by partitions."""
    keys = set(f) | set(g)
    return 0.5 * math.fsum(abs(f.get(key, 0.0) - g.get(key, 0.0)) for key in keys)


def geometric_pmf(success: float, kmax: int) -> ExactPmf:
    """``Geo(success)`` on ``{1, 2, ...}``; mass beyond ``kmax`` lumped at ``kmax + 1``."""
    ks = np.arange(1, kmax + 1)
    probs = success * (1 - success) ** (ks - 1)
    weights = {int(k): float(q) for k, q in zip(ks, probs)}
    weights[kmax + 1] = (1 - success) ** kmax
    return ExactPmf.from_dict(weights)
