"""Samplers for the Yule process with neutral mutations.

Two independent constructions of the cluster-size vector at the instant the
population reaches ``n``:

* :func:`grow_chain` runs the embedded jump chain of the population system.
* :func:`sample_rrt_percolation` builds a random recursive tree, percolates
  its edges and collects components with a union-find.

Both return a :class:`ClusterState` whose ``sizes`` are ordered by the birth
of the genetic type (equivalently, by the smallest vertex label of the
cluster).  :func:`sample_tau` draws the continuous-time birth instant of the
``n``-th individual.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SeedSpec:
    """Address of one reproducible random stream."""

    master_seed: int
    replicate_index: int = 0

    def __post_init__(self) -> None:
        if self.master_seed < 0 or self.replicate_index < 0:
            raise ValueError("seeds must be non-negative integers")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.replicate_index,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True, eq=False)
class ClusterState:
    """Cluster sizes of one realization, indexed by birth order of the types."""

    n: int
    sizes: np.ndarray

    def __post_init__(self) -> None:
        sizes = np.asarray(self.sizes, dtype=np.int64)
        if sizes.ndim != 1 or sizes.size == 0:
            raise ValueError("sizes must be a non-empty 1-d sequence")
        if sizes.min() < 1:
            raise ValueError("every cluster has at least one member")
        if int(sizes.sum()) != self.n:
            raise ValueError(f"sizes sum to {int(sizes.sum())}, expected {self.n}")
        object.__setattr__(self, "sizes", sizes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClusterState):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.sizes, other.sizes)

    @property
    def num_types(self) -> int:
        return int(self.sizes.size)

    def partition(self) -> tuple[int, ...]:
        """Sizes sorted in decreasing order (the order-free partition of n)."""
        return tuple(sorted(self.sizes.tolist(), reverse=True))


def _check_args(n: int, p: float) -> None:
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")


def _as_generator(seed: SeedSpec | np.random.Generator) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return seed.generator()


def grow_chain(n: int, p: float, seed: SeedSpec | np.random.Generator) -> ClusterState:
    """Sample ``(Y_1(tau_n), Y_2(tau_n), ...)`` via the embedded jump chain.

    Individual ``k`` (0-based, ``k >= 1``) is a clone with probability ``p``
    and then joins the type of a uniform parent among ``0..k-1``; otherwise it
    founds a new type.  This gives the jump probabilities ``1 - p`` (new type)
    and ``p * c / k`` (grow a type of size ``c``).  Only clones need a parent,
    and the type label of every clone is resolved by pointer doubling over the
    flat label array, so one replicate costs a handful of vectorised passes.
    """
    _check_args(n, p)
    rng = _as_generator(seed)
    if n == 1:
        return ClusterState(1, np.ones(1, dtype=np.int64))

    clones = np.flatnonzero(rng.random(n - 1) < p) + 1
    label = np.arange(n, dtype=np.int64)
    if clones.size:
        current = rng.integers(0, clones)
        label[clones] = current
        # mutants are fixed points of ``label``; clone chains have length
        # O(log n), so doubling terminates after O(log log n) rounds
        while True:
            nxt = label[current]
            if np.array_equal(nxt, current):
                break
            label[clones] = nxt
            current = nxt
    counts = np.bincount(label, minlength=n)
    return ClusterState(n, counts[counts > 0])


class _UnionFind:
    def __init__(self, size: int) -> None:
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        # keep the smaller label as representative: it is the cluster root
        if ra < rb:
            self.parent[rb] = ra
        else:
            self.parent[ra] = rb


def sample_rrt_percolation(n: int, p: float, seed: SeedSpec | np.random.Generator) -> ClusterState:
    """Bernoulli(p) bond percolation on a uniform random recursive tree.

    Vertex ``k + 1`` attaches to a uniform vertex of ``{1..k}``; each edge is
    kept independently with probability ``p``.  Components are returned in
    increasing order of their smallest vertex label, so the first entry is
    the root cluster.
    """
    _check_args(n, p)
    rng = _as_generator(seed)
    if n == 1:
        return ClusterState(1, np.ones(1, dtype=np.int64))

    parents = rng.integers(0, np.arange(1, n))
    kept = rng.random(n - 1) < p
    uf = _UnionFind(n)
    for child, (parent, keep) in enumerate(zip(parents.tolist(), kept.tolist()), start=1):
        if keep:
            uf.union(parent, child)
    sizes: dict[int, int] = {}
    for v in range(n):
        r = uf.find(v)
        sizes[r] = sizes.get(r, 0) + 1
    return ClusterState(n, np.array([sizes[r] for r in sorted(sizes)], dtype=np.int64))


def sample_tau(n: int, seed: SeedSpec | np.random.Generator) -> float:
    """Birth time of the ``n``-th individual in a standard Yule process.

    ``tau_n`` is a sum of independent ``Exp(j)`` holding times, j < n, which
    has the law of the maximum of ``n - 1`` standard exponentials (Renyi).
    The maximum is drawn by inversion from a single uniform.
    """
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    rng = _as_generator(seed)
    if n == 1:
        return 0.0
    u = rng.random()
    # P(max <= t) = (1 - e^{-t})^{n-1}  =>  t = -log(1 - u^{1/(n-1)})
    return float(-np.log(-np.expm1(np.log(u) / (n - 1))))


def sample_tau_by_sum(n: int, seed: SeedSpec | np.random.Generator) -> float:
    """``tau_n`` as the explicit sum of holding times ``E_j / j``, j = 1..n-1."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    rng = _as_generator(seed)
    if n == 1:
        return 0.0
    return float(np.sum(rng.standard_exponential(n - 1) / np.arange(1, n)))


def count_exceeding(state: ClusterState, x: int) -> int:
    """Number of clusters of size strictly greater than ``x``."""
    return int(np.count_nonzero(state.sizes > x))


def count_equal(state: ClusterState, ell: int) -> int:
    """Number of clusters of size exactly ``ell``."""
    return int(np.count_nonzero(state.sizes == ell))


def largest(state: ClusterState) -> int:
    return int(state.sizes.max())
