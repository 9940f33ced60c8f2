import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yuleperc import oracle
from yuleperc.process import (
    ClusterState,
    SeedSpec,
    count_equal,
    count_exceeding,
    grow_chain,
    largest,
    sample_rrt_percolation,
    sample_tau,
    sample_tau_by_sum,
)

SAMPLERS = [grow_chain, sample_rrt_percolation]


@pytest.mark.parametrize("sampler", SAMPLERS)
def test_degenerate_cases(sampler):
    assert sampler(1, 0.5, SeedSpec(3)).sizes.tolist() == [1]
    for seed in range(5):
        assert sampler(5, 1.0, SeedSpec(seed)).sizes.tolist() == [5]
        assert sampler(5, 0.0, SeedSpec(seed)).sizes.tolist() == [1] * 5
    assert sampler(2, 1.0, SeedSpec(0)).sizes.tolist() == [2]


@pytest.mark.parametrize("sampler", SAMPLERS)
@pytest.mark.parametrize("n,p", [(0, 0.5), (-3, 0.5), (5, -0.1), (5, 1.5)])
def test_invalid_arguments(sampler, n, p):
    with pytest.raises(ValueError):
        sampler(n, p, SeedSpec(0))


@pytest.mark.parametrize("sampler", SAMPLERS)
def test_n3_partition_law(sampler):
    reps = 20_000
    counts = {}
    for i in range(reps):
        part = sampler(3, 0.5, SeedSpec(11, i)).partition()
        counts[part] = counts.get(part, 0) + 1
    expected = {(3,): 0.25, (2, 1): 0.5, (1, 1, 1): 0.25}
    for part, q in expected.items():
        se = math.sqrt(q * (1 - q) / reps)
        assert abs(counts[part] / reps - q) < 5 * se


@pytest.mark.parametrize("sampler", SAMPLERS)
def test_reproducible_streams(sampler):
    a = sampler(500, 0.4, SeedSpec(7, 3))
    b = sampler(500, 0.4, SeedSpec(7, 3))
    c = sampler(500, 0.4, SeedSpec(7, 4))
    assert a == b
    assert a != c


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 3000),
    p=st.floats(0, 1),
    seed=st.integers(0, 2**32),
    which=st.sampled_from(SAMPLERS),
)
def test_sizes_form_a_composition_of_n(n, p, seed, which):
    s = which(n, p, SeedSpec(seed))
    assert s.sizes.sum() == n
    assert s.sizes.min() >= 1
    assert s.sizes[0] >= 1


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 500), p=st.floats(0, 1), seed=st.integers(0, 2**20), ell=st.integers(1, 20))
def test_equal_is_difference_of_exceeding(n, p, seed, ell):
    s = grow_chain(n, p, SeedSpec(seed))
    assert count_equal(s, ell) == count_exceeding(s, ell - 1) - count_exceeding(s, ell)


def test_statistic_examples():
    s = ClusterState(5, [3, 1, 1])
    assert count_exceeding(s, 1) == 1
    assert count_exceeding(s, 0) == 3
    assert count_exceeding(ClusterState(5, [5]), 5) == 0
    assert [count_equal(s, ell) for ell in (1, 2, 3)] == [2, 0, 1]
    assert largest(s) == 3
    assert largest(ClusterState(1, [1])) == 1
    assert largest(ClusterState(5, [2, 2, 1])) == 2


def test_cluster_state_validation():
    with pytest.raises(ValueError):
        ClusterState(4, [3, 2])
    with pytest.raises(ValueError):
        ClusterState(3, [3, 0])
    with pytest.raises(ValueError):
        ClusterState(0, [])


def test_root_cluster_law_matches_oracle():
    # the first entry is the ancestral cluster in both constructions
    n, p, reps = 6, 0.6, 20_000
    exact = oracle.root_cluster_pmf(n, p)
    for sampler in SAMPLERS:
        roots = [sampler(n, p, SeedSpec(5, i)).sizes[0] for i in range(reps)]
        emp = oracle.ExactPmf.from_samples(roots)
        tv = 0.5 * sum(abs(emp[k] - exact[k]) for k in range(1, n + 1))
        assert tv < 0.02


def test_partition_law_at_n8():
    n, p, reps = 8, 0.45, 30_000
    exact = oracle.partition_distribution(n, p)
    for sampler in SAMPLERS:
        counts = {}
        for i in range(reps):
            part = sampler(n, p, SeedSpec(9, i)).partition()
            counts[part] = counts.get(part, 0) + 1
        emp = {k: v / reps for k, v in counts.items()}
        assert oracle.partition_tv(emp, exact) < 0.03


def test_tau_small_cases():
    assert sample_tau(1, SeedSpec(0)) == 0.0
    assert sample_tau_by_sum(1, SeedSpec(0)) == 0.0
    rng = SeedSpec(1).generator()
    draws = np.array([sample_tau(2, rng) for _ in range(20_000)])
    assert abs(draws.mean() - 1.0) < 5 / math.sqrt(draws.size)
    with pytest.raises(ValueError):
        sample_tau(0, SeedSpec(0))


def test_tau_representations_agree_in_mean():
    # E[tau_n] = H_{n-1}
    n, reps = 50, 20_000
    h = sum(1 / k for k in range(1, n))
    var = sum(1 / k**2 for k in range(1, n))
    for fn in (sample_tau, sample_tau_by_sum):
        rng = SeedSpec(2).generator()
        draws = np.array([fn(n, rng) for _ in range(reps)])
        assert abs(draws.mean() - h) < 5 * math.sqrt(var / reps)


def test_generator_seed_accepted():
    rng = np.random.default_rng(0)
    assert grow_chain(10, 0.5, rng).sizes.sum() == 10
