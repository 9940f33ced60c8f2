import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yuleperc import analytics, oracle


def test_partition_small_tables():
    p = 0.37
    d = oracle.partition_distribution(3, p)
    assert d[(3,)] == pytest.approx(p * p)
    assert d[(2, 1)] == pytest.approx(2 * p * (1 - p))
    assert d[(1, 1, 1)] == pytest.approx((1 - p) ** 2)
    assert oracle.partition_distribution(4, 1.0) == {(4,): 1.0}
    assert oracle.partition_distribution(6, 0.0) == {(1,) * 6: 1.0}


def test_partition_keys_are_canonical():
    for parts in oracle.partition_distribution(12, 0.4):
        assert list(parts) == sorted(parts, reverse=True)
        assert sum(parts) == 12


@pytest.mark.parametrize("n", [1, 5, 20, 40])
@pytest.mark.parametrize("p", [0.0, 0.2, 0.5, 0.9, 1.0])
def test_mean_number_of_parts(n, p):
    d = oracle.partition_distribution(n, p)
    assert math.fsum(d.values()) == pytest.approx(1, abs=1e-9)
    mean_parts = math.fsum(len(parts) * w for parts, w in d.items())
    assert mean_parts == pytest.approx(1 + (1 - p) * (n - 1), rel=1e-10)


@pytest.mark.parametrize("n,p", [(2, 0.4), (5, 0.3), (7, 0.3), (8, 0.5), (8, 0.3), (6, 0.9)])
def test_enumeration_matches_dp(n, p):
    assert oracle.partition_tv(oracle.enumerate_tiny(n, p), oracle.partition_distribution(n, p)) <= 1e-9


def test_enumeration_examples():
    p = 0.6
    assert oracle.enumerate_tiny(2, p) == pytest.approx({(2,): p, (1, 1): 1 - p})
    d = oracle.enumerate_tiny(3, 0.25)
    assert d == pytest.approx({(3,): 0.0625, (2, 1): 0.375, (1, 1, 1): 0.5625})


def test_caps():
    with pytest.raises(ValueError):
        oracle.partition_distribution(41, 0.5)
    with pytest.raises(ValueError):
        oracle.enumerate_tiny(9, 0.5)
    with pytest.raises(ValueError):
        oracle.root_cluster_pmf(0, 0.5)


def test_count_pmf():
    assert oracle.exact_count_pmf(3, 0.5, 1).as_dict() == pytest.approx({0: 0.25, 1: 0.75})
    assert oracle.exact_count_pmf(9, 0.7, 9).as_dict() == {0: 1.0}
    pmf = oracle.exact_count_pmf(20, 0.3, 2)
    assert pmf.total() == pytest.approx(1, abs=1e-12)
    with pytest.raises(ValueError):
        oracle.exact_count_pmf(5, 0.5, -1)


def test_root_pmf_examples():
    p = 0.3
    assert oracle.root_cluster_pmf(2, p).as_dict() == pytest.approx({1: 1 - p, 2: p})
    pmf = oracle.root_cluster_pmf(3, 0.5)
    assert pmf.mean() == pytest.approx(1.875)
    # direct enumeration over the two tree shapes and four edge subsets
    assert pmf.as_dict() == pytest.approx({1: 0.375, 2: 0.375, 3: 0.25})


@pytest.mark.parametrize("n", [2, 3, 5, 8])
@pytest.mark.parametrize("p", [0.1, 0.5, 0.85])
def test_root_pmf_matches_enumeration(n, p):
    a = oracle.root_cluster_pmf(n, p).as_dict()
    b = oracle.enumerate_tiny_root(n, p).as_dict()
    assert set(a) == set(b)
    for k in a:
        assert a[k] == pytest.approx(b[k], abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 1000), p=st.floats(0.01, 1.0))
def test_root_mean_matches_closed_form(n, p):
    exact = analytics.ancestral_mean(n, p)
    assert oracle.root_cluster_pmf(n, p).mean() == pytest.approx(exact, rel=1e-9)


def test_root_degenerate():
    assert oracle.root_cluster_pmf(10, 0.0).as_dict() == {1: 1.0}
    assert oracle.root_cluster_pmf(10, 1.0).as_dict() == {10: 1.0}


def test_geometric_pmf():
    g = oracle.geometric_pmf(0.5, 10)
    assert g.total() == pytest.approx(1)
    assert g[1] == 0.5 and g[11] == pytest.approx(0.5**10)


def test_exact_pmf_validation():
    with pytest.raises(ValueError):
        oracle.ExactPmf((1, 0), (0.5, 0.5))
    with pytest.raises(ValueError):
        oracle.ExactPmf((0,), (-1.0,))
    pmf = oracle.ExactPmf.from_samples([1, 1, 2, 4])
    assert pmf.as_dict() == {1: 0.5, 2: 0.25, 4: 0.25}
    assert pmf.mean() == pytest.approx(2.0)
    assert pmf.variance() == pytest.approx(1.5)
