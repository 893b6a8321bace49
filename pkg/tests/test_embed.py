import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from liftclust import (
    ClusterVector,
    DataSet,
    DegenerateEmbeddingError,
    LiftConfig,
    Partition,
    build_feature_map,
    cluster_distance_approx,
    discrete,
    embed_cluster,
    exact_gamma,
    gaussian,
    kernel_eval,
    lift_point,
    median_bandwidth,
    normalize,
)
from liftclust.embed import embed_partition

from conftest import random_hard


@pytest.fixture
def fm2():
    return build_feature_map(gaussian(1.0), 2, LiftConfig(rho=128), seed=11)


def test_singleton_cluster_is_lifted_point(fm2, small_ds):
    p = Partition(np.eye(small_ds.n))
    cv = embed_cluster(fm2, small_ds, p, None, 4)
    np.testing.assert_array_equal(cv.vec, lift_point(fm2, small_ds.points[4]))
    assert cv.mass == 1.0 and not cv.normalized


def test_embedding_linear_in_weights(fm2, small_ds, rng):
    p = random_hard(rng, small_ds.n, 3)
    w = rng.random(small_ds.n) * 0.5
    a = embed_cluster(fm2, small_ds, p, w, 1)
    b = embed_cluster(fm2, small_ds, p, 2 * w, 1)
    np.testing.assert_array_equal(b.vec, 2 * a.vec)
    assert b.mass == 2 * a.mass


def test_soft_half_weights(fm2):
    ds = DataSet(np.array([[0.0, 0.0], [1.0, 2.0]]))
    p = Partition(np.array([[0.5, 0.5], [0.5, 0.5]]))
    cv = embed_cluster(fm2, ds, p, None, 0)
    expect = 0.5 * (lift_point(fm2, ds.points[0]) + lift_point(fm2, ds.points[1]))
    np.testing.assert_allclose(cv.vec, expect, rtol=1e-14, atol=1e-15)


def test_union_of_disjoint_clusters_is_sum(fm2, small_ds, rng):
    labels = rng.integers(0, 4, size=small_ds.n)
    labels[:4] = np.arange(4)
    p = Partition.from_labels(labels)
    merged = Partition.from_labels(np.where(labels >= 2, 2, labels))
    parts = embed_cluster(fm2, small_ds, p, None, 2).vec + embed_cluster(fm2, small_ds, p, None, 3).vec
    np.testing.assert_allclose(embed_cluster(fm2, small_ds, merged, None, 2).vec, parts, rtol=1e-12, atol=1e-12)


def test_embed_partition_rows_match_embed_cluster(fm2, small_ds, rng):
    p = random_hard(rng, small_ds.n, 4)
    V = embed_partition(fm2, small_ds, p)
    for j in range(4):
        np.testing.assert_allclose(V[j], embed_cluster(fm2, small_ds, p, None, j).vec, rtol=1e-12, atol=1e-12)


def test_zero_mass_rejected(fm2, small_ds):
    p = Partition.from_labels([0] * 15 + [1] * 15)
    w = np.r_[np.zeros(15), np.ones(15)]
    with pytest.raises(DegenerateEmbeddingError):
        embed_cluster(fm2, small_ds, p, w, 0)


def test_normalize_examples():
    unit = ClusterVector(np.array([0.6, 0.8]), 1.0)
    assert np.array_equal(normalize(unit).vec, unit.vec)
    n2 = normalize(ClusterVector(np.array([0.0, 2.0]), 3.0))
    np.testing.assert_array_equal(n2.vec, [0.0, 1.0])
    assert n2.normalized and n2.mass == 3.0
    v = np.array([0.3, -1.2, 0.5])
    np.testing.assert_allclose(normalize(ClusterVector(v, 1.0)).vec, normalize(ClusterVector(2 * v, 2.0)).vec, rtol=1e-15)
    assert normalize(n2) is n2


def test_normalize_refuses_tiny_norm():
    with pytest.raises(DegenerateEmbeddingError):
        normalize(ClusterVector(np.full(4, 1e-14), 1.0))


@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-6))
def test_normalize_idempotent(v):
    once = normalize(ClusterVector(np.array(v), 1.0))
    assert abs(np.linalg.norm(once.vec) - 1) <= 1e-9
    twice = normalize(ClusterVector(once.vec.copy(), 1.0))
    np.testing.assert_allclose(twice.vec, once.vec, rtol=1e-15, atol=1e-15)


def test_exact_gamma_identity_and_singletons():
    ds = DataSet(np.array([[0.0, 0.0], [1.0, 1.0], [3.0, -1.0]]))
    k = gaussian(1.5)
    p = np.array([0.2, 0.5, 0.3])
    assert exact_gamma(k, ds, p, p) == 0.0
    x, y = np.array([1.0, 0, 0]), np.array([0, 0, 1.0])
    expect = math.sqrt(2 - 2 * kernel_eval(k, ds.points[0], ds.points[2]))
    assert exact_gamma(k, ds, x, y) == pytest.approx(expect, rel=1e-12)


def test_exact_gamma_double_sum_oracle(rng):
    ds = DataSet(rng.normal(size=(12, 3)))
    k = gaussian(0.8)
    p, q = rng.random(12), rng.random(12)
    d = p - q
    total = sum(d[i] * d[j] * kernel_eval(k, ds.points[i], ds.points[j]) for i in range(12) for j in range(12))
    assert exact_gamma(k, ds, p, q) == pytest.approx(math.sqrt(total), rel=1e-10)


def test_exact_gamma_streams_large_inputs():
    rng = np.random.default_rng(3)
    ds = DataSet(rng.normal(size=(2300, 2)))
    p, q = rng.random(2300), rng.random(2300)
    k = gaussian(1.0)
    streamed = exact_gamma(k, ds, p, q)
    from liftclust import kernel_matrix

    d = p - q
    dense = math.sqrt(d @ kernel_matrix(k, ds.points) @ d)
    assert streamed == pytest.approx(dense, rel=1e-10)


@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_discrete_gamma_is_sqrt_symmetric_difference(n, seed):
    rng = np.random.default_rng(seed)
    ds = DataSet(rng.permutation(n).reshape(-1, 1).astype(float))
    a, b = rng.random(n) < 0.5, rng.random(n) < 0.5
    got = exact_gamma(discrete(), ds, a.astype(float), b.astype(float))
    assert abs(got - math.sqrt(np.sum(a ^ b))) <= 1e-9


@given(st.integers(0, 2**32 - 1))
def test_exact_gamma_pseudometric(seed):
    rng = np.random.default_rng(seed)
    ds = DataSet(rng.normal(size=(15, 2)))
    k = gaussian(1.0)
    p, q, r = rng.random((3, 15))
    assert exact_gamma(k, ds, p, q) == exact_gamma(k, ds, q, p)
    assert exact_gamma(k, ds, p, r) <= exact_gamma(k, ds, p, q) + exact_gamma(k, ds, q, r) + 1e-7


def test_approx_cluster_distance_tracks_exact_gamma():
    # clusters of <= 100 points, rho from cfg(eps=0.1, delta=0.05)
    fails = total = 0
    for seed in range(5):
        rng = np.random.default_rng(seed)
        X = rng.random((200, 2)) * 3
        ds = DataSet(X)
        k = gaussian(median_bandwidth(X))
        fm = build_feature_map(k, 2, LiftConfig(0.1, 0.05), n=200, seed=seed)
        for _ in range(10):
            a = np.zeros(200)
            b = np.zeros(200)
            a[rng.choice(200, rng.integers(1, 101), replace=False)] = 1
            b[rng.choice(200, rng.integers(1, 101), replace=False)] = 1
            # unit-mass point weights keep the distances on the scale of epsilon
            a /= a.sum()
            b /= b.sum()
            whole = Partition(np.ones((200, 1)))
            va = embed_cluster(fm, ds, whole, a, 0)
            vb = embed_cluster(fm, ds, whole, b, 0)
            total += 1
            fails += abs(cluster_distance_approx(va, vb) - exact_gamma(k, ds, a, b)) > 0.1
    assert fails / total <= 0.05


def test_cluster_distance_checks_compatibility():
    a = ClusterVector(np.ones(3), 1.0)
    with pytest.raises(ValueError):
        cluster_distance_approx(a, ClusterVector(np.ones(4), 1.0))
    with pytest.raises(ValueError):
        cluster_distance_approx(a, normalize(a))
    assert cluster_distance_approx(a, a) == 0.0
