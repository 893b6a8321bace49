"""Consensus partitions by clustering the pooled cluster vectors of many partitions.

Every cluster of every input partition becomes one normalized vector in
R^rho, weighted by its mass over n. Those vectors are grouped into k groups
(weighted Lloyd or agglomerative), and each data point then joins the group
representative it has the largest inner product with.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage

from .embed import embed_partition, normalize_rows
from .kernels import FeatureMap, lift_points
from .partitions import DataSet, Partition, check, check_weights, cluster_masses

__all__ = [
    "ConsensusConfig",
    "ConsensusResult",
    "Pool",
    "pool",
    "lift_ssd",
    "weighted_kmeans",
    "consensus_kmeans",
    "consensus_hac",
    "assign_points",
    "run_consensus",
]

log = logging.getLogger(__name__)

MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class ConsensusConfig:
    k: int
    method: str = "kmeans"
    kmeans_restarts: int = 10
    kmeans_max_iters: int = 300
    hac_linkage: str = "average"
    seed: int = 0
    output_kind: str = "hard"

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if self.method not in ("kmeans", "hac"):
            raise ValueError(f"method must be 'kmeans' or 'hac', got {self.method!r}")
        if self.kmeans_restarts < 1 or self.kmeans_max_iters < 1:
            raise ValueError("kmeans_restarts and kmeans_max_iters must be at least 1")
        if self.hac_linkage not in ("average", "complete", "single"):
            raise ValueError(f"unsupported linkage {self.hac_linkage!r}")
        if self.output_kind not in ("hard", "soft"):
            raise ValueError(f"output_kind must be 'hard' or 'soft', got {self.output_kind!r}")


@dataclass(frozen=True, eq=False)
class Pool:
    """Pooled normalized cluster vectors ``Q``.

    ``weights[i]`` is the cluster mass over n, so each input partition
    contributes total weight one. ``provenance[i]`` is ``(partition index,
    cluster index)``.
    """

    vectors: np.ndarray
    weights: np.ndarray
    provenance: tuple

    def __len__(self):
        return self.vectors.shape[0]

    def canonical_order(self) -> np.ndarray:
        """Indices sorting Q by vector content, then weight.

        Makes seeded clustering independent of the order partitions and
        clusters were supplied in.
        """
        keys = [self.weights] + [self.vectors[:, c] for c in range(self.vectors.shape[1] - 1, -1, -1)]
        return np.lexsort(keys)


@dataclass(frozen=True, eq=False)
class ConsensusResult:
    representatives: np.ndarray
    objective: float
    groups: np.ndarray
    provenance: dict
    history: list = field(default_factory=list)
    consensus: Partition | None = None
    dropped: tuple = ()
    fallback_rows: tuple = ()


def pool(fm: FeatureMap, ds: DataSet, partitions, w=None) -> Pool:
    partitions = list(partitions)
    if not partitions:
        raise ValueError("need at least one partition")
    w = check_weights(w, ds.n)
    Z = lift_points(fm, ds.points)
    vecs, wts, prov = [], [], []
    for i, p in enumerate(partitions):
        check(p, ds)
        V = normalize_rows(embed_partition(fm, ds, p, w, lifted=Z), [(i, j) for j in range(p.k)])
        vecs.append(V)
        wts.append(cluster_masses(p, w) / ds.n)
        prov.extend((i, j) for j in range(p.k))
    return Pool(np.vstack(vecs), np.concatenate(wts), tuple(prov))


def lift_ssd(Q: Pool, V) -> float:
    """``sum_q weight(q) * min_v |q - v|^2``."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.shape[0] == 0:
        raise ValueError("need at least one representative")
    if V.shape[1] != Q.vectors.shape[1]:
        raise ValueError(f"rho mismatch: {V.shape[1]} vs {Q.vectors.shape[1]}")
    return float(Q.weights @ _sqdist(Q.vectors, V).min(axis=1))


def _sqdist(X, C):
    # exact differences; the expanded |x|^2 - 2xc + |c|^2 form loses the
    # zeros that identical vectors should produce
    return np.sum((X[:, None, :] - C[None, :, :]) ** 2, axis=2)


def _seed_centers(X, w, k, rng):
    """Weighted k-means++: first center with probability ~ w, then ~ w * D^2."""
    s = X.shape[0]
    chosen = [int(rng.choice(s, p=w / w.sum()))]
    d2 = _sqdist(X, X[chosen])[:, 0]
    for _ in range(1, k):
        score = w * d2
        score[chosen] = 0.0
        if not score.sum() > 0:
            score = w.copy()
            score[chosen] = 0.0
        nxt = int(rng.choice(s, p=score / score.sum()))
        chosen.append(nxt)
        d2 = np.minimum(d2, _sqdist(X, X[[nxt]])[:, 0])
    return X[chosen].copy()


def _weighted_mean(X, w):
    # normalize first so a lone member is reproduced exactly
    return (w / w.sum()) @ X


def _lloyd(X, w, C, max_iters):
    history = []
    labels = None
    for _ in range(max_iters):
        D = _sqdist(X, C)
        new = np.argmin(D, axis=1)
        history.append(float(w @ D[np.arange(X.shape[0]), new]))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(C.shape[0]):
            mask = labels == j
            if np.any(w[mask] > 0):
                C[j] = _weighted_mean(X[mask], w[mask])
    return C, labels, history


def _result(Q, order, V, labels_canon, history):
    groups = np.empty(len(Q), dtype=int)
    groups[order] = labels_canon
    prov = {Q.provenance[i]: int(groups[i]) for i in range(len(Q))}
    return ConsensusResult(V, lift_ssd(Q, V), groups, prov, history)


def weighted_kmeans(X, w, k: int, restarts: int = 10, max_iters: int = 300, seed: int = 0):
    """Weighted Lloyd iterations from k-means++ seeds, best of ``restarts``.

    Restart ``r`` draws from ``numpy.random.default_rng([seed, r])``. Returns
    ``(centers, labels, history)`` where ``history`` holds the objective after
    every assignment step of the winning restart; the first entry is the
    objective of the seeding itself.
    """
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    if X.shape[0] < k:
        raise ValueError(f"cannot form {k} groups from {X.shape[0]} vectors")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        C0 = _seed_centers(X, w, k, rng)
        C, labels, hist = _lloyd(X, w, C0, max_iters)
        if any(b > a + MONOTONE_TOL for a, b in zip(hist, hist[1:])):
            raise ArithmeticError(f"Lloyd objective increased in restart {r}: {hist}")
        if best is None or hist[-1] < best[2][-1]:
            best = (C, labels, hist)
    return best


def consensus_kmeans(Q: Pool, cfg: ConsensusConfig) -> ConsensusResult:
    """Group the pooled vectors with :func:`weighted_kmeans`, weights = cluster mass / n."""
    if len(Q) < cfg.k:
        raise ValueError(f"cannot form {cfg.k} groups from {len(Q)} pooled vectors")
    order = Q.canonical_order()
    C, labels, hist = weighted_kmeans(
        Q.vectors[order], Q.weights[order], cfg.k, cfg.kmeans_restarts, cfg.kmeans_max_iters, cfg.seed
    )
    return _result(Q, order, C, labels, hist)


def consensus_hac(Q: Pool, cfg: ConsensusConfig) -> ConsensusResult:
    """Agglomerate pooled vectors with ``cfg.hac_linkage`` until ``cfg.k`` groups remain.

    Representatives are the weighted means of the groups.
    """
    if len(Q) < cfg.k:
        raise ValueError(f"cannot form {cfg.k} groups from {len(Q)} pooled vectors")
    order = Q.canonical_order()
    X, w = Q.vectors[order], Q.weights[order]
    if len(Q) == 1:
        labels = np.zeros(1, dtype=int)
    else:
        Z = linkage(X, method=cfg.hac_linkage, metric="euclidean")
        labels = cut_tree(Z, n_clusters=cfg.k)[:, 0]
    V = np.vstack([_weighted_mean(X[labels == j], w[labels == j]) for j in range(cfg.k)])
    return _result(Q, order, V, labels, [])


def assign_points(fm: FeatureMap, ds: DataSet, V, output_kind: str = "hard", report: dict | None = None) -> Partition:
    """Reassign data points to representatives by inner product with their lift.

    Hard output takes the argmax (lowest index on ties). Soft output weights
    each representative by the clamped-at-zero inner product; rows with no
    positive inner product fall back to the hard argmax. Representatives
    that end up with no weight are dropped with a warning. ``report``, when
    given, receives ``"dropped"`` and ``"fallback_rows"``.
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.shape[0] == 0:
        raise ValueError("need at least one representative")
    if V.shape[1] != fm.rho:
        raise ValueError(f"representatives have dimension {V.shape[1]}, feature map has rho={fm.rho}")
    S = lift_points(fm, ds.points) @ V.T
    n, k = S.shape
    hard = np.zeros((n, k))
    hard[np.arange(n), np.argmax(S, axis=1)] = 1.0
    fallback = ()
    if output_kind == "hard":
        A = hard
    elif output_kind == "soft":
        A = np.maximum(S, 0.0)
        sums = A.sum(axis=1)
        dead = np.flatnonzero(~(sums > 0))
        A[dead] = hard[dead]
        sums[dead] = 1.0
        A /= sums[:, None]
        fallback = tuple(int(i) for i in dead)
        if fallback:
            log.info("%d rows had no positive inner product; used hard argmax", len(fallback))
    else:
        raise ValueError(f"output_kind must be 'hard' or 'soft', got {output_kind!r}")
    keep = np.flatnonzero(A.any(axis=0))
    dropped = tuple(int(j) for j in range(k) if j not in set(keep.tolist()))
    if dropped:
        warnings.warn(f"consensus clusters {list(dropped)} received no points and were dropped", RuntimeWarning)
    if report is not None:
        report["dropped"] = dropped
        report["fallback_rows"] = fallback
    return check(Partition(A[:, keep], tuple(int(j) for j in keep), output_kind), ds)


def run_consensus(fm: FeatureMap, ds: DataSet, partitions, w=None, cfg: ConsensusConfig | None = None) -> ConsensusResult:
    """Pool, group, and reassign points; the end-to-end consensus procedure."""
    if cfg is None:
        raise ValueError("a ConsensusConfig with k is required")
    Q = pool(fm, ds, partitions, w)
    res = consensus_kmeans(Q, cfg) if cfg.method == "kmeans" else consensus_hac(Q, cfg)
    report = {}
    part = assign_points(fm, ds, res.representatives, cfg.output_kind, report)
    return ConsensusResult(
        res.representatives,
        res.objective,
        res.groups,
        res.provenance,
        res.history,
        part,
        report["dropped"],
        report["fallback_rows"],
    )
