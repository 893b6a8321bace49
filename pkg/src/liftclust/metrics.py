"""Set-based comparison of hard partitions.

All metrics go through the k x k' contingency table, so they cost
O(n + k k'). Jaccard, NMI and VI are provided as baselines alongside the
Rand distance and accuracy.
"""
from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linear_sum_assignment

from .partitions import Partition, PartitionError

__all__ = [
    "contingency",
    "rand_distance",
    "rand_distance_pairs",
    "accuracy",
    "jaccard_distance",
    "nmi",
    "variation_of_information",
]


def _labels(p) -> np.ndarray:
    if isinstance(p, Partition):
        if not p.is_hard:
            raise PartitionError("not_hard", "metric needs hard partitions; harden soft input first")
        return p.hard_labels()
    return np.unique(np.asarray(p), return_inverse=True)[1].ravel()


def contingency(pa, pb) -> np.ndarray:
    """Overlap counts ``N[i, j] = |C_i ∩ C'_j|`` for two hard partitions (or label arrays)."""
    la, lb = _labels(pa), _labels(pb)
    if la.shape != lb.shape:
        raise ValueError(f"partitions cover different point counts: {la.shape[0]} vs {lb.shape[0]}")
    ka = int(la.max()) + 1 if la.size else 0
    kb = int(lb.max()) + 1 if lb.size else 0
    N = np.zeros((ka, kb), dtype=np.int64)
    np.add.at(N, (la, lb), 1)
    return N


def _pairs(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def rand_distance(pa, pb) -> float:
    """Fraction of point pairs grouped inconsistently by the two partitions."""
    N = contingency(pa, pb)
    n = int(N.sum())
    if n < 2:
        return 0.0
    same_both = _pairs(N).sum()
    same_a = _pairs(N.sum(axis=1)).sum()
    same_b = _pairs(N.sum(axis=0)).sum()
    total = n * (n - 1) // 2
    diff_both = total - same_a - same_b + same_both
    return 1.0 - (same_both + diff_both) / total


def rand_distance_pairs(pa, pb) -> float:
    """O(n^2) pair loop; reference for :func:`rand_distance`."""
    la, lb = _labels(pa), _labels(pb)
    n = la.shape[0]
    if n < 2:
        return 0.0
    bad = 0
    for i, j in itertools.combinations(range(n), 2):
        bad += (la[i] == la[j]) != (lb[i] == lb[j])
    return bad / (n * (n - 1) / 2)


def accuracy(pa, truth) -> float:
    """Best fraction of points matched under an injective cluster-to-class map.

    Requires no more clusters in ``pa`` than classes in ``truth``.
    """
    N = contingency(pa, truth)
    k, m = N.shape
    if k > m:
        raise ValueError(f"accuracy needs k <= m, got {k} clusters and {m} classes")
    rows, cols = linear_sum_assignment(N, maximize=True)
    return float(N[rows, cols].sum() / N.sum())


def jaccard_distance(pa, pb) -> float:
    N = contingency(pa, pb)
    same_both = _pairs(N).sum()
    same_a = _pairs(N.sum(axis=1)).sum()
    same_b = _pairs(N.sum(axis=0)).sum()
    denom = same_a + same_b - same_both
    return 0.0 if denom == 0 else float(1.0 - same_both / denom)


def _entropies(N):
    n = N.sum()
    P = N / n
    pa, pb = P.sum(axis=1), P.sum(axis=0)

    def h(v):
        v = v[v > 0]
        return float(-(v * np.log(v)).sum())

    nz = P > 0
    mi = float((P[nz] * np.log(P[nz] / np.outer(pa, pb)[nz])).sum())
    return h(pa), h(pb), mi


def nmi(pa, pb) -> float:
    """Mutual information normalized by the geometric mean of the entropies."""
    ha, hb, mi = _entropies(contingency(pa, pb))
    if ha == 0 and hb == 0:
        return 1.0
    if ha == 0 or hb == 0:
        return 0.0
    return float(mi / np.sqrt(ha * hb))


def variation_of_information(pa, pb, normalized: bool = False) -> float:
    """``H(A) + H(B) - 2 I(A; B)`` in nats; divided by ``log n`` when ``normalized``."""
    N = contingency(pa, pb)
    ha, hb, mi = _entropies(N)
    vi = max(ha + hb - 2.0 * mi, 0.0)
    if normalized:
        n = N.sum()
        return vi / np.log(n) if n > 1 else 0.0
    return vi
