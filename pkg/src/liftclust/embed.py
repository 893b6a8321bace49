"""Cluster representatives in the lifted space, and the exact kernel distance."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import FeatureMap, Kernel, kernel_matrix, lift_points
from .partitions import DataSet, Partition, check_weights

__all__ = [
    "NORM_FLOOR",
    "EXACT_DENSE_LIMIT",
    "DegenerateEmbeddingError",
    "ClusterVector",
    "embed_cluster",
    "embed_partition",
    "normalize",
    "exact_gamma",
    "cluster_distance_approx",
]

NORM_FLOOR = 1e-12
# above this many active points exact_gamma streams row blocks instead of
# materializing the kernel matrix
EXACT_DENSE_LIMIT = 2000
_BLOCK = 512


class DegenerateEmbeddingError(ArithmeticError):
    """A cluster has zero mass or a (near) zero lifted norm."""

    def __init__(self, message, source=None):
        super().__init__(message)
        self.source = source


@dataclass(frozen=True, eq=False)
class ClusterVector:
    vec: np.ndarray
    mass: float
    normalized: bool = False
    source: tuple = (0, 0)

    @property
    def rho(self) -> int:
        return self.vec.shape[0]


def embed_partition(fm: FeatureMap, ds: DataSet, p: Partition, w=None, lifted=None) -> np.ndarray:
    """Unnormalized representatives of every cluster, as a (k, rho) array.

    ``lifted`` may hold precomputed ``lift_points(fm, ds.points)``.
    """
    w = check_weights(w, ds.n)
    if p.n != ds.n:
        raise ValueError(f"partition has {p.n} rows but dataset has {ds.n} points")
    Z = lift_points(fm, ds.points) if lifted is None else lifted
    return (p.assignment * w[:, None]).T @ Z


def embed_cluster(fm: FeatureMap, ds: DataSet, p: Partition, w, j: int, source_id: int = 0) -> ClusterVector:
    """Weighted sum of the lifted points of cluster ``j``.

    Only points with nonzero weight in the cluster are lifted.
    """
    if not 0 <= j < p.k:
        raise IndexError(f"cluster index {j} out of range for k={p.k}")
    w = check_weights(w, ds.n)
    if p.n != ds.n:
        raise ValueError(f"partition has {p.n} rows but dataset has {ds.n} points")
    coef = w * p.assignment[:, j]
    mass = float(coef.sum())
    if not mass > 0:
        raise DegenerateEmbeddingError(f"cluster {j} has zero mass", (source_id, j))
    idx = np.flatnonzero(coef)
    vec = coef[idx] @ lift_points(fm, ds.points[idx])
    return ClusterVector(vec, mass, False, (source_id, j))


def normalize(cv: ClusterVector) -> ClusterVector:
    """Scale to unit Euclidean length; refuses norms at or below ``NORM_FLOOR``."""
    if cv.normalized:
        return cv
    norm = float(np.linalg.norm(cv.vec))
    if not norm > NORM_FLOOR:
        raise DegenerateEmbeddingError(
            f"cluster {cv.source} has lifted norm {norm:.3g} below {NORM_FLOOR:g}", cv.source
        )
    return ClusterVector(cv.vec / norm, cv.mass, True, cv.source)


def normalize_rows(V: np.ndarray, sources=None) -> np.ndarray:
    norms = np.linalg.norm(V, axis=1)
    bad = np.flatnonzero(~(norms > NORM_FLOOR))
    if bad.size:
        j = int(bad[0])
        src = sources[j] if sources is not None else j
        raise DegenerateEmbeddingError(f"cluster {src} has lifted norm {norms[j]:.3g} below {NORM_FLOOR:g}", src)
    return V / norms[:, None]


def exact_gamma(k: Kernel, ds: DataSet, dist_p, dist_q) -> float:
    """Kernel distance between two weightings of the dataset's points.

    Evaluates ``sqrt(sum_xy k(x,y) (p-q)(x) (p-q)(y))``, which expands to the
    three double sums ``pKp + qKq - 2 pKq``; the radicand is clamped at 0.
    Only points carrying weight in either vector are visited.
    """
    p = np.asarray(dist_p, dtype=float)
    q = np.asarray(dist_q, dtype=float)
    if p.shape != (ds.n,) or q.shape != (ds.n,):
        raise ValueError(f"weight vectors must have shape ({ds.n},)")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("weights must be nonnegative")
    idx = np.flatnonzero((p != 0) | (q != 0))
    if idx.size == 0:
        return 0.0
    X = ds.points[idx]
    diff = p[idx] - q[idx]
    if idx.size <= EXACT_DENSE_LIMIT:
        sq = float(diff @ kernel_matrix(k, X) @ diff)
    else:
        sq = 0.0
        for start in range(0, idx.size, _BLOCK):
            stop = min(start + _BLOCK, idx.size)
            sq += float(diff[start:stop] @ (kernel_matrix(k, X[start:stop], X) @ diff))
    return float(np.sqrt(max(sq, 0.0)))


def cluster_distance_approx(a: ClusterVector, b: ClusterVector) -> float:
    if a.rho != b.rho:
        raise ValueError(f"rho mismatch: {a.rho} vs {b.rho}")
    if a.normalized != b.normalized:
        raise ValueError("cannot compare a normalized with an unnormalized cluster vector")
    return float(np.linalg.norm(a.vec - b.vec))
