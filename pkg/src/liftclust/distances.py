"""Distances between partitions through their lifted cluster representatives.

A :class:`LiftContext` fixes the dataset, kernel and (optionally) a shared
feature map. With a feature map, clusters are explicit unit vectors in
R^rho; without one the *exact* path works with the kernel matrix, where a
normalized cluster is a coefficient vector ``m`` with ``m^T K m = 1`` and
ground distances are exact kernel distances. Either way the three
partition distances see the same thing: normalized representatives weighted
by cluster mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .embed import (
    EXACT_DENSE_LIMIT,
    ClusterVector,
    DegenerateEmbeddingError,
    exact_gamma,
    embed_partition,
    normalize_rows,
)
from .kernels import FeatureMap, Kernel, LiftConfig, build_feature_map, gaussian, kernel_matrix, lift_points, median_bandwidth
from .partitions import DataSet, Partition, check, check_weights, cluster_masses
from .transport import TransportPlan, solve_transport

__all__ = [
    "LiftContext",
    "WeightedVectorSet",
    "to_weighted_set",
    "transportation",
    "ground_distances",
    "lift_emd",
    "lift_h",
    "lift_kd",
    "overlap_plan",
]

SET_WEIGHT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LiftContext:
    """Everything a lifted distance needs besides the two partitions."""

    dataset: DataSet
    kernel: Kernel
    feature_map: FeatureMap | None = None
    weights: np.ndarray | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", check_weights(self.weights, self.dataset.n))
        fm = self.feature_map
        if fm is not None:
            if fm.dim != self.dataset.d:
                raise ValueError(f"feature map expects dimension {fm.dim}, dataset has {self.dataset.d}")
            if fm.kernel != self.kernel:
                raise ValueError("feature map was built for a different kernel")

    @classmethod
    def approximate(cls, ds: DataSet, bandwidth=None, cfg: LiftConfig | None = None, seed: int = 0, weights=None):
        """Context with a fresh feature map; ``bandwidth=None`` uses the median heuristic."""
        bw = median_bandwidth(ds.points, seed=seed) if bandwidth in (None, "median") else float(bandwidth)
        k = gaussian(bw)
        fm = build_feature_map(k, ds.d, cfg or LiftConfig(), ds.n, seed)
        return cls(ds, k, fm, weights)

    @classmethod
    def exact(cls, ds: DataSet, kernel: Kernel, weights=None):
        return cls(ds, kernel, None, weights)

    @property
    def is_exact(self) -> bool:
        return self.feature_map is None

    def lifted(self) -> np.ndarray:
        if "Z" not in self._cache:
            self._cache["Z"] = lift_points(self.feature_map, self.dataset.points)
        return self._cache["Z"]

    def kernel_matrix(self) -> np.ndarray | None:
        if self.dataset.n > EXACT_DENSE_LIMIT:
            return None
        if "K" not in self._cache:
            self._cache["K"] = kernel_matrix(self.kernel, self.dataset.points)
        return self._cache["K"]

    def _check(self, p: Partition):
        if p.n != self.dataset.n:
            raise ValueError(f"partition covers {p.n} points, dataset has {self.dataset.n}")
        check(p)

    def masses(self, p: Partition) -> np.ndarray:
        return cluster_masses(p, self.weights)

    def vectors(self, p: Partition) -> np.ndarray:
        """Normalized cluster vectors, shape (k, rho); approximate path only."""
        if self.is_exact:
            raise ValueError("exact context has no explicit cluster vectors")
        self._check(p)
        V = embed_partition(self.feature_map, self.dataset, p, self.weights, lifted=self.lifted())
        return normalize_rows(V)

    def coefficients(self, p: Partition) -> np.ndarray:
        """Point weights of each normalized cluster, shape (n, k); exact path only."""
        self._check(p)
        M = p.assignment * self.weights[:, None]
        zeros = np.zeros(self.dataset.n)
        norms = np.array([exact_gamma(self.kernel, self.dataset, M[:, j], zeros) for j in range(p.k)])
        bad = np.flatnonzero(~(norms > 1e-12))
        if bad.size:
            raise DegenerateEmbeddingError(f"cluster {int(bad[0])} has zero kernel norm", int(bad[0]))
        return M / norms

    def distribution(self, p: Partition) -> np.ndarray:
        m = self.masses(p)
        if not m.sum() > 0:
            raise DegenerateEmbeddingError("partition has zero total mass")
        if np.any(m <= 0):
            j = int(np.flatnonzero(m <= 0)[0])
            raise DegenerateEmbeddingError(f"cluster {j} has zero mass", j)
        return m / m.sum()


def ground_distances(ctx: LiftContext, pa: Partition, pb: Partition) -> np.ndarray:
    """Distances between the normalized representatives of ``pa`` and ``pb``."""
    if ctx.is_exact:
        Ma, Mb = ctx.coefficients(pa), ctx.coefficients(pb)
        K = ctx.kernel_matrix()
        D = np.empty((pa.k, pb.k))
        for i in range(pa.k):
            diff = Ma[:, i : i + 1] - Mb
            if K is not None:
                # one contiguous matvec per pair: d^T K d is then bitwise equal
                # for -d, which keeps the distances symmetric under argument swap
                for j in range(pb.k):
                    d = np.ascontiguousarray(diff[:, j])
                    D[i, j] = np.sqrt(max(float(d @ (K @ d)), 0.0))
            else:
                for j in range(pb.k):
                    D[i, j] = exact_gamma(ctx.kernel, ctx.dataset, np.maximum(diff[:, j], 0), np.maximum(-diff[:, j], 0))
        return D
    return cdist(ctx.vectors(pa), ctx.vectors(pb))


@dataclass(frozen=True, eq=False)
class WeightedVectorSet:
    """Normalized cluster vectors with masses summing to one."""

    vectors: tuple
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "vectors", tuple(self.vectors))
        object.__setattr__(self, "weights", w)
        if len(self.vectors) != w.shape[0] or w.shape[0] == 0:
            raise ValueError("need one positive weight per vector and at least one vector")
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        if abs(w.sum() - 1.0) > SET_WEIGHT_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        if not all(v.normalized for v in self.vectors):
            raise ValueError("weighted sets hold normalized cluster vectors only")

    @property
    def matrix(self) -> np.ndarray:
        return np.stack([v.vec for v in self.vectors])

    def __len__(self):
        return len(self.vectors)


def to_weighted_set(fm: FeatureMap, ds: DataSet, p: Partition, w=None, source_id: int = 0) -> WeightedVectorSet:
    """The partition as a distribution over its normalized cluster vectors."""
    check(p, ds)
    w = check_weights(w, ds.n)
    V = normalize_rows(embed_partition(fm, ds, p, w), [(source_id, j) for j in range(p.k)])
    m = cluster_masses(p, w)
    if not m.sum() > 0 or np.any(m <= 0):
        raise DegenerateEmbeddingError("partition has a cluster with zero mass")
    vecs = [ClusterVector(V[j], float(m[j]), True, (source_id, j)) for j in range(p.k)]
    return WeightedVectorSet(vecs, m / m.sum())


def transportation(src: WeightedVectorSet, dst: WeightedVectorSet) -> TransportPlan:
    """Optimal coupling of two weighted sets under Euclidean ground distance."""
    D = cdist(src.matrix, dst.matrix)
    return solve_transport(src.weights, dst.weights, D)


def _same_space(ctx: LiftContext, pa: Partition, pb: Partition):
    if pa.n != pb.n:
        raise ValueError(f"partitions cover different datasets ({pa.n} vs {pb.n} points)")
    if pa.n != ctx.dataset.n:
        raise ValueError(f"partitions cover {pa.n} points, dataset has {ctx.dataset.n}")


def lift_emd(pa: Partition, pb: Partition, ctx: LiftContext, return_plan: bool = False):
    """Transportation distance between the two mass-weighted sets of normalized clusters."""
    _same_space(ctx, pa, pb)
    D = ground_distances(ctx, pa, pb)
    a, b = ctx.distribution(pa), ctx.distribution(pb)
    plan = solve_transport(a, b, D)
    # optimal bases can differ by orientation; taking the cheaper of both
    # makes the value exactly symmetric
    rev = solve_transport(b, a, np.ascontiguousarray(D.T))
    if rev.cost < plan.cost:
        plan = TransportPlan(np.ascontiguousarray(rev.flow.T), rev.cost, rev.iterations)
    return (plan.cost, plan) if return_plan else plan.cost


def lift_h(pa: Partition, pb: Partition, ctx: LiftContext) -> float:
    """Hausdorff distance between the two sets of normalized clusters."""
    _same_space(ctx, pa, pb)
    D = ground_distances(ctx, pa, pb)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def lift_kd(pa: Partition, pb: Partition, ctx: LiftContext, kprime_bandwidth: float = 1.0) -> float:
    """Gaussian kernel distance between the two mass-weighted sets of normalized clusters.

    The second-level kernel is ``exp(-|v - w|^2 / (2 kprime_bandwidth^2))``.
    """
    if not kprime_bandwidth > 0:
        raise ValueError("kprime_bandwidth must be positive")
    _same_space(ctx, pa, pb)
    a, b = ctx.distribution(pa), ctx.distribution(pb)
    s = 2.0 * kprime_bandwidth**2

    def k2(D):
        return np.exp(-(D**2) / s)

    def wsum(u, v, D):
        # correctly rounded, hence independent of summation order and of
        # argument order
        return math.fsum((np.outer(u, v) * k2(D)).ravel())

    aa = wsum(a, a, ground_distances(ctx, pa, pa))
    bb = wsum(b, b, ground_distances(ctx, pb, pb))
    ab = wsum(a, b, ground_distances(ctx, pa, pb))
    return float(np.sqrt(max(aa + bb - 2.0 * ab, 0.0)))


def overlap_plan(pa: Partition, pb: Partition) -> np.ndarray:
    """The coupling ``f(C, C') = |C ∩ C'| / n`` between two hard partitions."""
    if not (pa.is_hard and pb.is_hard):
        raise ValueError("overlap plan needs hard partitions")
    return (pa.assignment.T @ pb.assignment) / pa.n
