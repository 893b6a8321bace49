"""Datasets, hard/soft partitions and point weights."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ROW_SUM_TOL",
    "PartitionError",
    "DataSet",
    "Partition",
    "validate",
    "check",
    "harden",
    "cluster_mass",
    "cluster_masses",
    "unit_weights",
    "check_weights",
]

ROW_SUM_TOL = 1e-9


class PartitionError(ValueError):
    """A dataset or partition violates its invariants.

    ``kind`` is one of ``"shape"``, ``"row_sum"``, ``"negative"``,
    ``"empty_cluster"``, ``"not_hard"``, ``"non_finite"``; ``row`` and
    ``column`` locate the first offending entry when meaningful.
    """

    def __init__(self, kind: str, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.row = row
        self.column = column


@dataclass(frozen=True, eq=False)
class DataSet:
    points: np.ndarray
    ids: tuple = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise PartitionError("shape", f"points must be a non-empty (n, d) matrix, got shape {pts.shape}")
        bad = np.argwhere(~np.isfinite(pts))
        if bad.size:
            i, j = bad[0]
            raise PartitionError("non_finite", f"non-finite coordinate at row {i}, column {j}", int(i), int(j))
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        ids = tuple(range(pts.shape[0])) if self.ids is None else tuple(self.ids)
        if len(ids) != pts.shape[0]:
            raise PartitionError("shape", f"{len(ids)} ids for {pts.shape[0]} points")
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def permuted(self, order) -> "DataSet":
        order = np.asarray(order)
        return DataSet(self.points[order], tuple(self.ids[i] for i in order))


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of n points to k clusters.

    ``assignment[i, j]`` is the weight p(C_j | x_i); rows sum to one. A hard
    partition has exactly one unit entry per row. ``labels`` names the
    columns (defaults to ``0..k-1``).
    """

    assignment: np.ndarray
    labels: tuple = None
    kind: str = None

    def __post_init__(self):
        A = np.array(self.assignment, dtype=float)
        if A.ndim != 2:
            raise PartitionError("shape", f"assignment must be 2-d, got shape {A.shape}")
        A.setflags(write=False)
        object.__setattr__(self, "assignment", A)
        labels = tuple(range(A.shape[1])) if self.labels is None else tuple(self.labels)
        if len(labels) != A.shape[1]:
            raise PartitionError("shape", f"{len(labels)} labels for {A.shape[1]} clusters")
        object.__setattr__(self, "labels", labels)
        kind = self.kind
        if kind is None:
            kind = "hard" if _is_hard(A) else "soft"
        if kind not in ("hard", "soft"):
            raise ValueError(f"kind must be 'hard' or 'soft', got {kind!r}")
        object.__setattr__(self, "kind", kind)

    @classmethod
    def from_labels(cls, labels, names=None) -> "Partition":
        """Hard partition from a label per point. Columns follow sorted label order."""
        labels = np.asarray(labels)
        uniq, inv = np.unique(labels, return_inverse=True)
        A = np.zeros((labels.shape[0], uniq.shape[0]))
        A[np.arange(labels.shape[0]), inv.ravel()] = 1.0
        return cls(A, tuple(uniq.tolist()) if names is None else names, "hard")

    @property
    def n(self) -> int:
        return self.assignment.shape[0]

    @property
    def k(self) -> int:
        return self.assignment.shape[1]

    @property
    def is_hard(self) -> bool:
        return self.kind == "hard"

    def hard_labels(self) -> np.ndarray:
        """Column index of each point's cluster; requires a hard partition."""
        if not self.is_hard:
            raise PartitionError("not_hard", "partition is soft; harden it first")
        return np.argmax(self.assignment, axis=1)

    def permute_clusters(self, order) -> "Partition":
        order = list(order)
        return Partition(self.assignment[:, order], tuple(self.labels[j] for j in order), self.kind)

    def permute_points(self, order) -> "Partition":
        return Partition(self.assignment[np.asarray(order)], self.labels, self.kind)

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.labels == other.labels
            and self.assignment.shape == other.assignment.shape
            and np.array_equal(self.assignment, other.assignment)
        )

    __hash__ = None


def _is_hard(A: np.ndarray) -> bool:
    return bool(np.all((A == 0) | (A == 1)) and np.all(A.sum(axis=1) == 1))


def validate(p: Partition, ds: DataSet | None = None) -> list[PartitionError]:
    """Check every partition invariant; returns the violations found (empty when ok).

    At most one violation of each kind is reported, pointing at the first
    offending row or column.
    """
    out = []
    A = p.assignment
    if ds is not None and A.shape[0] != ds.n:
        out.append(PartitionError("shape", f"partition has {A.shape[0]} rows but dataset has {ds.n} points"))
        return out
    if A.shape[0] < 1 or A.shape[1] < 1:
        out.append(PartitionError("shape", f"partition must have at least one row and column, got {A.shape}"))
        return out
    bad = np.argwhere(~np.isfinite(A))
    if bad.size:
        i, j = map(int, bad[0])
        out.append(PartitionError("non_finite", f"non-finite weight at row {i}, column {j}", i, j))
        return out
    neg = np.argwhere(A < 0)
    if neg.size:
        i, j = map(int, neg[0])
        out.append(PartitionError("negative", f"negative weight {A[i, j]!r} at row {i}, column {j}", i, j))
    sums = A.sum(axis=1)
    off = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if off.size:
        i = int(off[0])
        out.append(PartitionError("row_sum", f"row {i} sums to {sums[i]!r}, expected 1", i))
    empty = np.flatnonzero(~np.any(A > 0, axis=0))
    if empty.size:
        j = int(empty[0])
        out.append(PartitionError("empty_cluster", f"cluster column {j} ({p.labels[j]!r}) is empty", None, j))
    if p.kind == "hard" and not _is_hard(A):
        i = int(np.flatnonzero(~(np.all((A == 0) | (A == 1), axis=1) & (A.sum(axis=1) == 1)))[0])
        out.append(PartitionError("not_hard", f"row {i} of a hard partition is not a basis vector", i))
    return out


def check(p: Partition, ds: DataSet | None = None) -> Partition:
    """Raise the first violation reported by :func:`validate`, else return ``p``."""
    errs = validate(p, ds)
    if errs:
        raise errs[0]
    return p


def harden(p: Partition, report: list | None = None) -> Partition:
    """Move each row to its largest weight (lowest index wins ties).

    Clusters left empty are dropped; their labels are appended to ``report``
    when one is given.
    """
    if p.is_hard:
        return p
    A = p.assignment
    arg = np.argmax(A, axis=1)
    H = np.zeros_like(A)
    H[np.arange(A.shape[0]), arg] = 1.0
    keep = np.flatnonzero(H.any(axis=0))
    if report is not None:
        report.extend(p.labels[j] for j in range(A.shape[1]) if j not in set(keep.tolist()))
    return check(Partition(H[:, keep], tuple(p.labels[j] for j in keep), "hard"))


def unit_weights(n: int) -> np.ndarray:
    return np.ones(n)


def check_weights(w, n: int) -> np.ndarray:
    """Default to unit weights; otherwise require an n-vector in [0, 1]."""
    if w is None:
        return unit_weights(n)
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise PartitionError("shape", f"weights have shape {w.shape}, expected ({n},)")
    if np.any(~np.isfinite(w)) or np.any(w < 0) or np.any(w > 1):
        i = int(np.flatnonzero(~((w >= 0) & (w <= 1)))[0])
        raise PartitionError("negative", f"weight {w[i]!r} at point {i} outside [0, 1]", i)
    return w


def cluster_masses(p: Partition, w=None) -> np.ndarray:
    """Vector of ``sum_i w_i p(C_j | x_i)`` over all clusters."""
    w = check_weights(w, p.n)
    return w @ p.assignment


def cluster_mass(p: Partition, w, j: int) -> float:
    if not 0 <= j < p.k:
        raise IndexError(f"cluster index {j} out of range for k={p.k}")
    return float(cluster_masses(p, w)[j])
