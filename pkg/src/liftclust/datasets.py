"""Synthetic datasets, reference/perturbed partitions and standard base clusterings."""
from __future__ import annotations

from importlib import resources

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage

from .consensus import weighted_kmeans
from .partitions import DataSet, Partition

__all__ = [
    "two_gauss",
    "three_cluster",
    "blobs",
    "gen_synthetic",
    "sensitivity_partitions",
    "noisy_copies",
    "base_partitions",
    "load_iris",
]


def _split_sizes(n, g):
    base, extra = divmod(n, g)
    return [base + (i < extra) for i in range(g)]


def _gaussians(centers, sizes, sigma, rng):
    pts, lab = [], []
    for j, (c, m) in enumerate(zip(centers, sizes)):
        pts.append(rng.normal(0.0, sigma, size=(m, len(c))) + np.asarray(c, dtype=float))
        lab.append(np.full(m, j))
    return np.vstack(pts), np.concatenate(lab)


def two_gauss(n: int = 45, seed: int = 0, sigma: float = 1.0, gap: float = 5.0):
    """Two isotropic gaussians stacked along the y-axis, ``gap`` sigmas apart."""
    if n < 4:
        raise ValueError("two_gauss needs n >= 4")
    rng = np.random.default_rng(seed)
    X, y = _gaussians([(0.0, 0.0), (0.0, gap * sigma)], _split_sizes(n, 2), sigma, rng)
    return DataSet(X), Partition.from_labels(y)


def three_cluster(n: int = 24, seed: int = 0, sigma: float = 0.5):
    """Three small, visibly separate groups stacked along the y-axis."""
    if n < 6:
        raise ValueError("three_cluster needs n >= 6")
    rng = np.random.default_rng(seed)
    centers = [(0.0, 0.0), (1.0, 4.0), (0.0, 8.0)]
    X, y = _gaussians(centers, _split_sizes(n, 3), sigma, rng)
    return DataSet(X), Partition.from_labels(y)


def blobs(g: int = 3, sep: float = 10.0, n: int = 300, seed: int = 0, d: int = 2, sigma: float = 1.0):
    """``g`` unit gaussians whose nearest centers lie ``sep * sigma`` apart.

    Centers sit on a regular polygon in the first two coordinates.
    """
    if g < 1 or n < g or d < 2 or sep <= 0:
        raise ValueError(f"invalid blobs parameters g={g}, sep={sep}, n={n}, d={d}")
    rng = np.random.default_rng(seed)
    centers = np.zeros((g, d))
    if g > 1:
        radius = sep * sigma / (2.0 * np.sin(np.pi / g))
        ang = 2.0 * np.pi * np.arange(g) / g
        centers[:, 0] = radius * np.cos(ang)
        centers[:, 1] = radius * np.sin(ang)
    X, y = _gaussians(centers, _split_sizes(n, g), sigma, rng)
    return DataSet(X), Partition.from_labels(y)


def gen_synthetic(kind: str, seed: int = 0, **params):
    """Dispatch on ``kind`` in ``{"two_gauss", "three_cluster", "blobs"}``."""
    makers = {"two_gauss": two_gauss, "three_cluster": three_cluster, "blobs": blobs}
    if kind not in makers:
        raise ValueError(f"unknown synthetic dataset {kind!r}; choose from {sorted(makers)}")
    return makers[kind](seed=seed, **params)


def sensitivity_partitions(ds: DataSet, truth: Partition, shift: int | None = None):
    """Reference, first and second partitions with equal set-based distance.

    ``FP`` cuts the y-projection into consecutive runs whose boundaries are
    moved ``shift`` points into the odd-numbered clusters, so it misplaces
    points on the borders between neighbouring clusters and only odd
    clusters lose points. ``SP`` has exactly the same contingency table
    against ``RP``, but every misplaced point is taken from the far side of
    its reference cluster (largest distance to the centroid of the cluster it
    is moved into). Any measure that only sees the contingency table rates
    the two alike; spatially, FP is the closer one.

    Clusters of ``truth`` are assumed ordered bottom-to-top along y.
    """
    ref = truth.hard_labels()
    sizes = np.bincount(ref, minlength=truth.k)
    if shift is None:
        shift = max(1, int(round(0.1 * ds.n / truth.k)))
    seg = sizes.copy()
    for b in range(truth.k - 1):
        # boundary between clusters b and b+1 moves into whichever is odd
        step = shift if b % 2 == 0 else -shift
        seg[b] += step
        seg[b + 1] -= step
    if np.any(seg < 1) or np.any(sizes[1::2] <= 2 * shift):
        raise ValueError(f"shift={shift} is too large for cluster sizes {sizes.tolist()}")
    y_order = np.argsort(ds.points[:, 1], kind="stable")
    fp = np.empty(ds.n, dtype=int)
    fp[y_order] = np.repeat(np.arange(truth.k), seg)

    N = np.zeros((truth.k, truth.k), dtype=int)
    np.add.at(N, (ref, fp), 1)
    centroids = np.vstack([ds.points[ref == j].mean(axis=0) for j in range(truth.k)])
    sp = ref.copy()
    for i in range(truth.k):
        free = np.flatnonzero(ref == i)
        for j in range(truth.k):
            if j == i or N[i, j] == 0:
                continue
            dist = np.linalg.norm(ds.points[free] - centroids[j], axis=1)
            far = np.argsort(-dist, kind="stable")[: N[i, j]]
            sp[free[far]] = j
            free = np.delete(free, far)
    return truth, Partition.from_labels(fp), Partition.from_labels(sp)


def noisy_copies(truth: Partition, m: int, flip_rate: float = 0.05, seed: int = 0):
    """``m`` copies of a hard partition, each with ``floor(flip_rate * n)`` labels changed."""
    labels = truth.hard_labels()
    k, n = truth.k, truth.n
    if k < 2:
        raise ValueError("need at least two clusters to flip labels")
    flips = int(np.floor(flip_rate * n))
    out = []
    for c in range(m):
        rng = np.random.default_rng([seed, c])
        lab = labels.copy()
        idx = rng.choice(n, size=flips, replace=False)
        lab[idx] = (lab[idx] + rng.integers(1, k, size=flips)) % k
        out.append(Partition.from_labels(lab))
    return out


def base_partitions(ds: DataSet, k: int, seed: int = 0):
    """The usual five inputs: k-means plus single, average, complete and Ward linkage.

    Returns a dict of name -> hard Partition.
    """
    X = ds.points
    _, lab, _ = weighted_kmeans(X, np.ones(ds.n), k, restarts=10, seed=seed)
    out = {"kmeans": Partition.from_labels(lab)}
    for method in ("single", "average", "complete", "ward"):
        Z = linkage(X, method=method, metric="euclidean")
        out[method] = Partition.from_labels(cut_tree(Z, n_clusters=k)[:, 0])
    return out


def load_iris():
    """Bundled Iris measurements (150 x 4) and class labels."""
    from .io import load_dataset, load_partition

    root = resources.files("liftclust") / "data"
    with resources.as_file(root / "iris.txt") as p:
        ds = load_dataset(p)
    with resources.as_file(root / "iris_labels.txt") as p:
        truth = load_partition(p, ds)
    return ds, truth
