"""Kernels and the random Fourier feature lifting map.

A :class:`FeatureMap` realizes an approximate lift ``x -> z(x)`` into R^rho
such that ``<z(x), z(y)>`` approximates a gaussian kernel. Feature maps are
immutable and fully determined by ``(seed, d, rho, bandwidth)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

__all__ = [
    "Kernel",
    "gaussian",
    "discrete",
    "LiftConfig",
    "FeatureMap",
    "RHO_CONSTANT",
    "kernel_eval",
    "kernel_matrix",
    "median_bandwidth",
    "rho_for",
    "build_feature_map",
    "lift_point",
    "lift_points",
    "derive_seed",
    "DimensionError",
]

# Constant c in rho = ceil(c * ln(n / delta) / eps^2).
RHO_CONSTANT = 8.0


def derive_seed(seed: int, *counters: int) -> int:
    """64-bit seed for one component of a seeded run.

    ``SeedSequence([seed, *counters])`` expanded to a single uint64, so each
    stage of a pipeline gets an independent stream from one user seed.
    """
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, counters)])
    return int(ss.generate_state(1, np.uint64)[0])


class DimensionError(ValueError):
    """Point dimensions do not agree."""


@dataclass(frozen=True)
class Kernel:
    """A reproducing kernel on R^d.

    ``kind`` is ``"gaussian"`` (``exp(-|x-y|^2 / (2 bandwidth^2))``) or
    ``"discrete"`` (1 on identical points, 0 otherwise). The discrete kernel
    has no feature map and is only usable on exact computation paths.
    """

    kind: str = "gaussian"
    bandwidth: float | None = 1.0

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.bandwidth is None or not (self.bandwidth > 0) or not math.isfinite(self.bandwidth):
                raise ValueError(f"gaussian bandwidth must be a positive finite number, got {self.bandwidth!r}")
            object.__setattr__(self, "bandwidth", float(self.bandwidth))
        elif self.kind == "discrete":
            object.__setattr__(self, "bandwidth", None)
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"


def gaussian(bandwidth: float) -> Kernel:
    return Kernel("gaussian", bandwidth)


def discrete() -> Kernel:
    return Kernel("discrete", None)


@dataclass(frozen=True)
class LiftConfig:
    """Accuracy request for the random feature map.

    ``epsilon`` is the additive error allowed on pairwise RKHS distances and
    ``delta`` the failure probability. ``rho`` overrides the derived dimension.
    """

    epsilon: float = 0.1
    delta: float = 0.05
    rho: int | None = None

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not (0 < self.delta < 1):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if self.rho is not None and (int(self.rho) != self.rho or self.rho < 1):
            raise ValueError(f"rho must be a positive integer, got {self.rho!r}")


def rho_for(cfg: LiftConfig, n: int) -> int:
    """Feature dimension for ``n`` points: ``ceil(8 ln(n/delta) / eps^2)`` unless overridden."""
    if cfg.rho is not None:
        return int(cfg.rho)
    if n < 1:
        raise ValueError("n must be at least 1")
    return max(1, math.ceil(RHO_CONSTANT * math.log(n / cfg.delta) / cfg.epsilon**2))


def _as_point(x, name="x") -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1)
    if a.ndim != 1:
        raise DimensionError(f"{name} must be a 1-d point, got shape {a.shape}")
    return a


def kernel_eval(k: Kernel, x, y) -> float:
    """Evaluate ``k(x, y)`` for two points of equal dimension."""
    x = _as_point(x, "x")
    y = _as_point(y, "y")
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if k.is_discrete:
        return 1.0 if np.array_equal(x, y) else 0.0
    sq = float(np.sum((x - y) ** 2))
    return math.exp(-sq / (2.0 * k.bandwidth**2))


def kernel_matrix(k: Kernel, X, Y=None) -> np.ndarray:
    """Kernel values between the rows of ``X`` and ``Y`` (``Y`` defaults to ``X``)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[1] != Y.shape[1]:
        raise DimensionError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if k.is_discrete:
        # exact coordinate equality, matching kernel_eval
        return (cdist(X, Y, "chebyshev") == 0).astype(float)
    sq = cdist(X, Y, "sqeuclidean")
    return np.exp(-sq / (2.0 * k.bandwidth**2))


def median_bandwidth(points, max_points: int = 1000, seed: int = 0) -> float:
    """Median pairwise distance, on a subsample of at most ``max_points`` rows.

    Falls back to 1.0 when every sampled pair coincides.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    if X.shape[0] > max_points:
        idx = np.random.default_rng(seed).choice(X.shape[0], size=max_points, replace=False)
        X = X[np.sort(idx)]
    if X.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(X)))
    return med if med > 0 else 1.0


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Frozen random cosine features ``z(x) = scale * cos(W x + b)``.

    Attributes:
        frequencies: (rho, d) matrix ``W`` drawn from N(0, 1/bandwidth^2).
        phases: (rho,) vector ``b`` drawn uniformly on [0, 2 pi).
        scale: ``sqrt(2 / rho)``.
        seed: seed the matrices were drawn from.
        kernel: the gaussian kernel being approximated.
    """

    frequencies: np.ndarray
    phases: np.ndarray
    scale: float
    seed: int
    kernel: Kernel
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.frequencies.setflags(write=False)
        self.phases.setflags(write=False)

    @property
    def rho(self) -> int:
        return self.frequencies.shape[0]

    @property
    def dim(self) -> int:
        return self.frequencies.shape[1]

    def __eq__(self, other):
        if not isinstance(other, FeatureMap):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.kernel == other.kernel
            and self.scale == other.scale
            and np.array_equal(self.frequencies, other.frequencies)
            and np.array_equal(self.phases, other.phases)
        )

    __hash__ = None

    def __call__(self, X) -> np.ndarray:
        return lift_points(self, X)


def build_feature_map(
    k: Kernel,
    d: int,
    cfg: LiftConfig | None = None,
    n: int = 1,
    seed: int = 0,
) -> FeatureMap:
    """Sample a feature map for a gaussian kernel on R^d.

    The dimension comes from ``rho_for(cfg, n)``. Frequencies are drawn
    before phases from ``numpy.random.default_rng(seed)``, so equal inputs
    give bitwise-identical maps.
    """
    if k.is_discrete:
        raise ValueError("the discrete kernel has no shift-invariant feature map; use the exact path")
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")
    cfg = cfg or LiftConfig()
    rho = rho_for(cfg, n)
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, 1.0 / k.bandwidth, size=(rho, int(d)))
    b = rng.uniform(0.0, 2.0 * np.pi, size=rho)
    meta = {"epsilon": cfg.epsilon, "delta": cfg.delta, "n": int(n), "rho_override": cfg.rho}
    return FeatureMap(W, b, math.sqrt(2.0 / rho), seed, k, meta)


def lift_points(fm: FeatureMap, X) -> np.ndarray:
    """Lift every row of ``X``; returns an (n, rho) array."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != fm.dim:
        raise DimensionError(f"points have dimension {X.shape[1]}, feature map expects {fm.dim}")
    Z = X @ fm.frequencies.T
    Z += fm.phases
    np.cos(Z, out=Z)
    Z *= fm.scale
    return Z


def lift_point(fm: FeatureMap, x) -> np.ndarray:
    x = _as_point(x)
    return lift_points(fm, x.reshape(1, -1))[0]
