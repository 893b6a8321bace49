"""Replays of the sensitivity, dimension-sweep and scaling studies."""
from __future__ import annotations

import time

import numpy as np

from .distances import LiftContext, lift_emd, lift_h, lift_kd
from .kernels import LiftConfig, build_feature_map, derive_seed, gaussian, lift_points, median_bandwidth
from .metrics import rand_distance
from .partitions import DataSet, Partition

__all__ = ["EXACT_SWEEP_LIMIT", "rho_sweep", "sensitivity_table", "lifting_times"]

EXACT_SWEEP_LIMIT = 5000


def rho_sweep(ds: DataSet, pa: Partition, pb: Partition, rhos, n_seeds: int = 10, bandwidth=None, seed: int = 0):
    """Error of the random-feature LiftEMD against the exact kernel LiftEMD.

    For every ``rho`` the feature map is redrawn ``n_seeds`` times (seed
    ``derive_seed(seed, rho, s)``). Returns one dict per rho with the exact
    value, the per-seed absolute errors and their mean and max.
    """
    if ds.n > EXACT_SWEEP_LIMIT:
        raise ValueError(f"exact LiftEMD needs O(n^2) kernel evaluations; refusing n={ds.n} > {EXACT_SWEEP_LIMIT}")
    bw = median_bandwidth(ds.points, seed=seed) if bandwidth in (None, "median") else float(bandwidth)
    k = gaussian(bw)
    exact = lift_emd(pa, pb, LiftContext.exact(ds, k))
    rows = []
    for rho in rhos:
        errs = []
        for s in range(n_seeds):
            fm = build_feature_map(k, ds.d, LiftConfig(rho=int(rho)), ds.n, derive_seed(seed, int(rho), s))
            errs.append(abs(lift_emd(pa, pb, LiftContext(ds, k, fm)) - exact))
        errs = np.array(errs)
        rows.append(
            {
                "rho": int(rho),
                "bandwidth": bw,
                "exact": exact,
                "mean_error": float(errs.mean()),
                "max_error": float(errs.max()),
                "errors": errs.tolist(),
            }
        )
    return rows


def sensitivity_table(ctx: LiftContext, rp: Partition, fp: Partition, sp: Partition, kprime_bandwidth: float = 1.0):
    """Each metric's distance from RP to FP and to SP."""
    out = {}
    for name, fn in (
        ("liftemd", lambda a, b: lift_emd(a, b, ctx)),
        ("liftkd", lambda a, b: lift_kd(a, b, ctx, kprime_bandwidth)),
        ("lifth", lambda a, b: lift_h(a, b, ctx)),
        ("rand", rand_distance),
    ):
        out[name] = (fn(rp, fp), fn(rp, sp))
    return out


def lifting_times(ns, d: int = 2, rho: int = 200, repeats: int = 5, seed: int = 0):
    """Best-of-``repeats`` wall time to lift n uniform points, for each n."""
    rng = np.random.default_rng(seed)
    fm = build_feature_map(gaussian(1.0), d, LiftConfig(rho=rho), 1, seed)
    out = []
    for n in ns:
        X = rng.random((int(n), d))
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            lift_points(fm, X)
            best = min(best, time.perf_counter() - t0)
        out.append(best)
    return np.array(out)
