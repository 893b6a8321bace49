"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL verdict; the verdicts are printed in
the terminal summary (see conftest.py) and on stdout.
"""
import math
import time

import numpy as np
import pytest
from scipy.optimize import linprog
from scipy.spatial.distance import pdist

from liftclust import (
    ConsensusConfig,
    DataSet,
    LiftConfig,
    LiftContext,
    Partition,
    build_feature_map,
    derive_seed,
    discrete,
    exact_gamma,
    gaussian,
    kernel_matrix,
    lift_emd,
    lift_h,
    lift_kd,
    lift_points,
    median_bandwidth,
    overlap_plan,
    rand_distance,
    run_consensus,
    solve_transport,
)
from liftclust.consensus import pool, weighted_kmeans
from liftclust.datasets import (
    base_partitions,
    blobs,
    load_iris,
    noisy_copies,
    sensitivity_partitions,
    three_cluster,
    two_gauss,
)
from liftclust.distances import ground_distances
from liftclust.experiments import lifting_times, rho_sweep

from conftest import random_hard

VERDICTS = []


def verdict(number, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    VERDICTS.append(line)
    print(line)
    return ok


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_c01_pairwise_error_bound():
    with Timer() as t:
        good_seeds = 0
        worst = 0.0
        for s in range(20):
            rng = np.random.default_rng([1, s])
            X = rng.random((200, 5))
            k = gaussian(median_bandwidth(X, seed=s))
            fm = build_feature_map(k, 5, LiftConfig(epsilon=0.1, delta=0.05), n=200, seed=derive_seed(s, 0))
            approx = pdist(lift_points(fm, X))
            exact = np.sqrt(np.maximum(2.0 - 2.0 * kernel_matrix(k, X)[np.triu_indices(200, 1)], 0.0))
            frac = float(np.mean(np.abs(approx - exact) > 0.1))
            worst = max(worst, frac)
            good_seeds += frac <= 0.05
    ok = good_seeds >= 18 and t.seconds < 30
    assert verdict(1, ok, f"{good_seeds}/20 seeds with violating-pair fraction <= 0.05 (worst {worst:.4f}, rho={fm.rho}), {t.seconds:.1f}s")


def test_c02_discrete_symmetric_difference():
    rng = np.random.default_rng(2)
    with Timer() as t:
        worst = 0.0
        for _ in range(200):
            n = int(rng.integers(1, 41))
            ds = DataSet(rng.permutation(n).reshape(-1, 1).astype(float))
            a = random_hard(rng, n, int(rng.integers(1, n + 1))).assignment
            b = random_hard(rng, n, int(rng.integers(1, n + 1))).assignment
            ca, cb = a[:, rng.integers(a.shape[1])], b[:, rng.integers(b.shape[1])]
            got = exact_gamma(discrete(), ds, ca, cb)
            worst = max(worst, abs(got - math.sqrt(np.sum(ca != cb))))
    ok = worst <= 1e-9 and t.seconds < 5
    assert verdict(2, ok, f"max |gamma - sqrt|C xor C'|| = {worst:.2e} over 200 pairs, {t.seconds:.2f}s")


def test_c03_rand_bound():
    rng = np.random.default_rng(3)
    with Timer() as t:
        bound_holds = plan_ok = 0
        worst_excess = 0.0
        for _ in range(100):
            n = int(rng.integers(2, 41))
            ds = DataSet(rng.permutation(n).reshape(-1, 1).astype(float))
            pa = random_hard(rng, n, int(rng.integers(1, n + 1)))
            pb = random_hard(rng, n, int(rng.integers(1, n + 1)))
            ctx = LiftContext.exact(ds, discrete())
            emd = lift_emd(pa, pb, ctx)
            rand = rand_distance(pa, pb)
            bound_holds += emd <= rand + 1e-9
            worst_excess = max(worst_excess, emd - rand)
            F = overlap_plan(pa, pb)
            feasible = (
                np.all(F >= 0)
                and np.allclose(F.sum(axis=1), ctx.distribution(pa), atol=1e-12)
                and np.allclose(F.sum(axis=0), ctx.distribution(pb), atol=1e-12)
            )
            cost = float((F * ground_distances(ctx, pa, pb)).sum())
            plan_ok += bool(feasible) and cost >= emd - 1e-9
    ok = bound_holds == 100 and plan_ok == 100 and t.seconds < 30
    assert verdict(
        3,
        ok,
        f"lift_emd <= rand in {bound_holds}/100 pairs (worst excess {worst_excess:.3f}); "
        f"overlap plan feasible with cost >= lift_emd in {plan_ok}/100, {t.seconds:.1f}s",
    )


def _lp(a, b, C):
    k, l = C.shape
    A = np.vstack([np.kron(np.eye(k), np.ones(l)), np.kron(np.ones(k), np.eye(l))])
    return linprog(C.ravel(), A_eq=A, b_eq=np.r_[a, b], bounds=(0, None), method="highs").fun


def test_c04_transport_exactness():
    rng = np.random.default_rng(4)
    with Timer() as t:
        worst = 0.0
        for _ in range(500):
            k, l = rng.integers(1, 6, size=2)
            a, b = rng.random(k) + 0.01, rng.random(l) + 0.01
            a, b = a / a.sum(), b / b.sum()
            C = rng.random((k, l)) * rng.choice([0.1, 1.0, 10.0])
            worst = max(worst, abs(solve_transport(a, b, C).cost - _lp(a, b, C)))
    ok = worst <= 1e-6 and t.seconds < 60
    assert verdict(4, ok, f"max |simplex - LP| = {worst:.2e} over 500 instances, {t.seconds:.1f}s")


def test_c05_spatial_sensitivity():
    with Timer() as t:
        counts = {}
        rand_equal = True
        for name, maker in (("two_gauss", two_gauss), ("three_cluster", three_cluster)):
            wins = {"liftemd": 0, "liftkd": 0, "lifth": 0}
            for s in range(20):
                ds, truth = maker(seed=s)
                rp, fp, sp = sensitivity_partitions(ds, truth)
                ctx = LiftContext.approximate(ds, cfg=LiftConfig(0.1, 0.05), seed=derive_seed(s, 0))
                rand_equal &= rand_distance(rp, fp) == rand_distance(rp, sp)
                wins["liftemd"] += lift_emd(rp, fp, ctx) < lift_emd(rp, sp, ctx)
                wins["liftkd"] += lift_kd(rp, fp, ctx) < lift_kd(rp, sp, ctx)
                wins["lifth"] += lift_h(rp, fp, ctx) < lift_h(rp, sp, ctx)
            counts[name] = wins
    ok = rand_equal and all(v >= 18 for w in counts.values() for v in w.values()) and t.seconds < 30
    summary = "; ".join(f"{n} " + ", ".join(f"{m} {v}/20" for m, v in w.items()) for n, w in counts.items())
    assert verdict(5, ok, f"d(RP,FP) < d(RP,SP): {summary}; rand equal: {rand_equal}, {t.seconds:.1f}s")


def test_c06_rho_sweep():
    ds, truth = two_gauss(seed=0)
    rp, fp, _ = sensitivity_partitions(ds, truth)
    with Timer() as t:
        rows = {r["rho"]: r for r in rho_sweep(ds, rp, fp, [25, 100, 200], n_seeds=10)}
    max100 = rows[100]["max_error"]
    m25, m200 = rows[25]["mean_error"], rows[200]["mean_error"]
    ok = max100 <= 0.05 and m200 <= m25 and t.seconds < 120
    assert verdict(6, ok, f"max error at rho=100 {max100:.4f}; mean error rho=25 {m25:.4f} -> rho=200 {m200:.4f}, {t.seconds:.1f}s")


def test_c07_consensus_recovery():
    with Timer() as t:
        wins = {"kmeans": 0, "hac": 0}
        for s in range(20):
            ds, truth = blobs(g=3, sep=8, n=300, seed=s)
            inputs = noisy_copies(truth, 5, flip_rate=0.05, seed=s)
            median_input = float(np.median([rand_distance(p, truth) for p in inputs]))
            fm = build_feature_map(
                gaussian(median_bandwidth(ds.points, seed=s)), ds.d, LiftConfig(0.1, 0.05), ds.n, derive_seed(s, 0)
            )
            for method in wins:
                res = run_consensus(fm, ds, inputs, cfg=ConsensusConfig(k=3, method=method, seed=derive_seed(s, 2)))
                wins[method] += rand_distance(res.consensus, truth) <= median_input
    ok = wins["kmeans"] >= 15 and wins["hac"] >= 15 and t.seconds < 120
    assert verdict(7, ok, f"consensus rand <= median input: LiftKm {wins['kmeans']}/20, LiftHAC {wins['hac']}/20, {t.seconds:.1f}s")


def test_c08_iris():
    ds, labels = load_iris()
    inputs = list(base_partitions(ds, 3, seed=0).values())
    fm = build_feature_map(gaussian(median_bandwidth(ds.points)), ds.d, LiftConfig(0.1, 0.05), ds.n, derive_seed(0, 0))
    res = run_consensus(fm, ds, inputs, cfg=ConsensusConfig(k=3, seed=derive_seed(0, 2)))
    r = rand_distance(res.consensus, labels)
    ok = 0.06 <= r <= 0.17
    assert verdict(8, ok, f"Iris LiftKm rand distance {r:.3f} (accepted range [0.06, 0.17]; soft criterion)")


def test_c09_metric_axioms():
    rng = np.random.default_rng(9)
    with Timer() as t:
        asym = tri = 0
        worst = -np.inf
        for _ in range(200):
            n = int(rng.integers(5, 40))
            ds = DataSet(rng.normal(size=(n, 2)) * 2)
            ctx = LiftContext.approximate(ds, cfg=LiftConfig(rho=200), seed=int(rng.integers(2**32)))
            pa, pb, pc = (random_hard(rng, n, int(rng.integers(1, 6))) for _ in range(3))
            ab, ba = lift_emd(pa, pb, ctx), lift_emd(pb, pa, ctx)
            bc, ac = lift_emd(pb, pc, ctx), lift_emd(pa, pc, ctx)
            asym += ab != ba
            worst = max(worst, ac - ab - bc)
            tri += ac > ab + bc + 1e-7
        # every restart of every Lloyd run checks its own monotonicity and
        # raises on an increase; the winning histories are checked here too
        runs = monotone = 0
        for s in range(50):
            ds, truth = blobs(g=3, sep=6, n=90, seed=100 + s)
            fm = build_feature_map(gaussian(3.0), 2, LiftConfig(rho=200), ds.n, s)
            Q = pool(fm, ds, noisy_copies(truth, 4, 0.1, seed=s))
            for k in (2, 3, 5):
                _, _, hist = weighted_kmeans(Q.vectors, Q.weights, k, restarts=5, seed=s)
                runs += 1
                monotone += all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))
    ok = asym == 0 and tri == 0 and monotone == runs
    assert verdict(
        9,
        ok,
        f"symmetry violations {asym}/200, triangle violations {tri}/200 (max d(a,c) - d(a,b) - d(b,c) = {worst:.2e}), "
        f"monotone Lloyd runs {monotone}/{runs}, {t.seconds:.1f}s",
    )


def test_c10_lifting_scales_linearly():
    ns = [1000, 2000, 4000, 8000]
    times = lifting_times(ns, d=2, rho=500, repeats=7)
    slope = float(np.polyfit(np.log(ns), np.log(times), 1)[0])
    ok = slope <= 1.2
    ms = ", ".join(f"{n}: {1e3 * s:.1f}ms" for n, s in zip(ns, times))
    assert verdict(10, ok, f"log-log slope {slope:.3f} ({ms})")
