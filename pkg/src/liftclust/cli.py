"""Command-line interface: ``liftclust {gen,distance,consensus,rho-sweep,lift-cache}``.

Exit codes: 0 success, 2 usage error, 3 data or validation error, 4 numerical
degeneracy.

Seeding: ``--seed S`` is the only source of randomness. Components draw
from ``derive_seed(S, c)`` with counter ``c`` = 0 for the feature map, 1 for
the bandwidth subsample and 2 for consensus restarts.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .consensus import ConsensusConfig, run_consensus
from .datasets import gen_synthetic, sensitivity_partitions
from .distances import LiftContext, lift_emd, lift_h, lift_kd
from .embed import DegenerateEmbeddingError
from .experiments import rho_sweep
from .io import (
    ParseError,
    atomic_write,
    file_digest,
    load_dataset,
    load_feature_map,
    load_partition,
    save_dataset,
    save_feature_map,
    save_partition,
    write_manifest,
)
from .kernels import DimensionError, LiftConfig, build_feature_map, derive_seed, discrete, gaussian, median_bandwidth
from .metrics import accuracy, jaccard_distance, nmi, rand_distance, variation_of_information
from .partitions import PartitionError, harden

log = logging.getLogger("liftclust")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
SEED_FEATURES, SEED_BANDWIDTH, SEED_CONSENSUS = 0, 1, 2

LIFTED = ("liftemd", "liftkd", "lifth")
SET_METRICS = {
    "rand": rand_distance,
    "accuracy": accuracy,
    "jaccard": jaccard_distance,
    "nmi": nmi,
    "vi": variation_of_information,
}
METRICS = LIFTED + tuple(SET_METRICS)


class UsageError(Exception):
    pass


def _add_lift_args(p, exact_flag=True):
    p.add_argument("--kernel", choices=("gaussian", "discrete"), default="gaussian")
    p.add_argument("--bandwidth", default="median", help="gaussian bandwidth, or 'median' (default)")
    p.add_argument("--rho", type=int, help="feature dimension (overrides --epsilon/--delta)")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lift-cache", type=Path, help="feature-map file to reuse (created if missing)")
    if exact_flag:
        p.add_argument("--exact", action="store_true", help="use exact kernel sums instead of random features")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liftclust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"liftclust {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset and its true partition")
    g.add_argument("kind", choices=("two_gauss", "three_cluster", "blobs"))
    g.add_argument("--n", type=int)
    g.add_argument("--g", type=int, help="number of blobs")
    g.add_argument("--sep", type=float, help="blob separation in blob standard deviations")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, required=True, help="output prefix")
    g.add_argument("--sensitivity", action="store_true", help="also write RP/FP/SP partitions")

    d = sub.add_parser("distance", help="compare partitions pairwise")
    d.add_argument("points", type=Path)
    d.add_argument("partitions", type=Path, nargs="+")
    d.add_argument("--metrics", default="liftemd,rand")
    d.add_argument("--kprime-bandwidth", type=float, default=1.0)
    d.add_argument("--csv", type=Path)
    d.add_argument("--manifest", type=Path)
    _add_lift_args(d)

    c = sub.add_parser("consensus", help="consensus partition of several partitions")
    c.add_argument("points", type=Path)
    c.add_argument("partitions", type=Path, nargs="+")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--method", choices=("kmeans", "hac"), default="kmeans")
    c.add_argument("--linkage", choices=("average", "complete", "single"), default="average")
    c.add_argument("--restarts", type=int, default=10)
    c.add_argument("--soft", action="store_true", help="write a soft consensus partition")
    c.add_argument("--truth", type=Path, help="reference labels to evaluate against")
    c.add_argument("--out", type=Path, required=True)
    c.add_argument("--manifest", type=Path)
    _add_lift_args(c, exact_flag=False)

    r = sub.add_parser("rho-sweep", help="LiftEMD error against the exact value as rho grows")
    r.add_argument("points", type=Path)
    r.add_argument("pa", type=Path)
    r.add_argument("pb", type=Path)
    r.add_argument("--rhos", default="25,50,100,200,400")
    r.add_argument("--seeds", type=int, default=10)
    r.add_argument("--bandwidth", default="median")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--csv", type=Path)
    r.add_argument("--manifest", type=Path)

    lc = sub.add_parser("lift-cache", help="build and store a feature map")
    lc.add_argument("points", type=Path)
    lc.add_argument("--out", type=Path, required=True)
    _add_lift_args(lc, exact_flag=False)
    return parser


def _bandwidth(args, ds):
    if str(args.bandwidth) == "median":
        return median_bandwidth(ds.points, seed=derive_seed(args.seed, SEED_BANDWIDTH))
    try:
        bw = float(args.bandwidth)
    except ValueError:
        raise UsageError(f"--bandwidth must be a number or 'median', got {args.bandwidth!r}") from None
    if not bw > 0:
        raise UsageError("--bandwidth must be positive")
    return bw


def _feature_map(args, ds, params):
    """Load ``--lift-cache`` when present, otherwise build (and cache) a map."""
    if args.kernel == "discrete":
        raise UsageError("the discrete kernel has no feature map; it is only available to 'distance'")
    if args.lift_cache is not None and args.lift_cache.exists():
        fm = load_feature_map(args.lift_cache)
        if fm.dim != ds.d:
            raise DimensionError(f"cached feature map has dimension {fm.dim}, dataset has {ds.d}")
        params.update(feature_map_source=str(args.lift_cache), feature_map_digest=file_digest(args.lift_cache))
    else:
        bw = _bandwidth(args, ds)
        cfg = LiftConfig(args.epsilon, args.delta, args.rho)
        fm = build_feature_map(gaussian(bw), ds.d, cfg, ds.n, derive_seed(args.seed, SEED_FEATURES))
        if args.lift_cache is not None:
            save_feature_map(fm, args.lift_cache)
    params.update(bandwidth=fm.kernel.bandwidth, rho=fm.rho, feature_seed=fm.seed, epsilon=args.epsilon, delta=args.delta)
    return fm


def _table(header, rows):
    cells = [header] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    return "\n".join("  ".join(c[i].ljust(widths[i]) for i in range(len(header))).rstrip() for c in cells) + "\n"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{v:.4f}"
    return str(v)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([float(v) if isinstance(v, np.floating) else v for v in r])
    return buf.getvalue()


def _manifest_path(args, default_stem):
    if getattr(args, "manifest", None):
        return args.manifest
    for attr in ("out", "csv"):
        p = getattr(args, attr, None)
        if p is not None:
            return p.with_name(p.name + ".manifest.json")
    return Path(f"liftclust-{default_stem}.manifest.json")


def cmd_gen(args, out):
    params = {k: v for k, v in (("n", args.n), ("g", args.g), ("sep", args.sep)) if v is not None}
    if args.kind != "blobs" and ({"g", "sep"} & params.keys()):
        raise UsageError("--g and --sep apply to blobs only")
    ds, truth = gen_synthetic(args.kind, seed=args.seed, **params)
    prefix = args.out
    written = [prefix.with_name(prefix.name + ".points"), prefix.with_name(prefix.name + ".truth")]
    save_dataset(ds, written[0])
    save_partition(truth, written[1])
    if args.sensitivity:
        rp, fp, sp = sensitivity_partitions(ds, truth)
        for tag, p in (("rp", rp), ("fp", fp), ("sp", sp)):
            path = prefix.with_name(f"{prefix.name}.{tag}")
            save_partition(p, path)
            written.append(path)
    write_manifest(
        prefix.with_name(prefix.name + ".manifest.json"),
        "gen",
        {"kind": args.kind, "seed": args.seed, **params, "n_resolved": ds.n},
        outputs=written,
    )
    out.write("".join(f"wrote {p}\n" for p in written))


def cmd_distance(args, out):
    metrics = [m.strip().lower() for m in args.metrics.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in METRICS]
    if unknown:
        raise UsageError(f"unknown metric(s) {unknown}; choose from {list(METRICS)}")
    if len(args.partitions) < 2:
        raise UsageError("distance needs at least two partitions")
    ds = load_dataset(args.points)
    parts = [load_partition(p, ds) for p in args.partitions]
    params = {"metrics": metrics, "seed": args.seed, "kernel": args.kernel, "kprime_bandwidth": args.kprime_bandwidth}
    ctx = None
    if any(m in LIFTED for m in metrics):
        if args.kernel == "discrete":
            ctx = LiftContext.exact(ds, discrete())
            params.update(path="exact")
        elif args.exact:
            bw = _bandwidth(args, ds)
            ctx = LiftContext.exact(ds, gaussian(bw))
            params.update(path="exact", bandwidth=bw)
        else:
            fm = _feature_map(args, ds, params)
            ctx = LiftContext(ds, fm.kernel, fm)
            params.update(path="approximate")
    rows = []
    for (ia, pa), (ib, pb) in itertools.combinations(enumerate(parts), 2):
        row = [args.partitions[ia].name, args.partitions[ib].name]
        for m in metrics:
            if m == "liftemd":
                row.append(lift_emd(pa, pb, ctx))
            elif m == "liftkd":
                row.append(lift_kd(pa, pb, ctx, args.kprime_bandwidth))
            elif m == "lifth":
                row.append(lift_h(pa, pb, ctx))
            elif m == "accuracy" and harden(pa).k > harden(pb).k:
                row.append(float("nan"))  # undefined with more clusters than classes
            else:
                row.append(SET_METRICS[m](harden(pa), harden(pb)))
        rows.append(row)
    header = ["a", "b"] + metrics
    out.write(_table(header, rows))
    outputs = []
    if args.csv:
        atomic_write(args.csv, _csv_text(header, rows))
        outputs.append(args.csv)
    write_manifest(_manifest_path(args, "distance"), "distance", params, [args.points, *args.partitions], outputs)


def cmd_consensus(args, out):
    ds = load_dataset(args.points)
    parts = [load_partition(p, ds) for p in args.partitions]
    truth = load_partition(args.truth, ds) if args.truth else None
    params = {"k": args.k, "method": args.method, "linkage": args.linkage, "restarts": args.restarts, "soft": args.soft, "seed": args.seed}
    fm = _feature_map(args, ds, params)
    cfg = ConsensusConfig(
        k=args.k,
        method=args.method,
        kmeans_restarts=args.restarts,
        hac_linkage=args.linkage,
        seed=derive_seed(args.seed, SEED_CONSENSUS),
        output_kind="soft" if args.soft else "hard",
    )
    res = run_consensus(fm, ds, parts, None, cfg)
    save_partition(res.consensus, args.out)
    lines = [
        f"consensus: {args.out}",
        f"method: {args.method}  k requested: {args.k}  k returned: {res.consensus.k}",
        f"liftSSD: {res.objective:.6g}",
    ]
    if res.dropped:
        lines.append(f"dropped empty consensus clusters: {list(res.dropped)}")
    if res.fallback_rows:
        lines.append(f"soft rows with no positive inner product (hard fallback): {len(res.fallback_rows)}")
    if truth is not None:
        hc = harden(res.consensus)
        ht = harden(truth)
        lines.append(f"rand(consensus, truth): {rand_distance(hc, ht):.4f}")
        if hc.k <= ht.k:
            lines.append(f"accuracy(consensus, truth): {accuracy(hc, ht):.4f}")
        for path, p in zip(args.partitions, parts):
            lines.append(f"rand({path.name}, truth): {rand_distance(harden(p), ht):.4f}")
    out.write("\n".join(lines) + "\n")
    inputs = [args.points, *args.partitions] + ([args.truth] if args.truth else [])
    params.update(objective=res.objective, k_returned=res.consensus.k)
    write_manifest(_manifest_path(args, "consensus"), "consensus", params, inputs, [args.out])


def cmd_rho_sweep(args, out):
    try:
        rhos = [int(r) for r in args.rhos.split(",") if r.strip()]
    except ValueError:
        raise UsageError(f"--rhos must be a comma-separated list of integers, got {args.rhos!r}") from None
    if not rhos or any(r < 1 for r in rhos):
        raise UsageError("--rhos needs positive integers")
    ds = load_dataset(args.points)
    pa, pb = load_partition(args.pa, ds), load_partition(args.pb, ds)
    bw = _bandwidth(args, ds)
    rows = rho_sweep(ds, pa, pb, rhos, args.seeds, bw, args.seed)
    header = ["rho", "mean_error", "max_error", "exact"]
    table = [[r["rho"], r["mean_error"], r["max_error"], r["exact"]] for r in rows]
    out.write(_table(header, table))
    outputs = []
    if args.csv:
        atomic_write(args.csv, _csv_text(header, table))
        outputs.append(args.csv)
    params = {"rhos": rhos, "seeds": args.seeds, "bandwidth": bw, "seed": args.seed}
    write_manifest(_manifest_path(args, "rho-sweep"), "rho-sweep", params, [args.points, args.pa, args.pb], outputs)


def cmd_lift_cache(args, out):
    ds = load_dataset(args.points)
    args.lift_cache = None
    params = {"seed": args.seed}
    fm = _feature_map(args, ds, params)
    save_feature_map(fm, args.out)
    write_manifest(args.out.with_name(args.out.name + ".manifest.json"), "lift-cache", params, [args.points], [args.out])
    out.write(f"wrote {args.out} (rho={fm.rho}, d={fm.dim}, bandwidth={fm.kernel.bandwidth:.6g})\n")


COMMANDS = {
    "gen": cmd_gen,
    "distance": cmd_distance,
    "consensus": cmd_consensus,
    "rho-sweep": cmd_rho_sweep,
    "lift-cache": cmd_lift_cache,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        COMMANDS[args.command](args, out)
    except UsageError as e:
        print(f"liftclust {args.command}: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateEmbeddingError, ArithmeticError) as e:
        print(f"liftclust {args.command}: numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParseError, PartitionError, DimensionError, ValueError, OSError) as e:
        print(f"liftclust {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
