"""Text formats for points and partitions, feature-map files and run manifests.

Points: one point per line, values separated by commas and/or whitespace,
``#`` starts a comment line. Hard partitions: one label per line. Soft
partitions: a ``k=<int>`` header line followed by one row of k weights per
point.
"""
from __future__ import annotations

import hashlib
import io
import json
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .kernels import FeatureMap, Kernel
from .partitions import DataSet, Partition, PartitionError, check

__all__ = [
    "ParseError",
    "load_dataset",
    "save_dataset",
    "load_partition",
    "save_partition",
    "save_feature_map",
    "load_feature_map",
    "atomic_write",
    "file_digest",
    "write_manifest",
]

_SPLIT = re.compile(r"[,\s]+")
FEATURE_MAP_FORMAT = "liftclust-feature-map/1"


class ParseError(ValueError):
    def __init__(self, message, path=None, line=None, column=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
                if column is not None:
                    where += f":{column}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line
        self.column = column


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            s = raw.strip()
            if not s or s.startswith("#"):
                continue
            yield lineno, s


def _parse_row(s, path, lineno):
    out = []
    for col, tok in enumerate(t for t in _SPLIT.split(s) if t):
        try:
            v = float(tok)
        except ValueError:
            raise ParseError(f"cannot parse {tok!r} as a number", path, lineno, col + 1) from None
        if not np.isfinite(v):
            raise ParseError(f"non-finite value {tok!r}", path, lineno, col + 1)
        out.append(v)
    return out


def load_dataset(path) -> DataSet:
    rows = []
    d = None
    for lineno, s in _data_lines(path):
        row = _parse_row(s, path, lineno)
        if d is None:
            d = len(row)
        elif len(row) != d:
            raise ParseError(f"line has {len(row)} values, expected {d}", path, lineno)
        rows.append(row)
    if not rows:
        raise ParseError("empty dataset", path)
    return DataSet(np.array(rows, dtype=float))


def save_dataset(ds: DataSet, path):
    buf = io.StringIO()
    np.savetxt(buf, ds.points, fmt="%.17g")
    atomic_write(path, buf.getvalue())


def _label_key(tok):
    try:
        return (0, int(tok), "")
    except ValueError:
        return (1, 0, tok)


def load_partition(path, ds: DataSet | None = None) -> Partition:
    """Read a hard or soft partition file and validate it against ``ds``.

    Hard labels need not be contiguous; columns follow sorted label order
    (integers numerically) and the original labels are kept in
    ``Partition.labels``.
    """
    lines = list(_data_lines(path))
    if not lines:
        raise ParseError("empty partition file", path)
    first_no, first = lines[0]
    if first.replace(" ", "").lower().startswith("k="):
        try:
            k = int(first.split("=", 1)[1])
        except ValueError:
            raise ParseError(f"bad soft-partition header {first!r}", path, first_no) from None
        if k < 1:
            raise ParseError("k must be positive", path, first_no)
        rows = []
        for lineno, s in lines[1:]:
            row = _parse_row(s, path, lineno)
            if len(row) != k:
                raise ParseError(f"row has {len(row)} weights, expected k={k}", path, lineno)
            if any(v < 0 for v in row):
                raise ParseError("negative weight", path, lineno, next(i for i, v in enumerate(row) if v < 0) + 1)
            rows.append(row)
        if not rows:
            raise ParseError("soft partition has no rows", path)
        p = Partition(np.array(rows), None, "soft")
    else:
        toks = []
        for lineno, s in lines:
            parts = _SPLIT.split(s)
            if len(parts) != 1:
                raise ParseError(f"expected one label per line, got {len(parts)} values", path, lineno)
            toks.append(parts[0])
        uniq = sorted(set(toks), key=_label_key)
        names = tuple(int(t) if _label_key(t)[0] == 0 else t for t in uniq)
        col = {t: j for j, t in enumerate(uniq)}
        A = np.zeros((len(toks), len(uniq)))
        A[np.arange(len(toks)), [col[t] for t in toks]] = 1.0
        p = Partition(A, names, "hard")
    if ds is not None and p.n != ds.n:
        raise PartitionError("shape", f"{path}: partition has {p.n} rows but dataset has {ds.n} points")
    return check(p, ds)


def save_partition(p: Partition, path):
    if p.is_hard:
        text = "\n".join(str(p.labels[j]) for j in p.hard_labels()) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"k={p.k}\n")
        np.savetxt(buf, p.assignment, fmt="%.17g")
        text = buf.getvalue()
    atomic_write(path, text)


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to a temporary sibling, then rename over ``path``."""
    path = Path(path)
    mode = "wb" if isinstance(data, (bytes, bytearray)) else "w"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_feature_map(fm: FeatureMap, path):
    """Store a feature map as an ``.npz`` archive with a JSON header."""
    header = {
        "format": FEATURE_MAP_FORMAT,
        "seed": fm.seed,
        "rho": fm.rho,
        "d": fm.dim,
        "bandwidth": fm.kernel.bandwidth,
        "meta": fm.meta,
    }
    buf = io.BytesIO()
    np.savez(
        buf,
        header=np.array(json.dumps(header, sort_keys=True)),
        frequencies=fm.frequencies,
        phases=fm.phases,
        scale=np.array(fm.scale),
    )
    atomic_write(path, buf.getvalue())


def load_feature_map(path) -> FeatureMap:
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("format") != FEATURE_MAP_FORMAT:
            raise ParseError(f"not a feature-map file (format {header.get('format')!r})", path)
        W = np.array(z["frequencies"])
        b = np.array(z["phases"])
        scale = float(z["scale"])
    if W.shape != (header["rho"], header["d"]) or b.shape != (header["rho"],):
        raise ParseError("feature-map arrays do not match header shape", path)
    return FeatureMap(W, b, scale, int(header["seed"]), Kernel("gaussian", header["bandwidth"]), header.get("meta", {}))


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def write_manifest(path, command: str, params: dict, inputs=(), outputs=()):
    """Record what a run did: resolved parameters, input digests and outputs."""
    from . import __version__

    manifest = {
        "tool": "liftclust",
        "version": __version__,
        "command": command,
        "params": params,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
    }
    atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return manifest


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
