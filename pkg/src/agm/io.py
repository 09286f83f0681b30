"""File formats for matrix tuples and experiment outputs, with run manifests.

Tuple files look like ``{"d": 2, "n": 3, "matrices": [[a11, a12, a21, a22], ...]}``
with each matrix flattened row-major.  Floats are written with 17
significant digits so a tuple survives a write/read cycle bit for bit.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import os
import platform
from importlib import metadata
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .expectations import MatrixTuple
from .linalg import InvalidInputError

__all__ = [
    "TupleFormatError",
    "format_float",
    "tuple_to_json",
    "tuple_from_json",
    "write_tuple",
    "read_tuple",
    "write_json",
    "append_jsonl",
    "write_csv",
    "run_manifest",
    "write_manifest",
    "package_version",
]


class TupleFormatError(InvalidInputError):
    """Malformed matrix-tuple file."""


def format_float(x: float) -> str:
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    return format(x, ".17g")


def _tuple_payload(t: MatrixTuple) -> tuple[int, int, list[str]]:
    rows = [", ".join(format_float(v) for v in m.ravel()) for m in t.stack]
    return t.d, t.n, rows


def tuple_to_json(t: MatrixTuple) -> str:
    d, n, rows = _tuple_payload(t)
    body = ",\n    ".join(f"[{r}]" for r in rows)
    return f'{{"d": {d}, "n": {n}, "matrices": [\n    {body}\n]}}\n'


def tuple_to_dict(t: MatrixTuple) -> dict:
    return {"d": t.d, "n": t.n, "matrices": [m.ravel().tolist() for m in t.stack]}


def tuple_from_json(obj) -> MatrixTuple:
    """Parse a tuple from a JSON string or an already-decoded mapping."""
    if isinstance(obj, (str, bytes)):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise TupleFormatError(f"tuple file is not valid JSON: {exc}") from exc
    if not isinstance(obj, Mapping) or not {"d", "n", "matrices"} <= set(obj):
        raise TupleFormatError('tuple JSON needs keys "d", "n" and "matrices"')
    d, n, mats = obj["d"], obj["n"], obj["matrices"]
    if not (isinstance(d, int) and isinstance(n, int) and d >= 1 and n >= 1):
        raise TupleFormatError("d and n must be positive integers")
    if not isinstance(mats, list) or len(mats) != n:
        raise TupleFormatError(f"expected {n} matrices, got {len(mats) if isinstance(mats, list) else 'none'}")
    try:
        arr = np.asarray(mats, dtype=float)
    except (TypeError, ValueError) as exc:
        raise TupleFormatError(f"matrix entries must be numbers: {exc}") from exc
    if arr.shape != (n, d * d):
        raise TupleFormatError(f"each matrix needs {d * d} row-major entries")
    return MatrixTuple(arr.reshape(n, d, d))


def write_tuple(path, t: MatrixTuple) -> None:
    Path(path).write_text(tuple_to_json(t))


def read_tuple(path) -> MatrixTuple:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise TupleFormatError(f"cannot read tuple file {path}: {exc}") from exc
    return tuple_from_json(text)


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, default=_default, indent=2, sort_keys=True)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def append_jsonl(path, records: Iterable) -> int:
    count = 0
    with open(path, "a") as fh:
        for rec in records:
            fh.write(json.dumps(rec, default=_default, sort_keys=True) + "\n")
            count += 1
    return count


def write_csv(path, header: list[str], rows: Iterable[Iterable]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def run_manifest(subcommand: str, argv: list[str], flags: Mapping, seed: int | None) -> dict:
    return {
        "subcommand": subcommand,
        "argv": list(argv),
        "flags": dict(flags),
        "seed": seed,
        "version": package_version(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "rng": "numpy Philox4x64-10, key from SeedSequence(seed), counter (0, 0, sub, trial)",
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def write_manifest(output_path, manifest: Mapping) -> Path:
    """Write ``<output>.manifest.json`` next to ``output_path``."""
    p = Path(output_path)
    target = p / "manifest.json" if p.is_dir() else p.with_name(p.name + ".manifest.json")
    os.makedirs(target.parent, exist_ok=True)
    write_json(target, manifest)
    return target
