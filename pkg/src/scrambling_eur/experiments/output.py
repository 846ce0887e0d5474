"""CSV / JSON emission of sweep records with a metadata sidecar."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from dataclasses import asdict
from pathlib import Path

from .sweep import SweepRecord

CSV_COLUMNS = (
    "t",
    "otoc_re",
    "otoc_im",
    "lhs_vn",
    "lhs_minmax",
    "bound_taylor",
    "bound_exact_trace",
    "term_c0",
    "term_g1_sum",
    "term_g2_classical",
    "term_quasi_cross",
    "term_quasi_11",
    "term_quasi_22",
    "min_j1",
    "min_j2",
    "min_w",
    "t_star_estimate",
)
_INT_COLUMNS = ("min_j1", "min_j2")


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


def _row(record: SweepRecord) -> list[str]:
    out = []
    for col in CSV_COLUMNS:
        v = getattr(record, col)
        out.append(str(int(v)) if col in _INT_COLUMNS else format_float(v))
    return out


def _json_value(v):
    if isinstance(v, float) and (math.isnan(v) or math.isinf(v)):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def record_to_dict(record: SweepRecord) -> dict:
    return _json_value(asdict(record))


def metadata_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".meta.json")


def emit(records, fmt: str, path: str | Path, metadata: dict | None = None, reproducible: bool = False) -> Path:
    """Write records as CSV or JSON and a ``<path>.meta.json`` sidecar.

    The sidecar echoes ``metadata`` (config, grid window, library version);
    its timestamp is left out when ``reproducible`` is set.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to emit")
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for r in sorted(records, key=lambda r: r.t):
                writer.writerow(_row(r))
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump([record_to_dict(r) for r in sorted(records, key=lambda r: r.t)], fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    meta = dict(metadata or {})
    from .. import __version__

    meta["library_version"] = __version__
    meta["n_records"] = len(records)
    if not reproducible:
        meta["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    with open(metadata_path(path), "w") as fh:
        json.dump(_json_value(meta), fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def read_csv(path: str | Path) -> list[dict]:
    """Parse an emitted CSV back into column dicts of floats and ints."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError("unexpected CSV header")
        rows = []
        for line in reader:
            rows.append({c: (int(v) if c in _INT_COLUMNS else float(v)) for c, v in zip(header, line)})
    return rows
