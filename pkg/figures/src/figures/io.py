"""Reading the experiment-result schema (CSV or JSONL).

The schema is the file contract of the sampler package's CLI:
(experiment, kernel, d, sigma, theta, n, estimator, estimate, se,
n_samples, seed). This module re-parses it independently; nothing here
imports the sampler package.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

COLUMNS = (
    "experiment",
    "kernel",
    "d",
    "sigma",
    "theta",
    "n",
    "estimator",
    "estimate",
    "se",
    "n_samples",
    "seed",
)

_INT_COLS = {"d", "n", "n_samples", "seed"}
_FLOAT_COLS = {"sigma", "theta", "estimate", "se"}


class SchemaError(ValueError):
    """Input does not match the experiment schema; names the column."""


@dataclass(frozen=True)
class Row:
    experiment: str
    kernel: str
    d: int
    sigma: float
    theta: float
    n: int
    estimator: str
    estimate: float
    se: float
    n_samples: int
    seed: int


def _convert(col: str, raw) -> object:
    try:
        if col in _INT_COLS:
            return int(raw)
        if col in _FLOAT_COLS:
            return float(raw)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"column {col!r}: cannot parse {raw!r}") from exc
    return str(raw)


def load_rows(path) -> list[Row]:
    with open(path) as fh:
        text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SchemaError("input file is empty (not even a header)")
    rows: list[Row] = []
    if lines[0].lstrip().startswith("{"):
        for ln in lines:
            doc = json.loads(ln)
            missing = [c for c in COLUMNS if c not in doc]
            if missing:
                raise SchemaError(f"missing column(s) {missing} in JSONL record")
            rows.append(Row(**{c: _convert(c, doc[c]) for c in COLUMNS}))
        return rows
    reader = csv.DictReader(text.splitlines())
    missing = [c for c in COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaError(f"missing column(s) {missing} in CSV header")
    for rec in reader:
        rows.append(Row(**{c: _convert(c, rec[c]) for c in COLUMNS}))
    return rows


def finite(rows: list[Row]) -> list[Row]:
    return [r for r in rows if math.isfinite(r.estimate)]
