"""Result rows and their CSV/JSONL serialization.

One fixed schema for every experiment: (experiment, kernel, d, sigma,
theta, n, estimator, estimate, se, n_samples, seed). Floats are written
with 17 significant digits, which round-trips IEEE doubles exactly, so
re-running with the same seed reproduces output files byte for byte.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass

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

FORMATS = ("csv", "jsonl")


@dataclass(frozen=True)
class ResultRow:
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


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _row_values(row: ResultRow) -> list[str]:
    d = asdict(row)
    out = []
    for col in COLUMNS:
        v = d[col]
        out.append(_fmt_float(v) if isinstance(v, float) else str(v))
    return out


def render(rows: list[ResultRow], fmt: str) -> str:
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    buf = io.StringIO()
    if fmt == "csv":
        buf.write(",".join(COLUMNS) + "\n")
        for row in rows:
            buf.write(",".join(_row_values(row)) + "\n")
    else:
        for row in rows:
            vals = _row_values(row)
            parts = []
            for col, raw, v in zip(COLUMNS, vals, (getattr(row, c) for c in COLUMNS)):
                if isinstance(v, str):
                    parts.append(f"{json.dumps(col)}:{json.dumps(v)}")
                elif isinstance(v, float) and (math.isnan(v) or math.isinf(v)):
                    parts.append(f"{json.dumps(col)}:{json.dumps(raw)}")
                else:
                    parts.append(f"{json.dumps(col)}:{raw}")
            buf.write("{" + ",".join(parts) + "}\n")
    return buf.getvalue()


def emit(rows: list[ResultRow], path, fmt: str) -> None:
    text = render(rows, fmt)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _parse_cell(col: str, raw) -> object:
    if col in ("d", "n", "n_samples", "seed"):
        return int(raw)
    if col in ("sigma", "theta", "estimate", "se"):
        return float(raw)
    return str(raw)


def parse(path) -> list[ResultRow]:
    rows: list[ResultRow] = []
    with open(path) as fh:
        text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return rows
    if lines[0].startswith("{"):
        for ln in lines:
            doc = json.loads(ln)
            rows.append(ResultRow(**{c: _parse_cell(c, doc[c]) for c in COLUMNS}))
    else:
        header = lines[0].split(",")
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        for ln in lines[1:]:
            cells = ln.split(",")
            rows.append(
                ResultRow(**{c: _parse_cell(c, v) for c, v in zip(COLUMNS, cells)})
            )
    return rows
