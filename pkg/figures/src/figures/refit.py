"""Independent log-log slope re-fit.

Figures never trust the slope rows in the input; they recompute the
least-squares fit from the raw rows and only *compare* against any
primary-side slope for cross-checking.
"""

from __future__ import annotations

import math

from .io import Row


def loglog_slope(xs, ys) -> tuple[float, float]:
    """Least-squares slope and intercept of log(y) against log(x)."""
    if len(xs) < 2:
        raise ValueError("need at least two points to fit a slope")
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    n = len(lx)
    mx = sum(lx) / n
    my = sum(ly) / n
    sxx = sum((a - mx) ** 2 for a in lx)
    sxy = sum((a - mx) * (b - my) for a, b in zip(lx, ly))
    slope = sxy / sxx
    return slope, my - slope * mx


def series_slope(rows: list[Row], kernel: str, estimator: str) -> tuple[float, float]:
    pts = sorted(
        [(r.d, r.estimate) for r in rows
         if r.kernel == kernel and r.estimator == estimator and r.d > 0 and r.estimate > 0]
    )
    return loglog_slope([p[0] for p in pts], [p[1] for p in pts])


def primary_slope(rows: list[Row], kernel: str, estimator: str) -> float | None:
    """The slope the producing side emitted, if present."""
    name = f"loglog-slope:{estimator}"
    for r in rows:
        if r.kernel == kernel and r.estimator == name:
            return r.estimate
    return None
