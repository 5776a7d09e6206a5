"""The four figure kinds, rendered deterministically.

Fixed style, no timestamps, salted SVG ids: rendering the same input
twice produces byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import Row, finite, load_rows  # noqa: E402
from .refit import primary_slope, series_slope  # noqa: E402

KINDS = ("scaling", "gb-decay", "moments", "beta-curves")

plt.rcParams.update(
    {
        "svg.hashsalt": "mtm-figures",
        "figure.figsize": (7.0, 4.6),
        "figure.dpi": 110,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 9,
    }
)

_SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


@dataclass(frozen=True)
class FigureSpec:
    inputs: tuple[str, ...]
    kind: str
    out: str
    logx: bool = True
    logy: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input path is required")


@dataclass
class RenderReport:
    """What the renderer computed, for cross-checks and tests."""

    n_rows: int
    annotations: dict = field(default_factory=dict)
    slope_agreements: dict = field(default_factory=dict)


def _empty_axes(ax, message: str):
    ax.text(0.5, 0.5, message, ha="center", va="center", transform=ax.transAxes,
            color="#aa3333")
    ax.set_xticks([])
    ax.set_yticks([])


def _save(fig, spec: FigureSpec):
    fig.savefig(spec.out, metadata={"Date": None} if spec.out.endswith(".svg") else None)
    plt.close(fig)


def _render_scaling(rows: list[Row], spec: FigureSpec, report: RenderReport, ax):
    estimator = "lag-autocorrelation"
    kernels = sorted({r.kernel for r in rows if r.estimator == estimator and r.d > 0})
    if not kernels:
        _empty_axes(ax, "no scaling rows in input")
        return
    if spec.logx:
        ax.set_xscale("log")
    if spec.logy:
        ax.set_yscale("log")
    ds_all = sorted({r.d for r in rows if r.d > 0})
    for color, kernel in zip(_SERIES_COLORS, kernels):
        pts = sorted(
            (r.d, r.estimate, r.se)
            for r in rows
            if r.kernel == kernel and r.estimator == estimator and r.d > 0
        )
        d = np.array([p[0] for p in pts], dtype=float)
        y = np.array([p[1] for p in pts])
        se = np.array([p[2] for p in pts])
        ax.errorbar(d, y, yerr=4 * se, fmt="o", color=color, label=f"{kernel}")
        slope, intercept = series_slope(rows, kernel, estimator)
        grid = np.logspace(math.log10(d.min()), math.log10(d.max()), 64)
        ax.plot(grid, np.exp(intercept) * grid**slope, "-", color=color, lw=1)
        ax.annotate(f"{kernel}: slope {slope:.3f}",
                    xy=(d[-1], y[-1]), xytext=(4, 4), textcoords="offset points",
                    color=color)
        report.annotations[kernel] = slope
        ref = primary_slope(rows, kernel, estimator)
        if ref is not None:
            report.slope_agreements[kernel] = abs(slope - ref)
    # reference decay laws of the two scaling regimes
    d0 = np.array(ds_all, dtype=float)
    y0 = rows[0].estimate if rows else 1.0
    for expo, style in ((-0.5, "--"), (-1.0, ":")):
        ax.plot(d0, y0 * (d0 / d0[0]) ** expo, style, color="gray", lw=1,
                label=f"d^{expo:g}")
    ax.set_xlabel("dimension d")
    ax.set_ylabel("gap proxy (1 - lag-1 autocorrelation)")
    ax.set_title("spectral-gap proxy scaling")
    ax.legend(loc="lower left")


def _render_gb_decay(rows: list[Row], spec: FigureSpec, report: RenderReport, ax):
    estimators = ("conductance-halfspace", "acceptance-rate")
    any_series = False
    for color, est in zip(_SERIES_COLORS, estimators):
        pts = sorted((r.n, r.estimate, r.se) for r in rows if r.estimator == est)
        if not pts:
            continue
        if not any_series and spec.logx:
            ax.set_xscale("log")
        any_series = True
        n = np.array([p[0] for p in pts], dtype=float)
        y = np.array([p[1] for p in pts])
        se = np.array([p[2] for p in pts])
        ax.errorbar(n, y, yerr=4 * se, fmt="o-", color=color, label=est)
        report.annotations[est] = y.tolist()
    if not any_series:
        _empty_axes(ax, "no gb-decay rows in input")
        return
    ax.set_xlabel("proposal count n")
    ax.set_ylabel("estimate")
    ax.set_title("globally balanced chain: tail decay in n")
    ax.legend()


def _render_moments(rows: list[Row], spec: FigureSpec, report: RenderReport, ax):
    bases = sorted(
        {r.estimator.rsplit(":", 1)[0] for r in rows if r.estimator.endswith(":oracle")}
    )
    pairs = []
    for base in bases:
        vals = {}
        for r in rows:
            if r.estimator == f"{base}:oracle":
                vals["oracle"] = r.estimate
            elif r.estimator == f"{base}:formula":
                vals["formula"] = r.estimate
            elif r.estimator == f"{base}:agrees":
                vals["agrees"] = bool(r.estimate)
        if {"oracle", "formula"} <= set(vals) and all(
            math.isfinite(vals[k]) for k in ("oracle", "formula")
        ):
            pairs.append((base, vals["oracle"], vals["formula"], vals.get("agrees", False)))
    if not pairs:
        _empty_axes(ax, "no moment-report rows in input")
        return
    lo = min(min(p[1], p[2]) for p in pairs) * 0.8
    hi = max(max(p[1], p[2]) for p in pairs) * 1.2
    ax.plot([lo, hi], [lo, hi], "-", color="gray", lw=1, label="agreement line")
    for base, oracle, formula, agrees in pairs:
        color = "#2ca02c" if agrees else "#d62728"
        ax.plot([oracle], [formula], "o", color=color)
        ax.annotate(base, xy=(oracle, formula), xytext=(4, 4), textcoords="offset points")
        report.annotations[base] = {"oracle": oracle, "formula": formula, "agrees": agrees}
    ax.set_xlabel("oracle value (quadrature)")
    ax.set_ylabel("displayed-formula value")
    ax.set_title("moment closed forms: formula vs oracle (red = discrepant)")
    ax.legend()


def _render_beta_curves(rows: list[Row], spec: FigureSpec, report: RenderReport, ax):
    sub = [r for r in rows if r.estimator == "beta1n"]
    if not sub:
        _empty_axes(ax, "no beta1n rows in input")
        return
    ns = sorted({r.n for r in sub})
    for color, n in zip(_SERIES_COLORS, ns):
        pts = sorted((r.sigma, r.estimate) for r in sub if r.n == n)
        s = np.array([p[0] for p in pts])
        b = np.array([p[1] for p in pts])
        ax.plot(s, b, "o-", color=color, label=f"n = {n}")
        report.annotations[n] = b.tolist()
    grid = np.logspace(
        math.log10(min(r.sigma for r in sub)), math.log10(max(r.sigma for r in sub)), 256
    )
    ax.plot(grid, (grid <= 1.0).astype(float), "--", color="black", lw=1,
            label="indicator 1{s <= 1}")
    ax.set_xscale("log")
    ax.set_xlabel("s")
    ax.set_ylabel("beta_1n(s)")
    ax.set_title("resampling comparison profile vs the indicator limit")
    ax.legend()
    ax.set_ylim(-0.05, 1.05)


_RENDERERS = {
    "scaling": _render_scaling,
    "gb-decay": _render_gb_decay,
    "moments": _render_moments,
    "beta-curves": _render_beta_curves,
}


def render(spec: FigureSpec) -> RenderReport:
    """Render one figure; returns the computed annotations for cross-checks."""
    rows: list[Row] = []
    for path in spec.inputs:
        rows.extend(load_rows(path))
    report = RenderReport(n_rows=len(rows))
    fig, ax = plt.subplots()
    _RENDERERS[spec.kind](finite(rows), spec, report, ax)
    _save(fig, spec)
    return report
