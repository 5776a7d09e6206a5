"""Empirical estimators bridging the continuous chains to the spectral
quantities: Dirichlet-ratio and autocorrelation gap proxies, acceptance
profiles, and a halfspace conductance estimator.

All estimators run vectorized one-step transitions over independent
replicas, draw through batch-keyed substreams (deterministic for a given
seed, independent of worker layout), and report batch-mean standard
errors from at least 30 batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InvalidSetError, UnsupportedTargetError
from .rng import Slot, Substream
from .samplers.steps import logsumexp
from .samplers.types import IDEAL, LAZY_MTM, MH, MTM, ChainTrace, KernelSpec

N_BATCHES = 50
MAX_BATCH_ELEMENTS = 4_000_000  # B * n * d cap for the proposal tensors


@dataclass(frozen=True)
class GapProxyReport:
    kernel: str
    d: int
    sigma: float
    n: int
    estimator: str
    estimate: float
    se: float
    n_samples: int
    extra: dict | None = None


def _batch_sizes(total: int, spec: KernelSpec) -> list[int]:
    if total < N_BATCHES:
        raise ValueError(f"need at least {N_BATCHES} samples, got {total}")
    per = math.ceil(total / N_BATCHES)
    cap = max(1, MAX_BATCH_ELEMENTS // max(1, spec.n_tries * spec.target.d))
    per = min(per, cap)
    sizes = []
    left = total
    while left > 0:
        sizes.append(min(per, left))
        left -= sizes[-1]
    return sizes


def _require_gaussian(spec: KernelSpec) -> None:
    if not spec.target.is_standard_gaussian:
        raise UnsupportedTargetError("diagnostics need the Gaussian target")


def batch_transition(spec: KernelSpec, X: np.ndarray, gen) -> dict:
    """One transition per row of X, fully vectorized; returns the new
    states, the per-row log acceptance probability, and the move flags."""
    _require_gaussian(spec)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    B, d = X.shape
    sigma = spec.proposal.sigma
    theta = spec.weight.theta
    s2 = spec.proposal.sigma2
    lpX = -0.5 * np.einsum("bi,bi->b", X, X)

    if spec.kind == MH:
        Y = X + sigma * gen.standard_normal((B, d))
        lpY = -0.5 * np.einsum("bi,bi->b", Y, Y)
        la = np.minimum(0.0, lpY - lpX)
    elif spec.kind == IDEAL:
        rho = 1.0 / (1.0 + theta * s2)
        sd = math.sqrt(s2 * rho)
        Y = rho * X + sd * gen.standard_normal((B, d))
        lpY = -0.5 * np.einsum("bi,bi->b", Y, Y)
        c_qw = theta * theta * s2 * rho / 2.0
        la = np.minimum(0.0, (1.0 - 2.0 * theta) * (lpY - lpX) + 2.0 * c_qw * (lpY - lpX))
    elif spec.kind in (MTM, LAZY_MTM):
        n = spec.n_tries
        Ys = X[:, None, :] + sigma * gen.standard_normal((B, n, d))
        lpYs = -0.5 * np.einsum("bni,bni->bn", Ys, Ys)
        lw = theta * (lpYs - lpX[:, None])
        with np.errstate(divide="ignore"):
            gum = -np.log(-np.log(gen.random((B, n))))
        I = np.argmax(lw + gum, axis=1)
        rows = np.arange(B)
        Y = Ys[rows, I]
        lpY = lpYs[rows, I]
        lse_x = logsumexp(lw, axis=1)
        Zs = Y[:, None, :] + sigma * gen.standard_normal((B, n, d))
        Zs[rows, I] = X
        lpZs = -0.5 * np.einsum("bni,bni->bn", Zs, Zs)
        lw_yz = theta * (lpZs - lpY[:, None])
        lw_yz[rows, I] = -lw[rows, I]
        lse_y = logsumexp(lw_yz, axis=1)
        la = np.minimum(0.0, (1.0 - 2.0 * theta) * (lpY - lpX) + (lse_x - lse_y))
    else:
        raise ValueError(f"no batch transition for kernel kind {spec.kind!r}")

    with np.errstate(divide="ignore"):
        accepted = np.log(gen.random(B)) < la
    if spec.kind == LAZY_MTM:
        hold = gen.random(B) < 0.5
        accepted = accepted & ~hold
    X_next = np.where(accepted[:, None], Y, X)
    return {"X_next": X_next, "log_alpha": la, "accepted": accepted, "proposed": Y}


def _batch_means(values: list[float]) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    est = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else float("nan")
    return est, max(se, 1e-300)


def dirichlet_ratio_linear(
    spec: KernelSpec, v: np.ndarray, n_samples: int, seed: int, stream_id: int = 0
) -> GapProxyReport:
    """E(P, f)/|f|^2 for the linear test function f(x) = <v, x>, estimated
    from stationary one-step pairs; upper-bounds the spectral gap."""
    _require_gaussian(spec)
    v = np.asarray(v, dtype=float)
    vv = float(np.dot(v, v))
    sub = Substream(seed, stream_id)
    ests = []
    for b, size in enumerate(_batch_sizes(n_samples, spec)):
        gen = sub.at(b, Slot.START)
        X = spec.target.sample_pi(gen, size)
        out = batch_transition(spec, X, gen)
        fx = X @ v
        fy = out["X_next"] @ v
        ests.append(float(np.mean(0.5 * (fx - fy) ** 2) / vv))
    est, se = _batch_means(ests)
    return GapProxyReport(
        kernel=spec.kind,
        d=spec.target.d,
        sigma=spec.proposal.sigma,
        n=spec.n_tries,
        estimator="dirichlet-linear",
        estimate=est,
        se=se,
        n_samples=n_samples,
    )


def acceptance_profile(
    spec: KernelSpec,
    radii: list[float],
    n_samples: int,
    seed: int,
    stream_id: int = 0,
) -> list[GapProxyReport]:
    """Mean acceptance probability alpha(x) at fixed points |x| = r."""
    _require_gaussian(spec)
    reports = []
    for j, r in enumerate(radii):
        x = np.zeros(spec.target.d)
        x[0] = r
        sub = Substream(seed, stream_id)
        ests = []
        for b, size in enumerate(_batch_sizes(n_samples, spec)):
            gen = sub.at(j * 100_000 + b, Slot.PROPOSAL)
            X = np.tile(x, (size, 1))
            out = batch_transition(spec, X, gen)
            ests.append(float(np.exp(out["log_alpha"]).mean()))
        est, se = _batch_means(ests)
        reports.append(
            GapProxyReport(
                kernel=spec.kind,
                d=spec.target.d,
                sigma=spec.proposal.sigma,
                n=spec.n_tries,
                estimator="acceptance-rate",
                estimate=est,
                se=se,
                n_samples=n_samples,
                extra={"radius": r},
            )
        )
    return reports


def halfspace_radius(d: int, tail_mass: float) -> float:
    """R with pi(|x| > R) = tail_mass for the d-dimensional Gaussian."""
    return float(np.sqrt(stats.chi2.isf(tail_mass, d)))


def conductance_halfspace(
    spec: KernelSpec,
    R: float,
    n_samples: int,
    seed: int,
    stream_id: int = 0,
    transition=batch_transition,
) -> GapProxyReport:
    """Flow estimate (pi x P)(A x A^c)/pi(A) for A = {|x| > R}.

    Upper-bounds the conductance by definition of the infimum. Starting
    points are exact pi draws rejected onto A. ``transition`` is
    injectable so reference kernels can calibrate the estimator.
    """
    _require_gaussian(spec)
    d = spec.target.d
    piA = float(stats.chi2.sf(R * R, d))
    if piA > 0.5:
        raise InvalidSetError(f"pi(A) = {piA:.3f} > 1/2; increase the radius")
    sub = Substream(seed, stream_id)
    ests = []
    for b, size in enumerate(_batch_sizes(n_samples, spec)):
        gen = sub.at(b, Slot.START)
        X = np.empty((0, d))
        while X.shape[0] < size:
            cand = gen.standard_normal((max(64, int(3 * size / piA)), d))
            keep = np.einsum("bi,bi->b", cand, cand) > R * R
            X = np.vstack([X, cand[keep]])
        X = X[:size]
        out = transition(spec, X, gen)
        Xn = out["X_next"]
        ests.append(float((np.einsum("bi,bi->b", Xn, Xn) <= R * R).mean()))
    est, se = _batch_means(ests)
    return GapProxyReport(
        kernel=spec.kind,
        d=d,
        sigma=spec.proposal.sigma,
        n=spec.n_tries,
        estimator="conductance-halfspace",
        estimate=est,
        se=se,
        n_samples=n_samples,
        extra={"radius": R, "pi_A": piA},
    )


def autocorr_gap_proxy(trace: ChainTrace, coord: int = 0, min_length: int = 10_000) -> GapProxyReport:
    """1 - lag-1 autocorrelation of one coordinate of a stationary trace.

    Equals E(P, f)/|f|^2 at stationarity for f = that coordinate, so it
    upper-bounds the gap in the same variational sense.
    """
    series = trace.states[:, coord]
    if series.shape[0] < min_length:
        raise ValueError(f"trace too short: {series.shape[0]} < {min_length}")

    def one_minus_rho(s: np.ndarray) -> float:
        a, b = s[:-1], s[1:]
        c = np.corrcoef(a, b)[0, 1]
        return 1.0 - float(c)

    est = one_minus_rho(series)
    blocks = np.array_split(series, N_BATCHES)
    ests = [one_minus_rho(b) for b in blocks if len(b) > 2]
    _, se = _batch_means(ests)
    return GapProxyReport(
        kernel="trace",
        d=trace.states.shape[1],
        sigma=float("nan"),
        n=0,
        estimator="lag-autocorrelation",
        estimate=est,
        se=se,
        n_samples=series.shape[0],
        extra={"coord": coord},
    )
