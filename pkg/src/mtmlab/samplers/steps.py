"""Single-step transitions for every kernel, written against the model
interface so the same code runs on R^d and on finite embeddings.

All acceptance arithmetic is in log space; weight sums go through
log-sum-exp; categorical selection is Gumbel-argmax on log-weights with
first-index tie breaking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateSelectionError
from ..rng import Slot, Substream
from .models import FiniteKernelModel, GaussianKernelModel
from .types import (
    IDEAL,
    LAZY_MTM,
    LOG_CLAMP,
    MH,
    MTM,
    SEMI_IDEAL,
    FiniteKernelSpec,
    KernelSpec,
    StepRecord,
)


@dataclass
class StepStreams:
    """Per-step view on a chain's substream; one generator per draw slot."""

    sub: Substream
    step: int

    def gen(self, slot: int):
        # Slots share one Generator object repositioned in place: draw
        # from each slot immediately and completely before the next call.
        return self.sub.at(self.step, slot)


def step_streams(seed: int, step: int = 0, stream_id: int = 0) -> StepStreams:
    return StepStreams(Substream(seed, stream_id), step)


def logsumexp(a: np.ndarray, axis: int | None = None):
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        s = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return float(s.reshape(-1)[0]) if axis is None else np.squeeze(s, axis=axis)


def model_for(spec) -> GaussianKernelModel | FiniteKernelModel:
    if isinstance(spec, FiniteKernelSpec):
        return FiniteKernelModel(spec.chain)
    return GaussianKernelModel(spec.target, spec.proposal, spec.weight)


def _accept(streams: StepStreams, log_alpha: float) -> bool:
    u = streams.gen(Slot.ACCEPT).random()
    with np.errstate(divide="ignore"):
        return bool(np.log(u) < log_alpha)


def step_mh(spec, x, streams: StepStreams, model=None) -> tuple[np.ndarray, StepRecord]:
    """Plain Metropolis-Hastings with the base proposal q."""
    model = model or model_for(spec)
    x = np.asarray(x, dtype=float)
    y = model.sample_proposals(streams.gen(Slot.PROPOSAL), x, 1)[0]
    log_alpha = min(
        0.0, (model.logpi(y) - model.logpi(x)) + model.log_q_ratio(x, y)
    )
    accepted = _accept(streams, log_alpha)
    rec = StepRecord(
        previous=x,
        proposed=y,
        selected=-1,
        log_accept=log_alpha,
        accepted=accepted,
        n_weight_evals=1,
    )
    return (y if accepted else x), rec


def step_ideal(spec, x, streams: StepStreams, model=None) -> tuple[np.ndarray, StepRecord]:
    """Metropolis-Hastings with the weighted proposal q^w (exact normalizers)."""
    model = model or model_for(spec)
    x = np.asarray(x, dtype=float)
    y = model.sample_qw(streams.gen(Slot.PROPOSAL), x)
    lw_xy = float(model.log_w_batch(x, y[None, :])[0])
    lw_yx = model.log_w_reverse(x, y, lw_xy)
    terms = np.array(
        [
            model.logpi(y) - model.logpi(x) + model.log_q_ratio(x, y),
            lw_yx - lw_xy,
            model.log_qw(x) - model.log_qw(y),
        ]
    )
    clamped = bool((terms < LOG_CLAMP).any())
    log_alpha = min(0.0, float(np.clip(terms, LOG_CLAMP, None).sum()))
    accepted = _accept(streams, log_alpha)
    rec = StepRecord(
        previous=x,
        proposed=y,
        selected=-1,
        log_accept=log_alpha,
        accepted=accepted,
        n_weight_evals=1,
        clamped=clamped,
    )
    return (y if accepted else x), rec


def resample_proposal(spec, x, streams: StepStreams, model=None):
    """Importance-resampling proposal: n candidates, categorical selection.

    Returns ``(I, y, ys, lw)``: the selected index, the proposal, all
    candidates, and their log-weights.
    """
    model = model or model_for(spec)
    x = np.asarray(x, dtype=float)
    n = spec.n_tries
    ys = model.sample_proposals(streams.gen(Slot.PROPOSAL), x, n)
    lw = np.asarray(model.log_w_batch(x, ys), dtype=float)
    if np.all(np.isneginf(lw)):
        raise DegenerateSelectionError(
            f"all {n} candidate weights vanished at x={x!r}"
        )
    u = streams.gen(Slot.SELECT).random(n)
    with np.errstate(divide="ignore"):
        gumbel = -np.log(-np.log(u))
    # argmax takes the first maximizer: deterministic tie breaking
    I = int(np.argmax(lw + gumbel))
    return I, ys[I], ys, lw


def step_mtm(spec, x, streams: StepStreams, model=None) -> tuple[np.ndarray, StepRecord]:
    """Multiple-try Metropolis with shadow samples (Z_I pinned to x)."""
    model = model or model_for(spec)
    x = np.asarray(x, dtype=float)
    n = spec.n_tries
    I, y, ys, lw_xy = resample_proposal(spec, x, streams, model=model)
    lse_x = float(logsumexp(lw_xy))
    lw_yx = model.log_w_reverse(x, y, float(lw_xy[I]))

    zs = model.sample_proposals(streams.gen(Slot.SHADOW), y, n)
    zs[I] = x
    lw_yz = np.empty(n)
    others = np.arange(n) != I
    if n > 1:
        lw_yz[others] = model.log_w_batch(y, zs[others])
    lw_yz[I] = lw_yx  # reuses the cached reverse weight
    lse_y = float(logsumexp(lw_yz))

    log_alpha = min(
        0.0,
        (model.logpi(y) - model.logpi(x))
        + model.log_q_ratio(x, y)
        + (lw_yx - float(lw_xy[I]))
        + (lse_x - lse_y),
    )
    accepted = _accept(streams, log_alpha)
    rec = StepRecord(
        previous=x,
        proposed=y,
        selected=I,
        log_accept=log_alpha,
        accepted=accepted,
        n_weight_evals=2 * n - 1,
    )
    return (y if accepted else x), rec


def _log_qw_tilde_estimate(model, n: int, M: int, base, pinned_lw: float, gen) -> float:
    """M-sample estimate of log (q~w)_n(base-side) with one pinned weight.

    Estimates E[(qhat w_n)^-1]^-1 with fresh (n-1)-tuples per inner
    replicate; exact when n = 1.
    """
    if n == 1:
        return pinned_lw
    draws = model.sample_proposals(gen, base, M * (n - 1))
    lw = np.asarray(model.log_w_batch(base, draws), dtype=float).reshape(M, n - 1)
    full = np.concatenate([np.full((M, 1), pinned_lw), lw], axis=1)
    log_qhat = logsumexp(full, axis=1) - np.log(n)
    return float(np.log(M) - logsumexp(-log_qhat))


def step_semi_ideal(spec, x, streams: StepStreams, model=None) -> tuple[np.ndarray, StepRecord]:
    """Semi-ideal chain: resampled proposal, estimated normalizer ratio.

    The acceptance uses inverse-of-mean-inverse estimates of
    ``(q~w)_n(x, y)`` and ``(q~w)_n(y, x)`` from ``inner_samples`` fresh
    tuples, so the chain is an approximate diagnostic device, exact only
    as the inner sample count grows (and exactly MH at n = 1). Finite
    embeddings can request exact enumeration instead.
    """
    model = model or model_for(spec)
    x = np.asarray(x, dtype=float)
    n = spec.n_tries
    M = spec.inner_samples
    I, y, ys, lw_xy = resample_proposal(spec, x, streams, model=model)
    lw_sel = float(lw_xy[I])
    lw_yx = model.log_w_reverse(x, y, lw_sel)

    exact = getattr(spec, "semi_ideal_exact", False)
    if exact:
        if not model.supports_exact_semi_ideal:
            raise ValueError("exact semi-ideal normalizers need a finite embedding")
        log_fwd = model.log_qw_tilde_exact(x, y)
        log_rev = model.log_qw_tilde_exact(y, x)
        inner_evals = 0
    else:
        gen = streams.gen(Slot.INNER)
        log_fwd = _log_qw_tilde_estimate(model, n, M, x, lw_sel, gen)
        log_rev = _log_qw_tilde_estimate(model, n, M, y, lw_yx, gen)
        inner_evals = 2 * M * (n - 1)

    log_alpha = min(
        0.0,
        (model.logpi(y) - model.logpi(x))
        + model.log_q_ratio(x, y)
        + (lw_yx - lw_sel)
        + (log_fwd - log_rev),
    )
    accepted = _accept(streams, log_alpha)
    rec = StepRecord(
        previous=x,
        proposed=y,
        selected=I,
        log_accept=log_alpha,
        accepted=accepted,
        n_weight_evals=n + inner_evals,
    )
    return (y if accepted else x), rec


def step_lazy(spec, x, streams: StepStreams, model=None) -> tuple[np.ndarray, StepRecord]:
    """Lazy multiple-try chain: hold with probability exactly 1/2."""
    model = model or model_for(spec)
    x = np.asarray(x, dtype=float)
    if streams.gen(Slot.LAZY).random() < 0.5:
        rec = StepRecord(
            previous=x,
            proposed=None,
            selected=-1,
            log_accept=-np.inf,
            accepted=False,
            n_weight_evals=0,
            lazy_hold=True,
        )
        return x, rec
    return step_mtm(spec, x, streams, model=model)


_STEP_FUNCS = {
    MH: step_mh,
    IDEAL: step_ideal,
    SEMI_IDEAL: step_semi_ideal,
    MTM: step_mtm,
    LAZY_MTM: step_lazy,
}


def step_fn(kind: str):
    return _STEP_FUNCS[kind]
