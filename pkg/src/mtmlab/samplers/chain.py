"""Full-chain simulation with backend dispatch.

The generic path iterates the step functions. For Gaussian targets the
numba backend runs chunked jit kernels instead; both paths consume the
identical per-step substreams (keyed by chain id, step index, and draw
slot), so a trace is a pure function of ``(spec, x0, steps, burnin,
seed, chain_id)`` no matter which backend or how many workers run it.
"""

from __future__ import annotations

import numpy as np

from ..backend import NUMBA, resolve_backend
from ..errors import MtmLabError
from ..rng import Slot, Substream
from .steps import StepStreams, model_for, step_fn
from .types import IDEAL, LAZY_MTM, MH, MTM, ChainTrace, KernelSpec

_CHUNK_BUDGET = 8_000_000  # pregenerated doubles per chunk, ~64 MB


def _numba_eligible(spec, backend: str) -> bool:
    if backend != NUMBA or not isinstance(spec, KernelSpec):
        return False
    if spec.kind not in (MH, IDEAL, MTM, LAZY_MTM):
        return False
    return spec.target.is_standard_gaussian


def run_chain(
    spec,
    x0,
    steps: int,
    burnin: int = 0,
    seed: int = 0,
    chain_id: int = 0,
    backend: str | None = None,
    keep_proposals: bool = False,
    threads: int = 1,
) -> ChainTrace:
    """Simulate ``burnin + steps`` transitions, recording the last ``steps``.

    ``threads`` is accepted for interface symmetry with the experiment
    runner; per-step draws are substream-keyed, so any worker layout
    produces bit-identical traces.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if burnin < 0:
        raise ValueError("burnin must be >= 0")
    del threads
    x0 = np.asarray(x0, dtype=float)
    backend = resolve_backend(backend)
    if _numba_eligible(spec, backend) and not keep_proposals:
        return _run_chain_numba(spec, x0, steps, burnin, seed, chain_id, keep_proposals)
    return _run_chain_generic(spec, x0, steps, burnin, seed, chain_id, backend, keep_proposals)


def _alloc(steps: int, d: int, keep_proposals: bool):
    return dict(
        states=np.empty((steps + 1, d)),
        accepted=np.zeros(steps, dtype=bool),
        log_accepts=np.zeros(steps),
        selected=np.full(steps, -1, dtype=np.int64),
        n_weight_evals=np.zeros(steps, dtype=np.int64),
        lazy_holds=np.zeros(steps, dtype=bool),
        clamped=np.zeros(steps, dtype=bool),
        proposed=np.full((steps, d), np.nan) if keep_proposals else None,
    )


def _run_chain_generic(spec, x0, steps, burnin, seed, chain_id, backend, keep_proposals):
    model = model_for(spec)
    fn = step_fn(spec.kind)
    sub = Substream(seed, chain_id)
    cols = _alloc(steps, x0.shape[0], keep_proposals)
    x = x0
    total_accepts = 0
    for k in range(burnin + steps):
        try:
            x_new, rec = fn(spec, x, StepStreams(sub, k), model=model)
        except MtmLabError as exc:
            raise type(exc)(f"step {k}: {exc}") from exc
        total_accepts += rec.accepted
        if k >= burnin:
            i = k - burnin
            if i == 0:
                cols["states"][0] = x
            cols["states"][i + 1] = x_new
            cols["accepted"][i] = rec.accepted
            cols["log_accepts"][i] = rec.log_accept
            cols["selected"][i] = rec.selected
            cols["n_weight_evals"][i] = rec.n_weight_evals
            cols["lazy_holds"][i] = rec.lazy_hold
            cols["clamped"][i] = rec.clamped
            if keep_proposals and rec.proposed is not None:
                cols["proposed"][i] = rec.proposed
        x = x_new
    return ChainTrace(
        seed=seed,
        chain_id=chain_id,
        burnin=burnin,
        total_steps=burnin + steps,
        total_accepts=int(total_accepts),
        backend=backend,
        **cols,
    )


def _run_chain_numba(spec, x0, steps, burnin, seed, chain_id, keep_proposals):
    from . import kernels_numba as K

    d = spec.target.d
    n = spec.n_tries
    sigma = spec.proposal.sigma
    theta = spec.weight.theta
    kind = spec.kind
    sub = Substream(seed, chain_id)
    total = burnin + steps
    cols = _alloc(steps, d, keep_proposals)
    x = x0.copy()
    total_accepts = 0

    per_step = (2 * n * d + n + 2) if kind in (MTM, LAZY_MTM) else (d + 1)
    chunk = max(1, min(total, _CHUNK_BUDGET // per_step))

    start = 0
    while start < total:
        count = min(chunk, total - start)
        if kind in (MH, IDEAL):
            noise = np.empty((count, d))
            acc_u = np.empty(count)
            for k in range(count):
                step = start + k
                noise[k] = sub.at(step, Slot.PROPOSAL).standard_normal(d)
                acc_u[k] = sub.at(step, Slot.ACCEPT).random()
            out_states = np.empty((count, d))
            out_la = np.empty(count)
            out_acc = np.zeros(count, dtype=np.bool_)
            if kind == MH:
                K.mh_chunk(x, noise, acc_u, sigma, out_states, out_la, out_acc)
            else:
                K.ideal_chunk(x, noise, acc_u, sigma, theta, out_states, out_la, out_acc)
            sel = np.full(count, -1, dtype=np.int64)
            evals = np.ones(count, dtype=np.int64)
            lazy = np.zeros(count, dtype=np.bool_)
        else:
            prop = np.empty((count, n, d))
            sel_u = np.empty((count, n))
            shadow = np.empty((count, n, d))
            acc_u = np.empty(count)
            lazy_u = np.empty(count) if kind == LAZY_MTM else np.empty(0)
            for k in range(count):
                step = start + k
                if kind == LAZY_MTM:
                    lazy_u[k] = sub.at(step, Slot.LAZY).random()
                prop[k] = sub.at(step, Slot.PROPOSAL).standard_normal((n, d))
                sel_u[k] = sub.at(step, Slot.SELECT).random(n)
                shadow[k] = sub.at(step, Slot.SHADOW).standard_normal((n, d))
                acc_u[k] = sub.at(step, Slot.ACCEPT).random()
            out_states = np.empty((count, d))
            out_la = np.empty(count)
            out_acc = np.zeros(count, dtype=np.bool_)
            sel = np.empty(count, dtype=np.int64)
            lazy = np.zeros(count, dtype=np.bool_)
            K.mtm_chunk(
                x, prop, sel_u, shadow, acc_u, lazy_u, sigma, theta,
                kind == LAZY_MTM, out_states, out_la, out_acc, sel, lazy,
            )
            evals = np.where(lazy, 0, 2 * n - 1).astype(np.int64)

        total_accepts += int(out_acc.sum())
        lo = max(start, burnin)
        hi = start + count
        if hi > burnin:
            i0 = lo - burnin
            i1 = hi - burnin
            if i0 == 0:
                cols["states"][0] = x if start >= burnin else out_states[burnin - start - 1]
            src = slice(lo - start, count)
            cols["states"][i0 + 1 : i1 + 1] = out_states[src]
            cols["accepted"][i0:i1] = out_acc[src]
            cols["log_accepts"][i0:i1] = out_la[src]
            cols["selected"][i0:i1] = sel[src]
            cols["n_weight_evals"][i0:i1] = evals[src]
            cols["lazy_holds"][i0:i1] = lazy[src]
        x = out_states[-1].copy()
        start += count

    # states[0] must be the post-burn-in starting point
    if burnin == 0:
        cols["states"][0] = x0
    return ChainTrace(
        seed=seed,
        chain_id=chain_id,
        burnin=burnin,
        total_steps=total,
        total_accepts=total_accepts,
        backend=NUMBA,
        **cols,
    )
