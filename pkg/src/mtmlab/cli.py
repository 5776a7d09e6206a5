"""Config-driven experiment runner.

Subcommands: sample, moments, bounds, oracle, scaling, gb-decay,
mtm-vs-ideal. Each loads defaults, merges an optional JSON config and
flag overrides, validates (including enumeration budgets) before any
computation, executes its grid on a worker pool, and emits rows in the
fixed schema. Every cell draws through substreams keyed by (seed, cell
index), so outputs are byte-identical for a given seed regardless of
--threads.

Exit codes: 0 ok, 2 config error, 3 budget error, 4 inequality violation
in `oracle`.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analytics as an
from . import diagnostics as dg
from . import oracle as orc
from . import reports
from .errors import ConfigError, EnumerationBudgetError, InvalidSetError, MtmLabError
from .model import RwProposal, WeightSpec, standard_gaussian
from .rng import Slot, Substream
from .samplers import IDEAL, KINDS, MH, MTM, KernelSpec, run_chain

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_VIOLATION = 4

DEFAULTS: dict[str, dict] = {
    "sample": {
        "kind": MH,
        "d": 1,
        "sigma": 2.38,
        "theta": 0.5,
        "n_tries": 1,
        "inner_samples": 1,
        "steps": 100_000,
        "burnin": 0,
        "chains": 2,
    },
    "moments": {"d": 1, "sigma2": 1.0, "p": 1.0},
    "bounds": {
        "zeta": 1.0,
        "d": 16,
        "p": 1.0,
        "n_tries": 4,
        "k_values": [10, 100, 1000],
        "envelope_x2": 6.0,
    },
    "oracle": {
        "n_specs": 300,
        "m": 3,
        "n_tries": [2, 3, 4],
        "tol": 1e-9,
        "n_random_f": 100,
        "spec_paths": [],
        "beta_out": None,
        "beta_n_values": [2, 4, 8],
        "beta_s_values": [0.1, 0.2, 0.5, 0.8, 1.25, 2.0, 5.0, 10.0],
        "beta_specs": 20,
    },
    "scaling": {
        "ds": [4, 16, 64, 256],
        "zeta": 1.0,
        "mh_scale": 2.38,
        "steps": 100_000,
    },
    "gb-decay": {
        "d": 5,
        "sigma": 0.5,
        "ns": [1, 10, 100, 1000],
        "samples": 250_000,
        "tail_mass": 0.02,
    },
    "mtm-vs-ideal": {
        "d": 4,
        "zeta": 1.0,
        "ns": [1, 2, 4, 8, 16],
        "steps": 50_000,
    },
}


def _positive_int(cfg, key):
    v = cfg[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ConfigError(key, f"must be a positive integer, got {v!r}")


def _positive_real(cfg, key):
    v = cfg[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
        raise ConfigError(key, f"must be a positive number, got {v!r}")


def validate_config(experiment: str, cfg: dict) -> None:
    if cfg.get("seed") is None:
        raise ConfigError("seed", "a seed is mandatory (flag --seed or config)")
    if not isinstance(cfg["seed"], int) or cfg["seed"] < 0:
        raise ConfigError("seed", f"must be a nonnegative integer, got {cfg['seed']!r}")
    known = set(DEFAULTS[experiment]) | {"seed", "out", "format", "threads"}
    for key in cfg:
        if key not in known:
            raise ConfigError(key, f"unknown field for experiment {experiment!r}")
    if experiment == "sample":
        if cfg["kind"] not in KINDS:
            raise ConfigError("kind", f"must be one of {KINDS}")
        for key in ("d", "n_tries", "inner_samples", "steps", "chains"):
            _positive_int(cfg, key)
        _positive_real(cfg, "sigma")
        if cfg["burnin"] < 0:
            raise ConfigError("burnin", "must be nonnegative")
    elif experiment == "moments":
        _positive_int(cfg, "d")
        _positive_real(cfg, "sigma2")
        if cfg["p"] < 1:
            raise ConfigError("p", "must be >= 1")
    elif experiment == "bounds":
        _positive_int(cfg, "d")
        _positive_real(cfg, "zeta")
        if cfg["p"] < 1:
            raise ConfigError("p", "must be >= 1")
        _positive_int(cfg, "n_tries")
    elif experiment == "oracle":
        for key in ("n_specs", "m", "n_random_f"):
            _positive_int(cfg, key)
        ns = cfg["n_tries"]
        if not ns or any(not isinstance(n, int) or n < 1 for n in ns):
            raise ConfigError("n_tries", "must be a nonempty list of positive integers")
        cost = orc.enumeration_cost_mtm(cfg["m"], max(ns))
        if cost > orc.MTM_BUDGET:
            raise EnumerationBudgetError(
                f"oracle grid needs {cost:.3g} tuples (m={cfg['m']}, n={max(ns)}), "
                f"budget {orc.MTM_BUDGET}"
            )
        n_beta = max(cfg["beta_n_values"], default=1)
        beta_cost = orc.enumeration_cost_semi_ideal(cfg["m"], n_beta)
        if beta_cost > orc.SEMI_IDEAL_BUDGET:
            raise EnumerationBudgetError(
                f"beta curves need {beta_cost:.3g} tuples (m={cfg['m']}, n={n_beta}), "
                f"budget {orc.SEMI_IDEAL_BUDGET}"
            )
    elif experiment == "scaling":
        if not cfg["ds"]:
            raise ConfigError("ds", "needs at least one dimension")
        _positive_real(cfg, "zeta")
        _positive_int(cfg, "steps")
    elif experiment == "gb-decay":
        _positive_int(cfg, "d")
        _positive_real(cfg, "sigma")
        _positive_int(cfg, "samples")
        if not cfg["ns"]:
            raise ConfigError("ns", "needs at least one try count")
        if not 0 < cfg["tail_mass"] <= 0.5:
            raise ConfigError("tail_mass", "must lie in (0, 0.5]")
    elif experiment == "mtm-vs-ideal":
        _positive_int(cfg, "d")
        _positive_real(cfg, "zeta")
        _positive_int(cfg, "steps")
        if not cfg["ns"]:
            raise ConfigError("ns", "needs at least one try count")


def _pool_map(fn, cells, threads: int):
    if threads <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, cells))


def _row(experiment, kernel, d, sigma, theta, n, estimator, estimate, se, n_samples, seed):
    return reports.ResultRow(
        experiment=experiment,
        kernel=kernel,
        d=int(d),
        sigma=float(sigma),
        theta=float(theta),
        n=int(n),
        estimator=estimator,
        estimate=float(estimate),
        se=float(se),
        n_samples=int(n_samples),
        seed=int(seed),
    )


def _loglog_slope(xs, ys) -> tuple[float, float]:
    """Least-squares slope of log(y) on log(x) plus its standard error."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    dof = max(len(lx) - 2, 1)
    resid = ly - A @ coef
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    return float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0)))


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def run_sample(cfg, threads):
    seed = cfg["seed"]
    d = cfg["d"]
    spec = KernelSpec(
        kind=cfg["kind"],
        target=standard_gaussian(d),
        proposal=RwProposal(sigma=float(cfg["sigma"]), d=d),
        weight=WeightSpec(float(cfg["theta"])),
        n_tries=cfg["n_tries"],
        inner_samples=cfg["inner_samples"],
    )

    def cell(chain_id: int):
        gen = Substream(seed, 1_000_000 + chain_id).at(0, Slot.START)
        x0 = spec.target.sample_pi(gen)
        trace = run_chain(
            spec, x0, steps=cfg["steps"], burnin=cfg["burnin"], seed=seed, chain_id=chain_id
        )
        msr = float(np.mean(np.einsum("ki,ki->k", trace.states, trace.states)) / d)
        rows = [
            _row("sample", spec.kind, d, cfg["sigma"], cfg["theta"], spec.n_tries,
                 "acceptance-rate", trace.acceptance_rate, 0.0, trace.total_steps, seed),
            _row("sample", spec.kind, d, cfg["sigma"], cfg["theta"], spec.n_tries,
                 "mean-square-radius", msr, 0.0, cfg["steps"], seed),
        ]
        if cfg["steps"] >= 10_000:
            prox = dg.autocorr_gap_proxy(trace)
            rows.append(
                _row("sample", spec.kind, d, cfg["sigma"], cfg["theta"], spec.n_tries,
                     "lag-autocorrelation", prox.estimate, prox.se, prox.n_samples, seed)
            )
        return rows

    return [r for rows in _pool_map(cell, range(cfg["chains"]), threads) for r in rows]


def run_moments(cfg, threads):
    del threads
    seed = cfg["seed"]
    inp = an.MomentInputs(d=cfg["d"], sigma2=float(cfg["sigma2"]), p=float(cfg["p"]))
    sigma = math.sqrt(inp.sigma2)
    rows = []
    for sign, tag in ((+1, "moment-plus-2p"), (-1, "moment-minus-2p")):
        rep = an.moment_report(inp, sign)
        disc = rep.relative_discrepancy
        rows += [
            _row("moments", "analytic", inp.d, sigma, 0.5, 1, f"{tag}:oracle",
                 rep.oracle_value, 0.0, 0, seed),
            _row("moments", "analytic", inp.d, sigma, 0.5, 1, f"{tag}:formula",
                 rep.formula_value, 0.0, 0, seed),
            _row("moments", "analytic", inp.d, sigma, 0.5, 1, f"{tag}:discrepancy",
                 disc if disc is not None else float("nan"), 0.0, 0, seed),
            _row("moments", "analytic", inp.d, sigma, 0.5, 1, f"{tag}:agrees",
                 1.0 if rep.agrees else 0.0, 0.0, 0, seed),
        ]
    thr = an.sigma2_threshold(inp.p)
    thr_bis = an.sigma2_threshold_bisect(inp.p)
    rows += [
        _row("moments", "analytic", inp.d, sigma, 0.5, 1, "sigma2-threshold:closed-form",
             thr, 0.0, 0, seed),
        _row("moments", "analytic", inp.d, sigma, 0.5, 1, "sigma2-threshold:bisection",
             thr_bis, 0.0, 0, seed),
    ]
    return rows


def run_bounds(cfg, threads):
    del threads
    seed = cfg["seed"]
    zeta, d, p = float(cfg["zeta"]), cfg["d"], float(cfg["p"])
    sigma2 = zeta * zeta / math.sqrt(d)
    sigma = math.sqrt(sigma2)
    phi_lb, gam_lb = an.gap_lower_bound(zeta, d)
    rows = [
        _row("bounds", "ideal", d, sigma, 0.5, 1, "gap-lower-phi", phi_lb, 0.0, 0, seed),
        _row("bounds", "ideal", d, sigma, 0.5, 1, "gap-lower-gamma", gam_lb, 0.0, 0, seed),
        _row("bounds", "ideal", d, sigma, 0.5, 1, "gap-upper",
             an.gap_upper_bound(sigma2, d), 0.0, 0, seed),
        _row("bounds", "ideal", d, sigma, 0.5, 1, "alpha-inf-lower",
             an.alpha_inf_lower(sigma2, d), 0.0, 0, seed),
        _row("bounds", "ideal", d, sigma, 0.5, 1, "alpha-inf-lower-zeta",
             an.alpha_inf_lower_zeta(zeta), 0.0, 0, seed),
        _row("bounds", "ideal", d, sigma, 1.0, 1, "gb-envelope",
             an.gb_acceptance_envelope(math.sqrt(cfg["envelope_x2"]), sigma2, d),
             0.0, 0, seed),
        _row("bounds", "analytic", d, sigma, 0.5, 1, "chaining-alpha",
             an.WpiCurve(1.0, 1.0, p).alpha, 0.0, 0, seed),
        _row("bounds", "analytic", d, sigma, 0.5, 1, "chaining-c",
             an.WpiCurve(1.0, 1.0, p).c, 0.0, 0, seed),
    ]
    if sigma2 < an.sigma2_threshold(p):
        moments = an.oracle_moments(d, sigma2, p)
        for k in cfg["k_values"]:
            rows.append(
                _row("bounds", "lazy-mtm", d, sigma, 0.5, cfg["n_tries"],
                     f"mtm-envelope@k={k}",
                     an.mtm_convergence_bound(cfg["n_tries"], sigma2, p, int(k), d=d,
                                              moments=moments),
                     0.0, 0, seed)
            )
    return rows


def run_oracle(cfg, threads, out_path):
    seed = cfg["seed"]
    gen = np.random.default_rng(seed)
    specs: list[orc.FiniteChainSpec] = [orc.load_spec(p) for p in cfg["spec_paths"]]
    if not specs:
        base = [orc.random_spec(gen, m=cfg["m"]) for _ in range(cfg["n_specs"])]
        specs = [s.with_n(n) for s in base for n in cfg["n_tries"]]

    results = []
    checks = _pool_map(
        lambda t: orc.verify_inequalities(
            t[1], tol=cfg["tol"], n_random_f=cfg["n_random_f"], f_seed=seed + t[0]
        ),
        list(enumerate(specs)),
        threads,
    )
    for res in checks:
        results.extend(res)
    with open(out_path, "w", newline="") as fh:
        for res in results:
            fh.write(res.to_json() + "\n")

    beta_rows = []
    if cfg["beta_out"]:
        beta_gen = np.random.default_rng(seed + 777)
        beta_specs = [orc.random_spec(beta_gen, m=cfg["m"]) for _ in range(cfg["beta_specs"])]
        for n in cfg["beta_n_values"]:
            for s in cfg["beta_s_values"]:
                vals = [orc.beta1n_exact(sp.with_n(n), s) for sp in beta_specs]
                beta_rows.append(
                    _row("oracle", "semi-ideal", cfg["m"], float(s), 0.0, n, "beta1n",
                         float(np.mean(vals)),
                         float(np.std(vals, ddof=1) / math.sqrt(len(vals))),
                         len(vals), seed)
                )
    violations = [r for r in results if not r.passed]
    return results, beta_rows, violations


def run_scaling(cfg, threads):
    seed = cfg["seed"]
    steps = cfg["steps"]
    cells = []
    for kernel in (IDEAL, MH):
        for d in cfg["ds"]:
            cells.append((kernel, int(d)))

    def cell(args):
        idx = cells.index(args)
        kernel, d = args
        if kernel == IDEAL:
            sigma = float(cfg["zeta"]) * d ** (-0.25)
        else:
            sigma = float(cfg["mh_scale"]) / math.sqrt(d)
        spec = KernelSpec(
            kind=kernel,
            target=standard_gaussian(d),
            proposal=RwProposal(sigma=sigma, d=d),
            weight=WeightSpec.locally_balanced(),
        )
        gen = Substream(seed, 10_000 + idx).at(0, Slot.START)
        x0 = spec.target.sample_pi(gen)
        trace = run_chain(spec, x0, steps=steps, seed=seed, chain_id=idx)
        prox = dg.autocorr_gap_proxy(trace)
        diri = dg.dirichlet_ratio_linear(
            spec, np.eye(d)[0], n_samples=steps, seed=seed, stream_id=20_000 + idx
        )
        return [
            _row("scaling", kernel, d, sigma, 0.5, 1, "lag-autocorrelation",
                 prox.estimate, prox.se, prox.n_samples, seed),
            _row("scaling", kernel, d, sigma, 0.5, 1, "dirichlet-linear",
                 diri.estimate, diri.se, diri.n_samples, seed),
        ]

    rows = [r for rows in _pool_map(cell, cells, threads) for r in rows]
    for kernel in (IDEAL, MH):
        for est in ("lag-autocorrelation", "dirichlet-linear"):
            sub = [r for r in rows if r.kernel == kernel and r.estimator == est]
            if len(sub) >= 2:
                slope, se = _loglog_slope([r.d for r in sub], [r.estimate for r in sub])
                rows.append(
                    _row("scaling", kernel, 0, 0.0, 0.5, 1, f"loglog-slope:{est}",
                         slope, se, len(sub), seed)
                )
    return rows


def run_gb_decay(cfg, threads):
    seed = cfg["seed"]
    d = cfg["d"]
    sigma = float(cfg["sigma"])
    R = dg.halfspace_radius(d, float(cfg["tail_mass"]))

    def cell(idx_n):
        idx, n = idx_n
        spec = KernelSpec(
            kind=MTM,
            target=standard_gaussian(d),
            proposal=RwProposal(sigma=sigma, d=d),
            weight=WeightSpec.globally_balanced(),
            n_tries=int(n),
        )
        cond = dg.conductance_halfspace(
            spec, R, n_samples=cfg["samples"], seed=seed, stream_id=100 + 4 * idx
        )
        acc = dg.acceptance_profile(
            spec, [R], n_samples=cfg["samples"], seed=seed, stream_id=101 + 4 * idx
        )[0]
        return [
            _row("gb-decay", MTM, d, sigma, 1.0, n, "conductance-halfspace",
                 cond.estimate, cond.se, cond.n_samples, seed),
            _row("gb-decay", MTM, d, sigma, 1.0, n, "acceptance-rate",
                 acc.estimate, acc.se, acc.n_samples, seed),
        ]

    return [r for rows in _pool_map(cell, list(enumerate(cfg["ns"])), threads) for r in rows]


def run_mtm_vs_ideal(cfg, threads):
    seed = cfg["seed"]
    d = cfg["d"]
    sigma = float(cfg["zeta"]) * d ** (-0.25)
    steps = cfg["steps"]

    def make_spec(kind, n):
        return KernelSpec(
            kind=kind,
            target=standard_gaussian(d),
            proposal=RwProposal(sigma=sigma, d=d),
            weight=WeightSpec.locally_balanced(),
            n_tries=n,
        )

    def cell(idx_n):
        idx, n = idx_n
        spec = make_spec(MTM, int(n))
        gen = Substream(seed, 30_000).at(0, Slot.START)
        x0 = spec.target.sample_pi(gen)
        trace = run_chain(spec, x0, steps=steps, seed=seed, chain_id=idx)
        prox = dg.autocorr_gap_proxy(trace)
        return _row("mtm-vs-ideal", MTM, d, sigma, 0.5, n, "lag-autocorrelation",
                    prox.estimate, prox.se, prox.n_samples, seed)

    rows = _pool_map(cell, list(enumerate(cfg["ns"])), threads)
    ideal_spec = make_spec(IDEAL, 1)
    gen = Substream(seed, 30_000).at(0, Slot.START)
    x0 = ideal_spec.target.sample_pi(gen)
    trace = run_chain(ideal_spec, x0, steps=steps, seed=seed, chain_id=len(rows))
    prox = dg.autocorr_gap_proxy(trace)
    rows.append(
        _row("mtm-vs-ideal", IDEAL, d, sigma, 0.5, 1, "lag-autocorrelation",
             prox.estimate, prox.se, prox.n_samples, seed)
    )
    return rows


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mtmlab", description=__doc__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in DEFAULTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", type=str, choices=list(reports.FORMATS), default="csv")
        p.add_argument("--threads", type=int, default=1)
    return parser


def load_config(experiment: str, args) -> dict:
    cfg = dict(DEFAULTS[experiment])
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read config: {exc}")
        if not isinstance(doc, dict):
            raise ConfigError("config", "config document must be a JSON object")
        cfg.update(doc)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.threads is not None and args.threads < 1:
        raise ConfigError("threads", "must be >= 1")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    name = args.experiment
    try:
        cfg = load_config(name, args)
        validate_config(name, cfg)
        out = args.out or cfg.get("out") or f"{name}.{args.format}"
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationBudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET

    try:
        if name == "oracle":
            _, beta_rows, violations = run_oracle(cfg, args.threads, out)
            if cfg["beta_out"]:
                reports.emit(beta_rows, cfg["beta_out"], args.format)
            print(f"oracle: {len(violations)} violations -> {out}")
            return EXIT_VIOLATION if violations else EXIT_OK
        runner = {
            "sample": run_sample,
            "moments": run_moments,
            "bounds": run_bounds,
            "scaling": run_scaling,
            "gb-decay": run_gb_decay,
            "mtm-vs-ideal": run_mtm_vs_ideal,
        }[name]
        rows = runner(cfg, args.threads)
        reports.emit(rows, out, args.format)
        print(f"{name}: {len(rows)} rows -> {out}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EnumerationBudgetError,) as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvalidSetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MtmLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
