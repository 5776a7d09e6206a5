"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL
line (run with ``pytest tests/test_acceptance.py -v -s``). Criterion 13
lives with the figures package (figures/tests), which consumes the CSV
artifacts these tests produce under tests/_artifacts/.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from mtmlab import analytics as an
from mtmlab import cli
from mtmlab import diagnostics as dg
from mtmlab import oracle as orc
from mtmlab import reports
from mtmlab.model import RwProposal, WeightSpec, standard_gaussian
from mtmlab.rng import Substream
from mtmlab.samplers import IDEAL, KernelSpec

ARTIFACTS = Path(__file__).parent / "_artifacts"
ARTIFACTS.mkdir(exist_ok=True)


def report(criterion: int, ok: bool, detail: str):
    print(f"\n[criterion {criterion:2d}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {criterion}: {detail}"


def test_criterion_01_exact_collapse_at_n1():
    t0 = time.monotonic()
    gen = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        spec = orc.random_spec(gen, m=3, n=1)
        mh = orc.build_mh(spec).P
        worst = max(worst, np.abs(orc.build_mtm(spec).P - mh).max())
        worst = max(worst, np.abs(orc.build_semi_ideal(spec).P - mh).max())
    dt = time.monotonic() - t0
    ok = worst <= 1e-12 and dt < 10
    report(1, ok, f"max entrywise gap {worst:.2e} over 100 specs in {dt:.2f}s (<10s)")


def test_criterion_02_invariance_and_reversibility():
    t0 = time.monotonic()
    gen = np.random.default_rng(102)
    worst_inv = worst_rev = 0.0
    for k in range(300):
        m = int(gen.integers(2, 5))
        n = int(gen.integers(1, 5))
        spec = orc.random_spec(gen, m=m, n=n)
        for build in (orc.build_mh, orc.build_ideal, orc.build_semi_ideal, orc.build_mtm):
            P = build(spec)
            worst_inv = max(worst_inv, np.abs(spec.pi @ P.P - spec.pi).max())
            worst_rev = max(worst_rev, orc.reversibility_gap(P, spec.pi))
    dt = time.monotonic() - t0
    ok = worst_inv <= 1e-10 and worst_rev <= 1e-10 and dt < 60
    report(2, ok, f"invariance {worst_inv:.2e}, detailed balance {worst_rev:.2e}, "
                  f"300 specs in {dt:.1f}s (<60s)")


def _eigenfunctions(spec, mats):
    fs = []
    for P in mats:
        fs.append(orc.spectral_quantities(P, spec.pi).eigenfunctions.T)
    return np.vstack(fs)


def test_criterion_03_and_04_proposal_count_and_dominations():
    t0 = time.monotonic()
    gen = np.random.default_rng(103)
    worst_try_cmp = -np.inf
    worst_dom = -np.inf
    for _ in range(100):
        base = orc.random_spec(gen, m=3)
        for n in (2, 3, 4):
            spec = base.with_n(n)
            prev = base.with_n(n - 1)
            semi, semi_prev = orc.build_semi_ideal(spec), orc.build_semi_ideal(prev)
            mtm, mtm_prev = orc.build_mtm(spec), orc.build_mtm(prev)
            ideal = orc.build_ideal(spec)
            fs = _eigenfunctions(spec, [semi, semi_prev, mtm, mtm_prev])
            for f in fs:
                e_s = orc.dirichlet_form(semi, spec.pi, f)
                e_sp = orc.dirichlet_form(semi_prev, spec.pi, f)
                e_m = orc.dirichlet_form(mtm, spec.pi, f)
                e_mp = orc.dirichlet_form(mtm_prev, spec.pi, f)
                worst_try_cmp = max(worst_try_cmp, (n - 1) * e_s - n * e_sp)
                worst_try_cmp = max(worst_try_cmp, (n - 1) * e_m - n * e_mp)
            off = ~np.eye(3, dtype=bool)
            eta = orc.eta_ideal_semi(spec)
            zeta = orc.zeta_semi_mtm(spec)
            worst_dom = max(worst_dom, (eta * ideal.P - semi.P)[off].max())
            worst_dom = max(worst_dom, (zeta * semi.P - mtm.P)[off].max())
    dt = time.monotonic() - t0
    ok3 = worst_try_cmp <= 1e-9 and dt < 120
    report(3, ok3, f"worst (n-1)E_n - nE_(n-1) violation {worst_try_cmp:.2e} in {dt:.1f}s (<120s)")
    ok4 = worst_dom <= 1e-9
    report(4, ok4, f"worst off-diagonal domination violation {worst_dom:.2e}")


def test_criterion_05_beta1n_indicator_convergence():
    gen = np.random.default_rng(105)
    worst_dec = worst_inc = -np.inf
    for _ in range(25):
        spec = orc.random_spec(gen, m=3)
        at_2 = [orc.beta1n_exact(spec.with_n(n), 2.0) for n in (2, 4, 8)]
        at_half = [orc.beta1n_exact(spec.with_n(n), 0.5) for n in (2, 4, 8)]
        worst_dec = max(worst_dec, at_2[1] - at_2[0], at_2[2] - at_2[1])
        worst_inc = max(worst_inc, at_half[0] - at_half[1], at_half[1] - at_half[2])
    ok = worst_dec <= 1e-12 and worst_inc <= 1e-12
    report(5, ok, f"beta(2) decreasing (worst +{worst_dec:.2e}), "
                  f"beta(0.5) increasing (worst +{worst_inc:.2e}), n in {{2,4,8}}")


def test_criterion_06_moment_oracle_vs_formula():
    inp = an.MomentInputs(d=1, sigma2=1.0, p=1.0)
    quad = an.moment_oracle(inp, +1)
    ok_quad = abs(quad - 1.1619) <= 1e-3

    # plain Monte Carlo with 10^7 draws
    sub = Substream(106, 0)
    ests = []
    for b in range(20):
        g = sub.at(b)
        x = g.standard_normal(500_000)
        y = x + g.standard_normal(500_000)
        lv = x * x / 6.0 - y * y / 4.0 + 0.5 * math.log(1.5)
        ests.append(np.exp(2 * lv).mean())
    mc = float(np.mean(ests))
    se = float(np.std(ests, ddof=1) / math.sqrt(len(ests)))
    ok_mc = abs(mc - quad) <= 4 * se

    rep = an.moment_report(inp, +1)
    ok_flag = (not rep.agrees) and abs(rep.formula_value - 0.94868) < 1e-5

    thr_gap = abs(an.sigma2_threshold(1.0) - an.sigma2_threshold_bisect(1.0))
    ok_thr = thr_gap <= 1e-10
    ok = ok_quad and ok_mc and ok_flag and ok_thr
    report(6, ok, f"quadrature {quad:.5f} (=1.1619 +- 1e-3), MC {mc:.5f} +- {se:.5f} (4 SE), "
                  f"displayed 0.94868 flagged discrepant, threshold gap {thr_gap:.1e} (<=1e-10)")


def test_criterion_07_acceptance_lower_bound():
    worst_margin = np.inf
    for d in (2, 8):
        sigma = d**-0.25
        sigma2 = sigma * sigma
        spec = KernelSpec(
            kind=IDEAL, target=standard_gaussian(d),
            proposal=RwProposal(sigma=sigma, d=d), weight=WeightSpec.locally_balanced(),
        )
        floor = an.alpha_inf_lower(sigma2, d)
        reps = dg.acceptance_profile(spec, [0.0, 2.0, 4.0], 100_000, seed=107, stream_id=d)
        for rep in reps:
            worst_margin = min(worst_margin, rep.estimate - (floor - 4 * rep.se))
    ok = worst_margin >= 0
    report(7, ok, f"min margin over (d, radius) grid: {worst_margin:+.4f} "
                  f"(alpha(x) >= floor - 4 SE everywhere)")


def test_criterion_08_gap_upper_bound_via_dirichlet():
    worst_margin = np.inf
    for d, sigma in ((2, 1.0), (8, 0.5)):
        spec = KernelSpec(
            kind=IDEAL, target=standard_gaussian(d),
            proposal=RwProposal(sigma=sigma, d=d), weight=WeightSpec.locally_balanced(),
        )
        rep = dg.dirichlet_ratio_linear(spec, np.eye(d)[0], 100_000, seed=108, stream_id=d)
        bound = 1.5 * sigma**2 / (2 + sigma**2)
        worst_margin = min(worst_margin, bound + 4 * rep.se - rep.estimate)
    ok = worst_margin >= 0
    report(8, ok, f"min slack of (3/2) s2/(2+s2) + 4 SE over grid: {worst_margin:+.4f}")


def test_criterion_09_scaling_slopes():
    t0 = time.monotonic()
    cfg = dict(cli.DEFAULTS["scaling"])
    cfg["seed"] = 109
    rows = cli.run_scaling(cfg, threads=1)
    reports.emit(rows, ARTIFACTS / "scaling.csv", "csv")
    slopes = {
        (r.kernel): r.estimate
        for r in rows
        if r.estimator == "loglog-slope:lag-autocorrelation"
    }
    dt = time.monotonic() - t0
    ok = abs(slopes["ideal"] + 0.5) <= 0.15 and abs(slopes["mh"] + 1.0) <= 0.2 and dt < 1800
    report(9, ok, f"ideal slope {slopes['ideal']:.3f} (-0.5 +- 0.15), "
                  f"mh slope {slopes['mh']:.3f} (-1.0 +- 0.2), {dt:.0f}s (<30min)")


def test_criterion_10_globally_balanced_decay():
    t0 = time.monotonic()
    cfg = dict(cli.DEFAULTS["gb-decay"])
    cfg["seed"] = 110
    rows = cli.run_gb_decay(cfg, threads=1)
    reports.emit(rows, ARTIFACTS / "gb_decay.csv", "csv")
    ok = True
    msgs = []
    for est in ("conductance-halfspace", "acceptance-rate"):
        series = sorted(
            [r for r in rows if r.estimator == est], key=lambda r: r.n
        )
        for a, b in zip(series, series[1:]):
            gap = a.estimate - b.estimate
            sig = gap / math.hypot(a.se, b.se)
            if not (gap > 0 and sig > 4):
                ok = False
            msgs.append(f"{est} n={a.n}->{b.n}: gap {gap:+.4f} ({sig:.1f} SE)")
    dt = time.monotonic() - t0
    ok = ok and dt < 900
    report(10, ok, f"strict 4-SE decay across n; {'; '.join(msgs)}; {dt:.0f}s (<15min)")


def test_criterion_11_analytics_arithmetic():
    _, gam = an.gap_lower_bound(1.0, 16)
    ok_a = abs(gam - 4.32e-5) <= 1e-7
    ok_b = an.gap_upper_bound(1.0, 1) == 0.5
    curve = an.WpiCurve(1.0, 1.0, 1.0)
    ok_c = curve.alpha == pytest.approx(1 / 3, abs=1e-15) and curve.c == 2.25
    ks = np.array([100, 1000, 10_000, 100_000, 1_000_000])
    vals = np.array([an.mtm_convergence_bound(4, 0.2, 1.0, int(k), d=2) for k in ks])
    slope = np.polyfit(np.log(ks), np.log(vals), 1)[0]
    ok_d = abs(slope + 1.0 / 6.0) <= 1e-6
    ok = ok_a and ok_b and ok_c and ok_d
    report(11, ok, f"gamma lower {gam:.4e} (4.32e-5 +- 1e-7); upper(1,1)=0.5; "
                   f"chaining (1/3, 2.25); envelope slope {slope:.8f} (+-1e-6 of -1/6)")


def test_criterion_12_cli_thread_determinism(tmp_path):
    outs = []
    grids = [
        ("moments", "{}"),
        ("scaling", '{"ds": [4, 16], "steps": 12000}'),
        ("gb-decay", '{"ns": [1, 10], "samples": 12000}'),
        ("oracle", '{"n_specs": 6, "n_tries": [2], "n_random_f": 10}'),
    ]
    identical = True
    for name, cfg_text in grids:
        cfg = tmp_path / f"{name}.json"
        cfg.write_text(cfg_text)
        a = tmp_path / f"{name}-t1.csv"
        b = tmp_path / f"{name}-t4.csv"
        rc1 = cli.main([name, "--seed", "112", "--config", str(cfg), "--out", str(a), "--threads", "1"])
        rc2 = cli.main([name, "--seed", "112", "--config", str(cfg), "--out", str(b), "--threads", "4"])
        same = rc1 == rc2 == 0 and a.read_bytes() == b.read_bytes()
        identical = identical and same
        outs.append(f"{name}: {'identical' if same else 'DIFFER'}")
    report(12, identical, "; ".join(outs))


def test_prepare_secondary_artifacts():
    """Not a criterion: materializes the moments/beta-curve CSVs that the
    figure package's acceptance (criterion 13) consumes."""
    rows = cli.run_moments({"seed": 113, "d": 1, "sigma2": 1.0, "p": 1.0}, threads=1)
    reports.emit(rows, ARTIFACTS / "moments.csv", "csv")
    cfg = dict(cli.DEFAULTS["oracle"])
    cfg.update({"seed": 113, "n_specs": 6, "beta_specs": 12, "beta_out": str(ARTIFACTS / "beta.csv")})
    _, beta_rows, violations = cli.run_oracle(cfg, threads=1, out_path=str(ARTIFACTS / "oracle.jsonl"))
    reports.emit(beta_rows, ARTIFACTS / "beta.csv", "csv")
    assert not violations
    assert (ARTIFACTS / "moments.csv").exists() and (ARTIFACTS / "beta.csv").exists()
