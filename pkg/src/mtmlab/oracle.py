"""Exact finite-state oracle: transition matrices, Dirichlet forms,
spectra, conductance, and the comparison-inequality verifier.

Everything here is brute force on purpose. Transition matrices for the
resampled kernels are computed by exact enumeration over proposal/shadow
tuples (grouped by multinomial counts, which is an algebraic identity,
not an approximation), so these matrices serve as ground truth for the
continuous samplers and for every comparison inequality.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np
import scipy.linalg

from .backend import NUMBA, resolve_backend
from .errors import EnumerationBudgetError

ROW_SUM_TOL = 1e-12
REVERSIBILITY_TOL = 1e-10
SEMI_IDEAL_BUDGET = 1_000_000  # m^(n-1)
MTM_BUDGET = 1_000_000  # m^(2(n-1))
CONDUCTANCE_MAX_STATES = 24


@dataclass(frozen=True)
class FiniteChainSpec:
    """A finite chain instance: target pi, proposal q, weights w, tries n."""

    pi: np.ndarray
    q: np.ndarray
    w: np.ndarray
    n: int

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        q = np.asarray(self.q, dtype=float)
        w = np.asarray(self.w, dtype=float)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "w", w)
        m = pi.shape[0]
        if q.shape != (m, m) or w.shape != (m, m):
            raise ValueError("q and w must be m-by-m matrices matching pi")
        if not (np.isfinite(pi).all() and np.isfinite(q).all() and np.isfinite(w).all()):
            raise ValueError("spec entries must be finite")
        if not ((pi > 0).all() and (q > 0).all() and (w > 0).all()):
            raise ValueError("spec entries must be strictly positive")
        if abs(pi.sum() - 1.0) > ROW_SUM_TOL:
            raise ValueError("pi must sum to 1")
        if np.abs(q.sum(axis=1) - 1.0).max() > ROW_SUM_TOL:
            raise ValueError("q rows must sum to 1")
        if self.n < 1:
            raise ValueError("n must be a positive integer")

    @property
    def m(self) -> int:
        return self.pi.shape[0]

    def with_n(self, n: int) -> "FiniteChainSpec":
        return replace(self, n=n)

    def spec_hash(self) -> str:
        payload = json.dumps(
            {
                "pi": [f"{v:.17g}" for v in self.pi],
                "q": [[f"{v:.17g}" for v in row] for row in self.q],
                "w": [[f"{v:.17g}" for v in row] for row in self.w],
                "n": self.n,
            },
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def load_spec(path) -> FiniteChainSpec:
    with open(path) as fh:
        doc = json.load(fh)
    return FiniteChainSpec(
        pi=np.asarray(doc["pi"], dtype=float),
        q=np.asarray(doc["q"], dtype=float),
        w=np.asarray(doc["w"], dtype=float),
        n=int(doc["n"]),
    )


def save_spec(spec: FiniteChainSpec, path) -> None:
    doc = {
        "pi": list(map(float, spec.pi)),
        "q": [list(map(float, row)) for row in spec.q],
        "w": [list(map(float, row)) for row in spec.w],
        "n": spec.n,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def random_spec(gen: np.random.Generator, m: int = 3, n: int = 2) -> FiniteChainSpec:
    """pi, q rows ~ Dirichlet(1); w entrywise log-uniform on [-2, 2]."""
    pi = gen.dirichlet(np.ones(m))
    q = np.vstack([gen.dirichlet(np.ones(m)) for _ in range(m)])
    w = np.exp(gen.uniform(-2.0, 2.0, size=(m, m)))
    return FiniteChainSpec(pi=pi, q=q, w=w, n=n)


@dataclass(frozen=True)
class TransitionMatrix:
    P: np.ndarray
    kind: str

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        object.__setattr__(self, "P", P)
        if (P < -1e-14).any():
            raise ValueError("transition matrix has negative entries")
        if np.abs(P.sum(axis=1) - 1.0).max() > 1e-10:
            raise ValueError("transition matrix rows must sum to 1")


def _finish(off_diag: np.ndarray, kind: str) -> TransitionMatrix:
    P = off_diag.copy()
    np.fill_diagonal(P, 0.0)
    np.fill_diagonal(P, np.clip(1.0 - P.sum(axis=1), 0.0, 1.0))
    return TransitionMatrix(P=P, kind=kind)


def qw_normalizers(spec: FiniteChainSpec) -> np.ndarray:
    """(qw)(x) = sum_y q(x,y) w(x,y), exactly."""
    return (spec.q * spec.w).sum(axis=1)


def mh_ratio(spec: FiniteChainSpec) -> np.ndarray:
    """r(x,y) = pi(y) q(y,x) / (pi(x) q(x,y))."""
    pi, q = spec.pi, spec.q
    return (pi[None, :] * q.T) / (pi[:, None] * q)


def build_mh(spec: FiniteChainSpec) -> TransitionMatrix:
    accept = np.minimum(1.0, mh_ratio(spec))
    return _finish(spec.q * accept, "mh")


def build_ideal(spec: FiniteChainSpec) -> TransitionMatrix:
    qw = qw_normalizers(spec)
    prop = spec.q * spec.w / qw[:, None]  # q^w
    ratio = mh_ratio(spec) * (spec.w.T / spec.w) * (qw[:, None] / qw[None, :])
    return _finish(prop * np.minimum(1.0, ratio), "ideal")


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    """All count vectors with `parts` nonnegative entries summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _count_table(m: int, k: int, probs: np.ndarray, weights: np.ndarray):
    """Multinomial grouping of k iid draws from `probs` on m states.

    Returns (log-ish probabilities, weight sums): for each count vector c,
    the multinomial probability of c and sum_j c_j * weights[j].
    """
    counts = np.array(list(_compositions(k, m)), dtype=np.int64)
    logfact = np.array([math.lgamma(i + 1) for i in range(k + 1)])
    coef = math.lgamma(k + 1) - logfact[counts].sum(axis=1)
    with np.errstate(divide="ignore"):
        logp = coef + (counts * np.log(probs)[None, :]).sum(axis=1)
    p = np.exp(logp)
    wsum = counts @ weights
    return p, wsum


def enumeration_cost_semi_ideal(m: int, n: int) -> float:
    return float(m) ** (n - 1)


def enumeration_cost_mtm(m: int, n: int) -> float:
    return float(m) ** (2 * (n - 1))


def _check_budget(cost: float, budget: int, what: str) -> None:
    if cost > budget:
        raise EnumerationBudgetError(
            f"{what} enumeration needs {cost:.3g} tuples, budget is {budget}"
        )


def qw_tilde(spec: FiniteChainSpec) -> np.ndarray:
    """(qtilde w)_n(x,y) = E[(qhat w_n)(x, Y)^(-1) | Y_1 = y]^(-1), exactly.

    The conditional expectation over (Y_2 .. Y_n) iid from q(x, .) is a
    finite sum grouped by multinomial counts.
    """
    _check_budget(enumeration_cost_semi_ideal(spec.m, spec.n), SEMI_IDEAL_BUDGET, "semi-ideal")
    m, n = spec.m, spec.n
    out = np.empty((m, m))
    for x in range(m):
        p, wsum = _count_table(m, n - 1, spec.q[x], spec.w[x])
        for y in range(m):
            inv_mean = float(np.sum(p * n / (spec.w[x, y] + wsum)))
            out[x, y] = 1.0 / inv_mean
    return out


def build_semi_ideal(spec: FiniteChainSpec) -> TransitionMatrix:
    qwt = qw_tilde(spec)
    prop = spec.q * spec.w / qwt
    ratio = mh_ratio(spec) * (spec.w.T / spec.w) * (qwt / qwt.T)
    return _finish(prop * np.minimum(1.0, ratio), "semi-ideal")


def build_mtm(spec: FiniteChainSpec) -> TransitionMatrix:
    """P_n(x,y) = q(x,y) w(x,y) E[min{1/qhat_x, R(x,y)/qhat_y} | Y1=y, Z1=x].

    R is the pi-q-w reverse ratio; the expectation runs over independent
    multinomial count vectors for the extra proposals and shadows.
    """
    _check_budget(enumeration_cost_mtm(spec.m, spec.n), MTM_BUDGET, "multiple-try")
    m, n = spec.m, spec.n
    R = mh_ratio(spec) * (spec.w.T / spec.w)
    off = np.zeros((m, m))
    tables = [_count_table(m, n - 1, spec.q[x], spec.w[x]) for x in range(m)]
    for x in range(m):
        py, wy = tables[x]
        for y in range(m):
            if y == x:
                continue
            pz, wz = tables[y]
            qhat_x = (spec.w[x, y] + wy) / n  # (qhat w)(x, Y), Y1=y pinned
            qhat_y = (spec.w[y, x] + wz) / n  # (qhat w)(y, Z), Z1=x pinned
            vals = np.minimum(1.0 / qhat_x[:, None], R[x, y] / qhat_y[None, :])
            expect = float(py @ vals @ pz)
            off[x, y] = spec.q[x, y] * spec.w[x, y] * expect
    return _finish(off, "mtm")


def lazy_matrix(P: TransitionMatrix) -> TransitionMatrix:
    eye = np.eye(P.P.shape[0])
    return TransitionMatrix(P=0.5 * (P.P + eye), kind=f"lazy-{P.kind}")


def dirichlet_form(P: TransitionMatrix | np.ndarray, pi: np.ndarray, f: np.ndarray) -> float:
    """E(P, f) = (1/2) sum_xy pi(x) P(x,y) (f(x) - f(y))^2."""
    mat = P.P if isinstance(P, TransitionMatrix) else np.asarray(P)
    f = np.asarray(f, dtype=float)
    diff = f[:, None] - f[None, :]
    return 0.5 * float(np.sum(pi[:, None] * mat * diff * diff))


def reversibility_gap(P: TransitionMatrix | np.ndarray, pi: np.ndarray) -> float:
    mat = P.P if isinstance(P, TransitionMatrix) else np.asarray(P)
    flow = pi[:, None] * mat
    return float(np.abs(flow - flow.T).max())


@dataclass(frozen=True)
class SpectralReport:
    gap: float
    lambda_min: float
    positive: bool
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray  # columns, in original (non-symmetrized) coordinates


def spectral_quantities(
    P: TransitionMatrix | np.ndarray, pi: np.ndarray, tol: float = REVERSIBILITY_TOL
) -> SpectralReport:
    """Spectral gap and extreme eigenvalue via the symmetrized matrix.

    Requires pi-reversibility (checked); for non-reversible input wrap the
    chain in the lazy kernel first.
    """
    mat = P.P if isinstance(P, TransitionMatrix) else np.asarray(P)
    gap = reversibility_gap(mat, pi)
    if gap > tol:
        raise ValueError(
            f"matrix is not pi-reversible (gap {gap:.3g}); symmetrize or use the lazy wrapper"
        )
    root = np.sqrt(pi)
    S = (root[:, None] * mat) / root[None, :]
    S = 0.5 * (S + S.T)
    vals, vecs = scipy.linalg.eigh(S)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    funcs = vecs / root[:, None]
    return SpectralReport(
        gap=float(1.0 - vals[1]) if len(vals) > 1 else 0.0,
        lambda_min=float(vals[-1]),
        positive=bool(vals[-1] >= -1e-12),
        eigenvalues=vals,
        eigenfunctions=funcs,
    )


def _conductance_numpy(flow: np.ndarray, pi: np.ndarray) -> float:
    m = len(pi)
    best = np.inf
    rowsum = flow.sum(axis=1)
    masks = np.arange(1, 2**m - 1, dtype=np.int64)
    member = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
    piA = member @ pi
    ok = piA <= 0.5
    member = member[ok]
    piA = piA[ok]
    inA = member.astype(float)
    internal = np.einsum("ki,ij,kj->k", inA, flow, inA)
    cut = inA @ rowsum - internal
    ratios = cut / piA
    if len(ratios):
        best = float(ratios.min())
    return best


def conductance(
    P: TransitionMatrix | np.ndarray, pi: np.ndarray, backend: str | None = None
) -> float:
    """Exact conductance by subset enumeration (m <= 24)."""
    mat = P.P if isinstance(P, TransitionMatrix) else np.asarray(P)
    m = len(pi)
    if m > CONDUCTANCE_MAX_STATES:
        raise EnumerationBudgetError(
            f"conductance enumeration limited to m <= {CONDUCTANCE_MAX_STATES}, got {m}"
        )
    flow = pi[:, None] * mat
    if resolve_backend(backend) == NUMBA and m > 12:
        from ._conductance_numba import conductance_gray

        return float(conductance_gray(flow, np.asarray(pi, dtype=float)))
    return _conductance_numpy(flow, pi)


# ---------------------------------------------------------------------------
# Comparison-inequality verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    spec_hash: str
    max_violation: float
    passed: bool
    witness: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "name": self.name,
                "spec_hash": self.spec_hash,
                "max_violation": f"{self.max_violation:.17g}",
                "pass": self.passed,
                **({"witness": self.witness} if self.witness else {}),
            },
            separators=(",", ":"),
            sort_keys=True,
        )


def sup_importance_weight(spec: FiniteChainSpec) -> tuple[float, float]:
    """(|varpi|_inf, |varpi^-1|_inf) over the full (x, y) grid."""
    varpi = spec.w / qw_normalizers(spec)[:, None]
    return float(varpi.max()), float(1.0 / varpi.min())


def eta_ideal_semi(spec: FiniteChainSpec) -> np.ndarray:
    """eta(x,y) = min{(qw)(x)/(qtilde w)_n(x,y), (qw)(y)/(qtilde w)_n(y,x)}."""
    qw = qw_normalizers(spec)
    qwt = qw_tilde(spec)
    return np.minimum(qw[:, None] / qwt, (qw[None, :] / qwt.T))


def zeta_semi_mtm(spec: FiniteChainSpec) -> np.ndarray:
    """zeta_n(x,y) = E[min{(qtilde w)_n(x,y)/qhat_x, (qtilde w)_n(y,x)/qhat_y}]."""
    _check_budget(enumeration_cost_mtm(spec.m, spec.n), MTM_BUDGET, "multiple-try")
    m, n = spec.m, spec.n
    qwt = qw_tilde(spec)
    tables = [_count_table(m, n - 1, spec.q[x], spec.w[x]) for x in range(m)]
    out = np.empty((m, m))
    for x in range(m):
        py, wy = tables[x]
        for y in range(m):
            pz, wz = tables[y]
            qhat_x = (spec.w[x, y] + wy) / n
            qhat_y = (spec.w[y, x] + wz) / n
            vals = np.minimum(qwt[x, y] / qhat_x[:, None], qwt[y, x] / qhat_y[None, :])
            out[x, y] = float(py @ vals @ pz)
    return out


def beta1n_exact(spec: FiniteChainSpec, s: float) -> float:
    """beta_{1,n}(s): (pi x q^w)-probability that (qw)(x)/(qtilde w)_n(x,y) < 1/s."""
    qw = qw_normalizers(spec)
    qwt = qw_tilde(spec)
    qw_prop = spec.q * spec.w / qw[:, None]
    event = (qw[:, None] / qwt) < (1.0 / s)
    return float(np.sum(spec.pi[:, None] * qw_prop * event))


def _test_functions(spec: FiniteChainSpec, mats: list[TransitionMatrix], n_random: int, gen) -> np.ndarray:
    fs = []
    for mat in mats:
        rep = spectral_quantities(mat, spec.pi)
        fs.append(rep.eigenfunctions.T)
    fs.append(gen.standard_normal((n_random, spec.m)))
    F = np.vstack(fs)
    # normalize in L2(pi) for scale-stable violations
    norms = np.sqrt(np.einsum("ki,i,ki->k", F, spec.pi, F))
    norms[norms < 1e-12] = 1.0
    return F / norms[:, None]


def verify_inequalities(
    spec: FiniteChainSpec,
    report_sink: Callable[[CheckResult], None] | None = None,
    tol: float = 1e-9,
    n_random_f: int = 100,
    f_seed: int = 0,
    beta_grid: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0, 4.0),
) -> list[CheckResult]:
    """Run every comparison-inequality check on one spec.

    Covers: the n vs n-1 Dirichlet-form comparisons for both resampled
    kernels, the sup-weight Dirichlet comparisons against the ideal chain,
    the entrywise off-diagonal dominations with exact eta / zeta_n, and the
    exact beta_{1,n}(s) grid (decreasing in s). Violations beyond ``tol``
    fail with a witness attached.
    """
    gen = np.random.default_rng(f_seed)
    results: list[CheckResult] = []
    h = spec.spec_hash()

    def emit(name: str, violation: float, witness: dict | None = None):
        res = CheckResult(
            name=name,
            spec_hash=h,
            max_violation=float(violation),
            passed=bool(violation <= tol),
            witness=witness or {},
        )
        results.append(res)
        if report_sink is not None:
            report_sink(res)

    P_inf = build_ideal(spec)
    P_semi = build_semi_ideal(spec)
    P_mtm = build_mtm(spec)
    fs = _test_functions(spec, [P_inf, P_semi, P_mtm], n_random_f, gen)

    def dirichlet_many(P):
        return np.array([dirichlet_form(P, spec.pi, f) for f in fs])

    e_inf = dirichlet_many(P_inf)
    e_semi = dirichlet_many(P_semi)
    e_mtm = dirichlet_many(P_mtm)

    # Try-count comparison: (n-1) E_n(f) <= n E_{n-1}(f) for both
    # resampled kernels.
    if spec.n >= 2:
        prev = spec.with_n(spec.n - 1)
        e_semi_prev = dirichlet_many(build_semi_ideal(prev))
        e_mtm_prev = dirichlet_many(build_mtm(prev))
        n = spec.n
        v = (n - 1) * e_semi - n * e_semi_prev
        k = int(np.argmax(v))
        emit("try-count-semi-ideal", v.max(), {"f_index": k})
        v = (n - 1) * e_mtm - n * e_mtm_prev
        k = int(np.argmax(v))
        emit("try-count-mtm", v.max(), {"f_index": k})

    # SPI comparisons through the sup-weights.
    w_sup, w_inv_sup = sup_importance_weight(spec)
    v = e_inf / w_sup - e_semi
    emit("spi-ideal-vs-semi", v.max(), {"sup_varpi": w_sup})
    v = e_mtm - (w_inv_sup**2) * (w_sup**2) * e_semi
    emit("spi-semi-vs-mtm", v.max(), {"sup_varpi": w_sup, "sup_inv_varpi": w_inv_sup})

    # Entrywise off-diagonal dominations.
    eta = eta_ideal_semi(spec)
    zeta = zeta_semi_mtm(spec)
    off = ~np.eye(spec.m, dtype=bool)
    v1 = (eta * P_inf.P - P_semi.P)[off]
    i = int(np.argmax(v1))
    emit("offdiag-ideal-vs-semi", v1.max(), {"flat_index": i})
    v2 = (zeta * P_semi.P - P_mtm.P)[off]
    i = int(np.argmax(v2))
    emit("offdiag-semi-vs-mtm", v2.max(), {"flat_index": i})

    # beta_{1,n}(s) is a decreasing function of s.
    betas = [beta1n_exact(spec, s) for s in beta_grid]
    v = max(
        (betas[i + 1] - betas[i] for i in range(len(betas) - 1)),
        default=0.0,
    )
    emit("beta1n-decreasing-in-s", v, {"grid": list(beta_grid), "values": betas})
    return results


def beta1n_limit_profile(
    spec: FiniteChainSpec, n_values: tuple[int, ...] = (2, 4, 8), s_values: tuple[float, ...] = (0.5, 2.0)
) -> dict[float, list[float]]:
    """beta_{1,n}(s) across n, for studying the indicator limit 1{s<=1}."""
    return {
        s: [beta1n_exact(spec.with_n(n), s) for n in n_values] for s in s_values
    }
