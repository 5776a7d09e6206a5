"""Closed-form evaluation of the Gaussian-case bounds and constants,
each paired with an independent numeric oracle.

Moment conventions: with the locally balanced weights (theta = 1/2),
standard Gaussian target and N(x, sigma^2 I_d) proposal, the importance
weight factorizes over coordinates,

    log varpi(x, y) = sum_i [ x_i^2 / (2 (2 + s2)) - y_i^2 / 4 ] + (d/2) log((2 + s2)/2),

so any moment E[varpi^r] equals a one-dimensional moment to the d-th
power. ``moment_oracle`` evaluates that one-dimensional moment by
adaptive Gauss-Hermite quadrature of the definition; the displayed
closed forms are evaluated verbatim by ``reported_moment_formula`` and
only ever appear next to the oracle value (they disagree with direct
integration; the oracle is authoritative downstream).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .quadrature import DEFAULT_NODES, log_integral_exp

GAP_CONSTANT = 0.3177765  # c_gamma
DEFAULT_REPORT_RTOL = 1e-6


# ---------------------------------------------------------------------------
# Importance-weight moments (theta = 1/2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentInputs:
    """Inputs of the moment closed forms; theta is pinned at 1/2."""

    d: int
    sigma2: float
    p: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be a positive integer")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        if self.p < 1:
            raise ValueError("p must be >= 1")


def negative_moment_finite(p: float, sigma2: float) -> bool:
    """Finiteness of M_varpi(-2p): p s2 < 1 and p/(2(1-p s2)) - p/(2+s2) < 1/2."""
    if p * sigma2 >= 1.0:
        return False
    return p / (2.0 * (1.0 - p * sigma2)) - p / (2.0 + sigma2) < 0.5


def _exponent_matrix(r: float, sigma2: float) -> np.ndarray:
    """Quadratic form of the integrand of E[varpi^r] in (x, z) coordinates."""
    s = math.sqrt(sigma2)
    a_xx = -0.5 + r / (2.0 * (2.0 + sigma2)) - r / 4.0
    a_zz = -0.5 - r * sigma2 / 4.0
    a_xz = -r * s / 4.0  # half-coefficient of the cross term
    return np.array([[a_xx, a_xz], [a_xz, a_zz]])


def _moment_is_finite(r: float, sigma2: float) -> bool:
    A = _exponent_matrix(r, sigma2)
    return A[0, 0] < 0 and A[1, 1] < 0 and np.linalg.det(A) > 0


@lru_cache(maxsize=512)
def weight_moment_1d(r: float, sigma2: float, nodes: int = DEFAULT_NODES) -> float:
    """One-dimensional E[varpi(X, Y)^r], X ~ N(0,1), Y = X + sigma Z.

    Nested adaptive Gauss-Hermite over (z | x) then x; returns +inf when
    the exponent's quadratic form is not negative definite.
    """
    if not _moment_is_finite(r, sigma2):
        return math.inf
    s = math.sqrt(sigma2)
    const = 0.5 * math.log((2.0 + sigma2) / 2.0)
    log2pi = math.log(2.0 * math.pi)

    def log_inner(x: float) -> float:
        def h(z: np.ndarray) -> np.ndarray:
            y = x + s * z
            return (
                -0.5 * z * z
                - 0.5 * log2pi
                + r * (x * x / (2.0 * (2.0 + sigma2)) - y * y / 4.0 + const)
            )

        return log_integral_exp(h, x0=0.0, nodes=nodes)

    def H(xs: np.ndarray) -> np.ndarray:
        return np.array([-0.5 * x * x - 0.5 * log2pi + log_inner(x) for x in xs])

    return math.exp(log_integral_exp(H, x0=0.0, nodes=nodes))


def weight_moment(d: int, sigma2: float, r: float, nodes: int = DEFAULT_NODES) -> float:
    """M_varpi(r) in dimension d: the 1-D moment to the d-th power."""
    m1 = weight_moment_1d(r, sigma2, nodes=nodes)
    if math.isinf(m1):
        return math.inf
    return m1**d


def moment_oracle(inp: MomentInputs, sign: int, nodes: int = DEFAULT_NODES) -> float:
    """M_varpi(+2p) or M_varpi(-2p) by quadrature of the definition."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    r = 2.0 * inp.p * sign
    if sign < 0 and not negative_moment_finite(inp.p, inp.sigma2):
        return math.inf
    return weight_moment(inp.d, inp.sigma2, r, nodes=nodes)


def reported_moment_formula(inp: MomentInputs, sign: int) -> float:
    """Literal arithmetic of the reported M_varpi(+-2p) closed forms.

    Emitted only inside BoundReports for discrepancy flagging, never
    consumed by downstream bounds.
    """
    d, s2, p = inp.d, inp.sigma2, inp.p
    if sign == +1:
        base = (2.0 + s2) / (2.0 * (1.0 + p * s2))
        bracket = 1.0 + p * (1.0 / (1.0 + p * s2) - 2.0 / (2.0 + s2))
        if bracket <= 0.0:
            raise DomainError("displayed M(2p) bracket is nonpositive")
        return base ** (d * p / 2.0) * bracket ** (-d / 2.0)
    if sign == -1:
        bracket = 2.0 + (1.0 - 3.0 * p - 3.0 * p * p) * s2 - p * s2 * s2
        if bracket <= 0.0:
            raise DomainError("displayed M(-2p) bracket is nonpositive")
        return 2.0 ** (d * p / 2.0) * (2.0 + s2) ** (d * (1.0 - p) / 2.0) * bracket ** (-d / 2.0)
    raise ValueError("sign must be +1 or -1")


def sigma2_threshold(p: float) -> float:
    """sigma^2(p) = 1/(2p) - p + (1/2)(-3 + sqrt(5 + 1/p^2 + 2/p + 12p + 4p^2))."""
    if p < 1:
        raise ValueError("p must be >= 1")
    root = math.sqrt(5.0 + 1.0 / (p * p) + 2.0 / p + 12.0 * p + 4.0 * p * p)
    return 1.0 / (2.0 * p) - p + 0.5 * (-3.0 + root)


def sigma2_threshold_bisect(p: float, tol: float = 1e-12) -> float:
    """Root of the moment-oracle finiteness condition, found by bisection.

    Independent route to sigma^2(p): brackets the boundary of
    ``negative_moment_finite`` in sigma^2.
    """
    lo, hi = 1e-12, 1.0 / p - 1e-12
    if not negative_moment_finite(p, lo):
        raise ArithmeticError("finiteness condition empty near 0")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if negative_moment_finite(p, mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Bound reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """A named closed-form quantity next to its independent oracle value."""

    name: str
    inputs: dict
    formula_value: Optional[float]
    oracle_value: Optional[float]
    tolerance: float = DEFAULT_REPORT_RTOL

    @property
    def relative_discrepancy(self) -> Optional[float]:
        if self.formula_value is None or self.oracle_value is None:
            return None
        if math.isinf(self.formula_value) and math.isinf(self.oracle_value):
            return 0.0
        scale = max(abs(self.formula_value), abs(self.oracle_value), 1e-300)
        return abs(self.formula_value - self.oracle_value) / scale

    @property
    def agrees(self) -> bool:
        disc = self.relative_discrepancy
        return disc is not None and disc <= self.tolerance


def moment_report(inp: MomentInputs, sign: int, tolerance: float = DEFAULT_REPORT_RTOL) -> BoundReport:
    oracle = moment_oracle(inp, sign)
    try:
        formula = reported_moment_formula(inp, sign)
    except DomainError:
        formula = math.inf
    return BoundReport(
        name=f"moment-{'plus' if sign > 0 else 'minus'}-2p",
        inputs={"d": inp.d, "sigma2": inp.sigma2, "p": inp.p},
        formula_value=formula,
        oracle_value=oracle,
        tolerance=tolerance,
    )


# ---------------------------------------------------------------------------
# Weak Poincare machinery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyBeta:
    """beta(s) = c * s^(-p)."""

    c: float
    p: float

    def __call__(self, s):
        return self.c * np.asarray(s, dtype=float) ** (-self.p)


@dataclass(frozen=True)
class BetaTable:
    """A tabulated decreasing beta curve on a positive s-grid."""

    s: np.ndarray
    beta: np.ndarray

    def __call__(self, s):
        # monotone log-log interpolation, clamped at the table edges
        ls = np.log(np.asarray(s, dtype=float))
        with np.errstate(divide="ignore"):
            lb = np.where(self.beta > 0, np.log(self.beta), -np.inf)
        out = np.interp(ls, np.log(self.s), lb)
        return np.exp(out)


@dataclass(frozen=True)
class WpiCurve:
    """Composition of two polynomial beta curves per the chaining rule.

    ``alpha = p^2 / (1 + 2p)`` and the composed constant uses the
    displayed plug-in ``r = c1 p / (c2 (1 + p))``:
    ``c = c2 r^(1+p) + c1 r^(-p)``.
    """

    c1: float
    c2: float
    p: float

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("constants must be positive")
        if self.p < 1:
            raise ValueError("order p must be >= 1")

    @property
    def alpha(self) -> float:
        return self.p * self.p / (1.0 + 2.0 * self.p)

    @property
    def c(self) -> float:
        r = self.c1 * self.p / (self.c2 * (1.0 + self.p))
        return self.c2 * r ** (1.0 + self.p) + self.c1 * r ** (-self.p)

    def __call__(self, s):
        return self.c * np.asarray(s, dtype=float) ** (-self.alpha)


def chain_beta(
    beta1: PolyBeta | BetaTable | Callable,
    beta2: PolyBeta | BetaTable | Callable,
    s_grid: np.ndarray | None = None,
    points_per_decade: int = 400,
):
    """Compose two WPI beta curves: beta(s) = inf over s1 s2 = s of
    beta1(s1) + s1 beta2(s2).

    Two polynomial curves of equal order compose analytically to a
    ``WpiCurve`` (the displayed constant is an upper envelope of the
    exact infimum; see the package notes). Everything else is composed
    numerically on a log grid with ``points_per_decade`` resolution.
    """
    if isinstance(beta2, PolyBeta) and beta2.c == 0.0:
        return beta1
    if isinstance(beta1, PolyBeta) and isinstance(beta2, PolyBeta) and beta1.p == beta2.p:
        return WpiCurve(c1=beta1.c, c2=beta2.c, p=beta1.p)
    if s_grid is None:
        s_grid = np.logspace(-3, 3, 6 * points_per_decade + 1)
    s_grid = np.asarray(s_grid, dtype=float)
    lo = min(s_grid.min(), 1e-6)
    hi = max(s_grid.max(), 1e6)
    decades = math.log10(hi) - math.log10(lo)
    s1 = np.logspace(math.log10(lo), math.log10(hi), int(decades * points_per_decade) + 1)
    b1 = np.asarray(beta1(s1), dtype=float)
    out = np.empty_like(s_grid)
    for i, s in enumerate(s_grid):
        out[i] = np.min(b1 + s1 * np.asarray(beta2(s / s1), dtype=float))
    return BetaTable(s=s_grid, beta=out)


def grid_chain_minimum(beta1: Callable, beta2: Callable, s: float, points_per_decade: int = 400) -> float:
    """The numeric infimum at a single s (the grid oracle for chain_beta)."""
    s1 = np.logspace(-8, 8, 16 * points_per_decade + 1)
    return float(np.min(np.asarray(beta1(s1)) + s1 * np.asarray(beta2(s / s1))))


def subgeometric_bound(c: float, alpha: float, k: int, scale: float = 1.0) -> float:
    """Decay envelope c (1+alpha)^(1+alpha) (scale k)^(-alpha) per osc-norm^2.

    ``scale`` implements the linear-rescaling rule: a WPI in beta(scale s)
    yields the same envelope evaluated at scale * k.
    """
    if c <= 0 or alpha <= 0 or k < 1 or scale <= 0:
        raise ValueError("need c > 0, alpha > 0, k >= 1, scale > 0")
    return c * (1.0 + alpha) ** (1.0 + alpha) * (scale * k) ** (-alpha)


# ---------------------------------------------------------------------------
# Headline bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KConstants:
    """The untraced constants of the beta_n envelope; default zero.

    ``traceable_constants`` computes the proof-identified ingredients by
    quadrature for callers that want nonzero values.
    """

    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0

    def __post_init__(self):
        if min(self.k1, self.k2, self.k3) < 0:
            raise ValueError("constants must be nonnegative")


@dataclass(frozen=True)
class MomentTriple:
    """(M_varpi(p), M_varpi(2p), M_varpi(-2p)) feeding the envelope."""

    m_p: float
    m_2p: float
    m_minus_2p: float


def oracle_moments(d: int, sigma2: float, p: float) -> MomentTriple:
    return MomentTriple(
        m_p=weight_moment(d, sigma2, p),
        m_2p=weight_moment(d, sigma2, 2.0 * p),
        m_minus_2p=(
            weight_moment(d, sigma2, -2.0 * p)
            if negative_moment_finite(p, sigma2)
            else math.inf
        ),
    )


def traceable_constants(d: int, sigma2: float, p: float) -> KConstants:
    """Proof-traced ingredients: K1 = M(p+1); K2, K3 from the n^-1 / n^-2
    terms of the shadow-sample comparison (see decisions notes).
    """
    m_w_pos = weight_moment_1d_w(1.0, sigma2) ** d
    m_w_neg = weight_moment_1d_w(-1.0, sigma2) ** d
    return KConstants(
        k1=weight_moment(d, sigma2, p + 1.0),
        k2=2.0 * (weight_moment(d, sigma2, 2.0 * p) + weight_moment(d, sigma2, -2.0 * p)),
        k3=2.0 * (m_w_pos + m_w_neg),
    )


@lru_cache(maxsize=512)
def weight_moment_1d_w(r: float, sigma2: float, nodes: int = DEFAULT_NODES) -> float:
    """One-dimensional (pi x q)(w^r) for the theta = 1/2 weights."""
    s = math.sqrt(sigma2)

    def log_inner(x: float) -> float:
        def h(z: np.ndarray) -> np.ndarray:
            y = x + s * z
            return -0.5 * z * z - 0.5 * math.log(2 * math.pi) + r * (x * x - y * y) / 4.0

        return log_integral_exp(h, x0=0.0, nodes=nodes)

    def H(xs: np.ndarray) -> np.ndarray:
        return np.array(
            [-0.5 * x * x - 0.5 * math.log(2 * math.pi) + log_inner(x) for x in xs]
        )

    return math.exp(log_integral_exp(H, x0=0.0, nodes=nodes))


def envelope_constants(n: int, p: float, moments: MomentTriple, ks: KConstants = KConstants()):
    """c_{1,n,p} and c_{2,n,p} of the beta_n envelope.

    The second constant pairs the positive and negative moments,
    M(2p) + M(-2p); its reported form prints the positive moment twice,
    which the derivation behind it contradicts.
    """
    c1 = moments.m_p + ks.k1 / n
    c2 = 2.0 ** (p + 1.0) * (ks.k2 / n + ks.k3 / (n * n) + moments.m_2p + moments.m_minus_2p)
    return c1, c2


def beta_n_bound(
    s: float,
    n: int,
    p: float,
    moments: MomentTriple,
    ks: KConstants = KConstants(),
) -> float:
    """Envelope on the ideal-vs-multiple-try comparison profile beta_n(s)."""
    if s <= 0:
        raise ValueError("s must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if not all(map(math.isfinite, (moments.m_p, moments.m_2p, moments.m_minus_2p))):
        return math.inf
    c1, c2 = envelope_constants(n, p, moments, ks)
    return float(WpiCurve(c1=c1, c2=c2, p=p)(s))


def gap_lower_bound(zeta: float, d: int) -> tuple[float, float]:
    """(conductance, spectral-gap) lower bounds at sigma = zeta d^(-1/4)."""
    if zeta <= 0 or d < 1:
        raise ValueError("need zeta > 0 and d >= 1")
    u = zeta * zeta / math.sqrt(d)  # sigma^2
    phi = 2.0 ** (-4.5) * math.exp(-(zeta**4) / 8.0) * math.sqrt(u * (2.0 + u)) * GAP_CONSTANT
    gam = 2.0 ** (-10.0) * math.exp(-(zeta**4) / 4.0) * u * (2.0 + u) * GAP_CONSTANT**2
    return phi, gam


def gap_lower_bound_sigma(sigma2: float, d: int) -> float:
    """Spectral-gap lower bound in the sigma^2 parametrization."""
    return (
        2.0 ** (-10.0)
        * math.exp(-(sigma2**2) * d / 4.0)
        * sigma2
        * (2.0 + sigma2)
        * GAP_CONSTANT**2
    )


def gap_upper_bound(sigma2: float, d: int) -> float:
    """min{(3/2) s2/(2+s2), (1 + s2^2/(2+s2)^2)^(-d/2)}."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    first = 1.5 * sigma2 / (2.0 + sigma2)
    second = (1.0 + sigma2**2 / (2.0 + sigma2) ** 2) ** (-d / 2.0)
    return min(first, second)


def alpha_inf_lower(sigma2: float, d: int) -> float:
    """(1/2) exp(-d s2^2 / (4 (2+s2)^2)): mean-acceptance floor, theta = 1/2."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return 0.5 * math.exp(-d * sigma2**2 / (4.0 * (2.0 + sigma2) ** 2))


def alpha_inf_lower_zeta(zeta: float) -> float:
    """The sigma = zeta d^(-1/4) form, (1/2) exp(-zeta^4/16)."""
    return 0.5 * math.exp(-(zeta**4) / 16.0)


def tv_qw_bound(x: np.ndarray | float, y: np.ndarray | float, sigma2: float) -> float:
    """Pinsker envelope |x-y| sqrt(1 / (2 s2 (2+s2))) on TV(q^w(x), q^w(y))."""
    diff = np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    dist = float(np.sqrt(np.dot(diff, diff)))
    return dist * math.sqrt(1.0 / (2.0 * sigma2 * (2.0 + sigma2)))


def gb_acceptance_envelope(x_norm: float, sigma2: float, d: int) -> float:
    """exp(-|x|^2 c_{1,sigma}) c_{2,sigma}: tail acceptance envelope, theta = 1."""
    c1 = sigma2 / (2.0 * ((1.0 + sigma2) ** 2 - sigma2))
    c2 = (1.0 - sigma2 / (1.0 + sigma2) ** 2) ** (-d / 2.0)
    return math.exp(-(x_norm**2) * c1) * c2


def gb_envelope_radius(eps: float, sigma2: float, d: int) -> float:
    """R_eps with envelope(R_eps) = eps."""
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    c1 = sigma2 / (2.0 * ((1.0 + sigma2) ** 2 - sigma2))
    c2 = (1.0 - sigma2 / (1.0 + sigma2) ** 2) ** (-d / 2.0)
    return math.sqrt(max(0.0, math.log(c2 / eps) / c1))


def mtm_convergence_bound(
    n: int,
    sigma2: float,
    p: float,
    k: int,
    d: int = 1,
    ks: KConstants = KConstants(),
    moments: MomentTriple | None = None,
) -> float:
    """k-step L2 decay envelope for the lazy multiple-try chain.

    ``C_{n,sigma,p} k^(-p^2 / (2 (1+2p)))`` with the constant assembled
    from the envelope constants and ``C_sigma``, the spectral-gap lower
    bound (the lazy factor-2 rescaling is what halves the exponent
    relative to the raw chained envelope). Infinite when sigma^2 is at or
    above the moment-finiteness threshold.
    """
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    if sigma2 >= sigma2_threshold(p):
        return math.inf
    if moments is None:
        moments = oracle_moments(d, sigma2, p)
    if not all(map(math.isfinite, (moments.m_p, moments.m_2p, moments.m_minus_2p))):
        return math.inf
    c1, c2 = envelope_constants(n, p, moments, ks)
    curve = WpiCurve(c1=c1, c2=c2, p=p)
    c_sigma = gap_lower_bound_sigma(sigma2, d)
    big_c = c_sigma ** (-((p + 1.0) ** 2) / (1.0 + 2.0 * p)) * curve.c
    return big_c * float(k) ** (-p * p / (2.0 * (1.0 + 2.0 * p)))


def convergence_report(n: int, sigma2: float, p: float, k: int, d: int = 1) -> BoundReport:
    value = mtm_convergence_bound(n, sigma2, p, k, d=d)
    return BoundReport(
        name="mtm-convergence-envelope",
        inputs={"n": n, "sigma2": sigma2, "p": p, "k": k, "d": d},
        formula_value=value,
        oracle_value=None,
    )
