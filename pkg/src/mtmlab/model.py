"""Targets, random-walk proposals, and the importance-weight algebra.

Conventions used throughout the package:

* the standard Gaussian target drops its normalizer, ``log pi(x) = -|x|^2/2``;
* all weight and acceptance arithmetic happens in log space;
* weights are the density-ratio family ``w(x, y) = (pi(y)/pi(x))^theta``.

For the standard Gaussian target with an isotropic random-walk proposal
``q(x, .) = N(x, sigma^2 I_d)`` the weighted-proposal normalizer has the
closed form

    (qw)(x) = (1 + theta sigma^2)^(-d/2)
              * exp(theta^2 sigma^2 |x|^2 / (2 (1 + theta sigma^2)))

and the weighted proposal itself is the Gaussian

    q^w(x, .) = N(x / (1 + theta sigma^2), sigma^2 / (1 + theta sigma^2) I_d).

The closed form of ``(qw)`` is derived, not quoted; ``validate_qw_closed_form``
checks it against one-dimensional quadrature and the test suite gates on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.random import Generator

from .errors import DomainError, UnsupportedTargetError
from .quadrature import gaussian_expectation_log

UNINFORMED = 0.0
LOCALLY_BALANCED = 0.5
GLOBALLY_BALANCED = 1.0


def _std_gaussian_logpdf(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    return -0.5 * float(np.dot(x, x))


@dataclass(frozen=True)
class TargetModel:
    """A d-dimensional target known through its log-density.

    ``is_standard_gaussian`` unlocks every closed-form path (weighted
    proposal, normalizers, exact stationary draws). Custom targets can be
    used by the samplers that only need weight ratios.
    """

    d: int
    log_density: Callable[[np.ndarray], float] = field(default=_std_gaussian_logpdf)
    is_standard_gaussian: bool = True

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be a positive integer")
        v = self.log_density(np.zeros(self.d))
        if not np.isfinite(v):
            raise DomainError("log_density must be finite at the origin")
        if self.is_standard_gaussian:
            e1 = np.zeros(self.d)
            e1[0] = 1.0
            if abs((self.log_density(e1) - v) + 0.5) > 1e-9:
                raise ValueError(
                    "is_standard_gaussian set but log_density is not -|x|^2/2 + const"
                )

    def logpi(self, x: np.ndarray) -> float:
        v = float(self.log_density(np.asarray(x, dtype=float)))
        if np.isnan(v):
            raise DomainError(f"log-density is NaN at {np.asarray(x)!r}")
        return v

    def logpi_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if self.is_standard_gaussian:
            return -0.5 * np.einsum("...i,...i->...", xs, xs)
        return np.array([self.logpi(row) for row in xs.reshape(-1, self.d)]).reshape(
            xs.shape[:-1]
        )

    def sample_pi(self, gen: Generator, size: int | None = None) -> np.ndarray:
        """Exact target draw; Gaussian targets only."""
        if not self.is_standard_gaussian:
            raise UnsupportedTargetError("exact target draws need a Gaussian target")
        if size is None:
            return gen.standard_normal(self.d)
        return gen.standard_normal((size, self.d))


def standard_gaussian(d: int) -> TargetModel:
    return TargetModel(d=d)


@dataclass(frozen=True)
class RwProposal:
    """Isotropic Gaussian random walk, per-coordinate deviation sigma."""

    sigma: float
    d: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.d < 1:
            raise ValueError("dimension must be a positive integer")

    @property
    def sigma2(self) -> float:
        return self.sigma * self.sigma


@dataclass(frozen=True)
class WeightSpec:
    """Weight exponent theta of w(x, y) = (pi(y)/pi(x))^theta."""

    theta: float

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")

    @classmethod
    def uninformed(cls) -> "WeightSpec":
        return cls(UNINFORMED)

    @classmethod
    def locally_balanced(cls) -> "WeightSpec":
        return cls(LOCALLY_BALANCED)

    @classmethod
    def globally_balanced(cls) -> "WeightSpec":
        return cls(GLOBALLY_BALANCED)


def log_weight(
    target: TargetModel, spec: WeightSpec, x: np.ndarray, y: np.ndarray
) -> float:
    """log w(x, y) = theta * (log pi(y) - log pi(x)).

    Antisymmetric by construction: log_weight(x, y) == -log_weight(y, x).
    """
    if spec.theta == 0.0:
        return 0.0
    lx = target.logpi(x)
    ly = target.logpi(y)
    if not np.isfinite(lx):
        raise DomainError(f"log-density not finite at x={np.asarray(x)!r}")
    if not np.isfinite(ly):
        raise DomainError(f"log-density not finite at y={np.asarray(y)!r}")
    return spec.theta * (ly - lx)


def log_weight_batch(
    target: TargetModel, spec: WeightSpec, x: np.ndarray, ys: np.ndarray
) -> np.ndarray:
    """log w(x, y_i) for a batch of candidates; shares the log pi(x) evaluation."""
    if spec.theta == 0.0:
        return np.zeros(ys.shape[:-1])
    lx = target.logpi(x)
    lys = target.logpi_batch(ys)
    return spec.theta * (lys - lx)


def log_qw_normalizer(
    target: TargetModel, prop: RwProposal, spec: WeightSpec, x: np.ndarray
) -> float:
    """log (qw)(x) for the Gaussian target, via the derived closed form."""
    if spec.theta == 0.0:
        return 0.0
    if not target.is_standard_gaussian:
        raise UnsupportedTargetError(
            "closed-form (qw)(x) requires the standard Gaussian target"
        )
    th, s2 = spec.theta, prop.sigma2
    x = np.asarray(x, dtype=float)
    c = 1.0 + th * s2
    return -0.5 * target.d * np.log(c) + th * th * s2 * float(np.dot(x, x)) / (2.0 * c)


def log_importance_weight(
    target: TargetModel,
    prop: RwProposal,
    spec: WeightSpec,
    x: np.ndarray,
    y: np.ndarray,
) -> float:
    """log varpi(x, y) = log w(x, y) - log (qw)(x)."""
    return log_weight(target, spec, x, y) - log_qw_normalizer(target, prop, spec, x)


def sample_rw(prop: RwProposal, x: np.ndarray, gen: Generator) -> np.ndarray:
    """One draw from q(x, .) = N(x, sigma^2 I_d)."""
    x = np.asarray(x, dtype=float)
    return x + prop.sigma * gen.standard_normal(x.shape)


def sample_rw_batch(
    prop: RwProposal, x: np.ndarray, n: int, gen: Generator
) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[None, :] + prop.sigma * gen.standard_normal((n, x.shape[-1]))


def qw_mean_factor(prop: RwProposal, spec: WeightSpec) -> float:
    """Contraction factor of the weighted proposal mean, 1/(1 + theta sigma^2)."""
    return 1.0 / (1.0 + spec.theta * prop.sigma2)


def qw_variance(prop: RwProposal, spec: WeightSpec) -> float:
    """Per-coordinate variance of the weighted proposal."""
    return prop.sigma2 / (1.0 + spec.theta * prop.sigma2)


def sample_qw_ideal(
    target: TargetModel,
    prop: RwProposal,
    spec: WeightSpec,
    x: np.ndarray,
    gen: Generator,
) -> np.ndarray:
    """One draw from the weighted proposal q^w(x, .); Gaussian targets only."""
    if not target.is_standard_gaussian:
        raise UnsupportedTargetError(
            "closed-form q^w sampling requires the standard Gaussian target"
        )
    x = np.asarray(x, dtype=float)
    rho = qw_mean_factor(prop, spec)
    sd = np.sqrt(qw_variance(prop, spec))
    return rho * x + sd * gen.standard_normal(x.shape)


def log_qw_density_ratio(
    prop: RwProposal, spec: WeightSpec, x: np.ndarray, y: np.ndarray
) -> float:
    """log of q^w(x, y) / q(x, y) from the two Gaussian densities.

    Independent route to log varpi used to cross-validate the derived
    (qw) closed form.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s2 = prop.sigma2
    rho = qw_mean_factor(prop, spec)
    v = qw_variance(prop, spec)
    d = x.shape[-1]
    lq = -0.5 * d * np.log(2 * np.pi * s2) - 0.5 * float(np.dot(y - x, y - x)) / s2
    r = y - rho * x
    lqw = -0.5 * d * np.log(2 * np.pi * v) - 0.5 * float(np.dot(r, r)) / v
    return lqw - lq


def validate_qw_closed_form(
    prop: RwProposal,
    spec: WeightSpec,
    xs: tuple[float, ...] = (0.0, 1.0, -1.0, 3.0, -3.0),
    rtol: float = 1e-8,
) -> float:
    """Gate-check the derived (qw) closed form against 1-D quadrature.

    Returns the worst relative error over the probe points; raises if it
    exceeds ``rtol``. The quadrature route integrates the definition
    ``int q(x, dy) w(x, y)`` directly.
    """
    target = standard_gaussian(1)
    p1 = RwProposal(sigma=prop.sigma, d=1)
    worst = 0.0
    for x0 in xs:
        log_f = lambda y: spec.theta * (x0 * x0 - y * y) / 2.0  # noqa: E731
        num = gaussian_expectation_log(log_f, mean=x0, var=p1.sigma2)
        closed = log_qw_normalizer(target, p1, spec, np.array([x0]))
        err = abs(np.expm1(num - closed))  # relative error of the values
        worst = max(worst, err)
    if worst > rtol:
        raise ArithmeticError(
            f"(qw) closed form disagrees with quadrature: rel err {worst:.03g}"
        )
    return worst
