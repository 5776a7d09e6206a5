"""Adapters giving the step functions one interface over both state spaces.

The continuous model wraps (target, proposal, weight); the finite model
embeds a ``FiniteChainSpec`` with states represented as length-1 arrays
holding the state index. Step logic only touches this interface, which is
what lets the exact finite-state oracle validate the very same sampler
code path that runs on R^d.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator

from ..errors import UnsupportedTargetError
from ..model import (
    RwProposal,
    TargetModel,
    WeightSpec,
    log_qw_normalizer,
    qw_mean_factor,
    qw_variance,
)
from ..oracle import FiniteChainSpec, qw_normalizers, qw_tilde


class GaussianKernelModel:
    """Random-walk proposal with density-ratio weights on R^d."""

    reverse_cached = True  # log w(y,x) = -log w(x,y) for the ratio family

    def __init__(self, target: TargetModel, proposal: RwProposal, weight: WeightSpec):
        self.target = target
        self.proposal = proposal
        self.weight = weight
        self.d = target.d

    def logpi(self, x: np.ndarray) -> float:
        return self.target.logpi(x)

    def sample_proposals(self, gen: Generator, x: np.ndarray, count: int) -> np.ndarray:
        return x[None, :] + self.proposal.sigma * gen.standard_normal((count, self.d))

    def log_q_ratio(self, x: np.ndarray, y: np.ndarray) -> float:
        return 0.0  # symmetric random walk

    def log_w_batch(self, x: np.ndarray, ys: np.ndarray, logpi_x: float | None = None) -> np.ndarray:
        th = self.weight.theta
        if th == 0.0:
            return np.zeros(ys.shape[0])
        lx = self.logpi(x) if logpi_x is None else logpi_x
        return th * (self.target.logpi_batch(ys) - lx)

    def log_w_reverse(self, x: np.ndarray, y: np.ndarray, lw_forward: float) -> float:
        return -lw_forward

    def log_qw(self, x: np.ndarray) -> float:
        return log_qw_normalizer(self.target, self.proposal, self.weight, x)

    def sample_qw(self, gen: Generator, x: np.ndarray) -> np.ndarray:
        if not self.target.is_standard_gaussian:
            raise UnsupportedTargetError("ideal proposal needs the Gaussian target")
        rho = qw_mean_factor(self.proposal, self.weight)
        sd = np.sqrt(qw_variance(self.proposal, self.weight))
        return rho * x + sd * gen.standard_normal(self.d)

    def sample_pi(self, gen: Generator) -> np.ndarray:
        return self.target.sample_pi(gen)

    # exact semi-ideal normalizers are only available on finite spaces
    supports_exact_semi_ideal = False


class FiniteKernelModel:
    """A FiniteChainSpec embedded behind the continuous-step interface."""

    reverse_cached = True  # table lookup, no fresh evaluation
    supports_exact_semi_ideal = True

    def __init__(self, chain: FiniteChainSpec):
        self.chain = chain
        self.d = 1
        self._log_pi = np.log(chain.pi)
        self._log_q = np.log(chain.q)
        self._log_w = np.log(chain.w)
        self._q_cdf = np.cumsum(chain.q, axis=1)
        self._pi_cdf = np.cumsum(chain.pi)
        self._log_qw = np.log(qw_normalizers(chain))
        self._qw_cdf = np.cumsum(chain.q * chain.w / np.exp(self._log_qw)[:, None], axis=1)
        self._log_qw_tilde: np.ndarray | None = None

    @staticmethod
    def state(i: int) -> np.ndarray:
        return np.array([float(i)])

    @staticmethod
    def index(x: np.ndarray) -> int:
        return int(round(float(np.asarray(x).reshape(-1)[0])))

    def logpi(self, x: np.ndarray) -> float:
        return float(self._log_pi[self.index(x)])

    def sample_proposals(self, gen: Generator, x: np.ndarray, count: int) -> np.ndarray:
        u = gen.random(count)
        idx = np.searchsorted(self._q_cdf[self.index(x)], u, side="right")
        idx = np.minimum(idx, len(self._log_pi) - 1)
        return idx.astype(float)[:, None]

    def log_q_ratio(self, x: np.ndarray, y: np.ndarray) -> float:
        i, j = self.index(x), self.index(y)
        return float(self._log_q[j, i] - self._log_q[i, j])

    def log_w_batch(self, x: np.ndarray, ys: np.ndarray, logpi_x: float | None = None) -> np.ndarray:
        i = self.index(x)
        js = np.asarray(ys, dtype=float).reshape(-1).astype(int)
        return self._log_w[i, js]

    def log_w_reverse(self, x: np.ndarray, y: np.ndarray, lw_forward: float) -> float:
        return float(self._log_w[self.index(y), self.index(x)])

    def log_qw(self, x: np.ndarray) -> float:
        return float(self._log_qw[self.index(x)])

    def sample_qw(self, gen: Generator, x: np.ndarray) -> np.ndarray:
        u = gen.random()
        idx = int(np.searchsorted(self._qw_cdf[self.index(x)], u, side="right"))
        return self.state(min(idx, len(self._log_pi) - 1))

    def sample_pi(self, gen: Generator) -> np.ndarray:
        u = gen.random()
        idx = int(np.searchsorted(self._pi_cdf, u, side="right"))
        return self.state(min(idx, len(self._log_pi) - 1))

    def log_qw_tilde_exact(self, x: np.ndarray, y: np.ndarray) -> float:
        if self._log_qw_tilde is None:
            self._log_qw_tilde = np.log(qw_tilde(self.chain))
        return float(self._log_qw_tilde[self.index(x), self.index(y)])
