"""Kernel configuration and trace containers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import UnsupportedTargetError
from ..model import RwProposal, TargetModel, WeightSpec
from ..oracle import FiniteChainSpec

MH = "mh"
IDEAL = "ideal"
SEMI_IDEAL = "semi-ideal"
MTM = "mtm"
LAZY_MTM = "lazy-mtm"

KINDS = (MH, IDEAL, SEMI_IDEAL, MTM, LAZY_MTM)

# Log values below this are clamped in the ideal chain's general-theta
# ratio; IEEE doubles underflow to 0 near exp(-745).
LOG_CLAMP = -745.0


@dataclass(frozen=True)
class KernelSpec:
    """Which chain to run on the continuous model."""

    kind: str
    target: TargetModel
    proposal: RwProposal
    weight: WeightSpec
    n_tries: int = 1
    inner_samples: int = 1  # semi-ideal only

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n_tries < 1:
            raise ValueError("n_tries must be >= 1")
        if self.inner_samples < 1:
            raise ValueError("inner_samples must be >= 1")
        if self.target.d != self.proposal.d:
            raise ValueError("target and proposal dimensions disagree")
        if self.kind in (IDEAL, SEMI_IDEAL) and not self.target.is_standard_gaussian:
            raise UnsupportedTargetError(
                f"{self.kind} kernel needs the closed-form Gaussian paths"
            )


@dataclass(frozen=True)
class FiniteKernelSpec:
    """Same chains, embedded on a finite state space.

    States are length-1 float arrays holding the state index, so the
    generic step functions treat them like any other point. With
    ``semi_ideal_exact`` the semi-ideal normalizer is computed by exact
    tuple enumeration instead of the inner-sample estimator.
    """

    kind: str
    chain: FiniteChainSpec
    inner_samples: int = 1
    semi_ideal_exact: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.inner_samples < 1:
            raise ValueError("inner_samples must be >= 1")

    @property
    def n_tries(self) -> int:
        return self.chain.n


@dataclass(frozen=True)
class StepRecord:
    previous: np.ndarray
    proposed: Optional[np.ndarray]
    selected: int  # proposal index I; -1 where selection does not apply
    log_accept: float
    accepted: bool
    n_weight_evals: int
    lazy_hold: bool = False
    clamped: bool = False


@dataclass
class ChainTrace:
    """States plus per-step metadata, stored columnar.

    ``states`` has ``steps + 1`` rows (the start plus one row per recorded
    transition). Acceptance counters aggregate burn-in as well, so the
    acceptance rate reflects the whole run.
    """

    states: np.ndarray
    accepted: np.ndarray
    log_accepts: np.ndarray
    selected: np.ndarray
    n_weight_evals: np.ndarray
    lazy_holds: np.ndarray
    clamped: np.ndarray
    proposed: Optional[np.ndarray]
    seed: int
    chain_id: int
    burnin: int
    total_steps: int
    total_accepts: int
    backend: str

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def acceptance_rate(self) -> float:
        return self.total_accepts / max(self.total_steps, 1)

    @property
    def records(self) -> list[StepRecord]:
        out = []
        for k in range(self.steps):
            out.append(
                StepRecord(
                    previous=self.states[k],
                    proposed=None if self.proposed is None else self.proposed[k],
                    selected=int(self.selected[k]),
                    log_accept=float(self.log_accepts[k]),
                    accepted=bool(self.accepted[k]),
                    n_weight_evals=int(self.n_weight_evals[k]),
                    lazy_hold=bool(self.lazy_holds[k]),
                    clamped=bool(self.clamped[k]),
                )
            )
        return out
