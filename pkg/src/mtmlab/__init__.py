"""mtmlab: a Multiple-try Metropolis laboratory.

Samplers for the MH / ideal / semi-ideal / multiple-try / lazy kernels,
closed-form Gaussian-case analytics for every comparison bound, and an
exact finite-state oracle that verifies the comparison inequalities
numerically.
"""

from .backend import default_backend
from .model import (
    RwProposal,
    TargetModel,
    WeightSpec,
    log_importance_weight,
    log_qw_normalizer,
    log_weight,
    sample_qw_ideal,
    sample_rw,
    standard_gaussian,
)
from .oracle import FiniteChainSpec, TransitionMatrix
from .samplers import ChainTrace, FiniteKernelSpec, KernelSpec, StepRecord, run_chain

__version__ = "0.1.0"

__all__ = [
    "ChainTrace",
    "FiniteChainSpec",
    "FiniteKernelSpec",
    "KernelSpec",
    "RwProposal",
    "StepRecord",
    "TargetModel",
    "TransitionMatrix",
    "WeightSpec",
    "default_backend",
    "log_importance_weight",
    "log_qw_normalizer",
    "log_weight",
    "run_chain",
    "sample_qw_ideal",
    "sample_rw",
    "standard_gaussian",
    "__version__",
]
