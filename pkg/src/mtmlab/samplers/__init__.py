from .chain import run_chain
from .models import FiniteKernelModel, GaussianKernelModel
from .steps import (
    StepStreams,
    model_for,
    resample_proposal,
    step_ideal,
    step_lazy,
    step_mh,
    step_mtm,
    step_semi_ideal,
    step_streams,
)
from .types import (
    IDEAL,
    KINDS,
    LAZY_MTM,
    MH,
    MTM,
    SEMI_IDEAL,
    ChainTrace,
    FiniteKernelSpec,
    KernelSpec,
    StepRecord,
)

__all__ = [
    "ChainTrace",
    "FiniteKernelModel",
    "FiniteKernelSpec",
    "GaussianKernelModel",
    "IDEAL",
    "KINDS",
    "KernelSpec",
    "LAZY_MTM",
    "MH",
    "MTM",
    "SEMI_IDEAL",
    "StepRecord",
    "StepStreams",
    "model_for",
    "resample_proposal",
    "run_chain",
    "step_ideal",
    "step_lazy",
    "step_mh",
    "step_mtm",
    "step_semi_ideal",
    "step_streams",
]
