"""Numba/numpy backend selection for the hot kernels.

The chain-stepping and subset-enumeration kernels exist twice: a numba
``@njit`` version and a pure-numpy version. The active default is chosen
once at import time from the ``MTMLAB_BACKEND`` environment variable
(``"numba"`` or ``"numpy"``); unset means numba when importable. All
entry points that dispatch on the backend also accept an explicit
``backend=`` argument so tests and benchmarks can pin either path.
"""

from __future__ import annotations

import os

NUMBA = "numba"
NUMPY = "numpy"

_env = os.environ.get("MTMLAB_BACKEND", "").strip().lower()
if _env and _env not in (NUMBA, NUMPY):
    raise ValueError(f"MTMLAB_BACKEND must be 'numba' or 'numpy', got {_env!r}")


def _numba_importable() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


if _env == NUMPY:
    _default = NUMPY
elif _env == NUMBA:
    if not _numba_importable():
        raise ImportError("MTMLAB_BACKEND=numba but numba is not importable")
    _default = NUMBA
else:
    _default = NUMBA if _numba_importable() else NUMPY


def default_backend() -> str:
    return _default


def resolve_backend(backend: str | None) -> str:
    """Validate an explicit backend choice, falling back to the default."""
    if backend is None:
        return _default
    if backend not in (NUMBA, NUMPY):
        raise ValueError(f"backend must be 'numba' or 'numpy', got {backend!r}")
    if backend == NUMBA and not _numba_importable():
        raise ImportError("numba backend requested but numba is not importable")
    return backend
