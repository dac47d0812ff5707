"""Hot loops with a compiled backend and a pure-Python fallback.

The compiled module is used when it was built and ``TABLEMOVES_PURE_PYTHON``
is not set to a true value. ``BACKEND`` records the choice.
"""
import os

from . import _pykernels

_force_python = os.environ.get("TABLEMOVES_PURE_PYTHON", "").lower() in {"1", "true", "yes"}

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

if _ckernels is not None and not _force_python:
    sa_chain = _ckernels.sa_chain
    negative_cycle = _ckernels.negative_cycle
    BACKEND = "cython"
else:
    sa_chain = _pykernels.sa_chain
    negative_cycle = _pykernels.negative_cycle
    BACKEND = "python"


def backends():
    """Map backend name to kernel module for every available backend."""
    out = {"python": _pykernels}
    if _ckernels is not None:
        out["cython"] = _ckernels
    return out


__all__ = ["BACKEND", "backends", "negative_cycle", "sa_chain"]
