"""Backend selection for the curve kernels.

The compiled module is used when it was built; ``FAIRALLOC_BACKEND=python``
forces the pure-Python fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("FAIRALLOC_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

tp_at = _impl.tp_at
threshold_at = _impl.threshold_at
capacity_for_tp = _impl.capacity_for_tp
capacity_for_ratio = _impl.capacity_for_ratio
marginal_score = _impl.marginal_score


def available_backends():
    """Map backend name to kernel module for every backend importable here."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
