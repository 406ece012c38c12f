"""Hot kernels with a compiled backend and a numpy fallback.

The compiled module is used when it imports cleanly. Setting the
environment variable ``PROJLAB_PURE_PYTHON=1`` forces the fallback.

Attributes
----------
BACKEND : str
    ``"cython"`` or ``"python"``, whichever was selected.
"""
import os

from . import _pykernels

_force_py = os.environ.get("PROJLAB_PURE_PYTHON", "").strip() not in ("", "0")

try:
    if _force_py:
        raise ImportError("pure-python backend requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

cell_log_kernel = _impl.cell_log_kernel
cell_log_energy = _impl.cell_log_energy
offdiag_log_energy = _impl.offdiag_log_energy
metropolis_sweeps = _impl.metropolis_sweeps


def available_backends():
    """Return a dict mapping backend name to kernel module."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out


__all__ = [
    "BACKEND",
    "available_backends",
    "cell_log_energy",
    "cell_log_kernel",
    "metropolis_sweeps",
    "offdiag_log_energy",
]
