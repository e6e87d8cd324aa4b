"""Kernel backend selection.

The compiled extension is used when importable.  Set
``MMFNOISE_BACKEND=python`` to force the numpy fallback.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_KERNELS = {"python": _pykernels}
if _ckernels is not None:
    _KERNELS["cython"] = _ckernels

if os.environ.get("MMFNOISE_BACKEND", "").lower() == "python" or _ckernels is None:
    BACKEND = "python"
else:
    BACKEND = "cython"


def available():
    return sorted(_KERNELS)


def kernels(name=None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    return _KERNELS[name or BACKEND]
