"""Kernel backend selection.

The compiled extension is used when it was built; otherwise, or when
``FASTPAM_BACKEND=python`` is set, the pure-Python twin is used. Both expose
the same functions with identical results.
"""

import os

from . import _pykernels

KERNEL_NAMES = (
    "td",
    "assign",
    "update_cache",
    "swap_delta",
    "pam_scan",
    "reynolds_scan",
    "fastpam1_scan",
    "fastpam2_scan",
    "build",
)


def _load_compiled():
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()

if _compiled is not None and os.environ.get("FASTPAM_BACKEND", "").lower() != "python":
    backend = _compiled
    BACKEND = "cython"
else:
    backend = _pykernels
    BACKEND = "python"


def available_backends():
    """Names of importable backends, compiled first."""
    return (["cython"] if _compiled is not None else []) + ["python"]


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name is None:
        return backend
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
