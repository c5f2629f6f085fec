"""Kernel backend selection.

The compiled ``_core`` extension is used when it imports; otherwise the
numpy implementations in ``_core_py`` are used. Set ``QTGRAD_PURE_PYTHON=1``
to force the fallback.
"""

import os

from . import _core_py

_python = _core_py
_compiled = None

if os.environ.get("QTGRAD_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _compiled
    except ImportError:
        _compiled = None

_active = _compiled if _compiled is not None else _python
BACKEND = "cython" if _compiled is not None else "python"

laplacian_matvec = _active.laplacian_matvec
slb_project = _active.slb_project
slb_feasible_range = _active.slb_feasible_range
ybar = _active.ybar


def available_backends():
    """Names of the importable kernel backends."""
    names = ["python"]
    if _compiled is not None:
        names.append("cython")
    return names


def get_backend(name):
    """Return the kernel module for ``name`` ("python" or "cython")."""
    if name == "python":
        return _python
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
