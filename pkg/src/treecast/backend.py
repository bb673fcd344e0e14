"""Kernel backend selection.

The compiled extension (`treecast._accel`) is preferred when built; the
numpy reference (`treecast._reference`) is the fallback.  Set the
environment variable TREECAST_KERNEL to ``python`` or ``cython`` to force a
choice at import time.  ``benchmarks/bench_kernels.py`` compares the two.
"""
from __future__ import annotations

import os

from . import _reference
from ._reference import (  # shared constants
    CHAIN_RANGE,
    CHAIN_RELAY,
    KIND_CONSTANT,
    KIND_PARETO,
    KIND_TABLE,
    KIND_ZETA,
)

_FORCED = os.environ.get("TREECAST_KERNEL", "").strip().lower()

_impl = None
_name = "numpy"
if _FORCED not in ("py", "python", "numpy"):
    try:
        from . import _accel as _impl  # type: ignore[no-redef]

        _name = "cython"
    except ImportError:
        if _FORCED in ("c", "cy", "cython", "compiled"):
            raise ImportError(
                "TREECAST_KERNEL requested the compiled backend but "
                "treecast._accel is not built"
            ) from None
if _impl is None:
    _impl = _reference


def backend_name() -> str:
    return _name


def implementations() -> dict:
    """Available kernel modules keyed by name, for tests and benchmarks."""
    impls = {"numpy": _reference}
    try:
        from . import _accel

        impls["cython"] = _accel
    except ImportError:
        pass
    return impls


raw64 = _impl.raw64
uniforms = _impl.uniforms
sample = _impl.sample
splitting_rep = _impl.splitting_rep
tree_level = _impl.tree_level
brw_level = _impl.brw_level

__all__ = [
    "CHAIN_RANGE",
    "CHAIN_RELAY",
    "KIND_CONSTANT",
    "KIND_PARETO",
    "KIND_TABLE",
    "KIND_ZETA",
    "backend_name",
    "implementations",
    "raw64",
    "uniforms",
    "sample",
    "splitting_rep",
    "tree_level",
    "brw_level",
]
