"""Kernel backend selection.

The compiled kernel is used when importable, unless the environment
variable ``PPURSUIT_BACKEND=python`` forces the numpy fallback.
"""

import os

import numpy as np

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

AVAILABLE = {"python": _pykernels.comoment_batch}
if _compiled is not None:
    AVAILABLE["compiled"] = _compiled.comoment_batch

_default = "compiled" if _compiled is not None else "python"
if os.environ.get("PPURSUIT_BACKEND", "").lower() == "python":
    _default = "python"

_active = _default


def active() -> str:
    return _active


def use(name: str) -> str:
    """Switch the process-wide kernel; returns the previous backend name."""
    global _active
    if name not in AVAILABLE:
        raise ValueError(f"backend {name!r} not available (have {sorted(AVAILABLE)})")
    prev, _active = _active, name
    return prev


def comoment_batch(S, vc, sdv, eu, ev, w, scaled, k, backend=None):
    fn = AVAILABLE[backend or _active]
    return fn(
        np.ascontiguousarray(S, dtype=np.float64),
        None if vc is None else np.ascontiguousarray(vc, dtype=np.float64),
        float(sdv),
        np.ascontiguousarray(eu, dtype=np.int_),
        np.ascontiguousarray(ev, dtype=np.int_),
        np.ascontiguousarray(w, dtype=np.float64),
        bool(scaled),
        int(k),
    )
