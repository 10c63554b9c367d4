"""Kernel backend selection.

The numba backend is used when numba imports cleanly and the environment
variable ``CSAUC_DISABLE_NUMBA`` is unset (or ``0``/``false``). Both backends
expose the same functions; ``BACKEND`` names the active one.
"""

import importlib
import os

from . import _numpy

_disabled = os.environ.get("CSAUC_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


def _load_numba():
    try:
        return importlib.import_module(__name__ + "._numba")
    except ImportError:
        return None


_jit = None if _disabled else _load_numba()
_active = _jit if _jit is not None else _numpy
BACKEND = "numba" if _jit is not None else "numpy"

dp_sweep = _active.dp_sweep
pairwise_samples = _active.pairwise_samples
pairwise_cells = _active.pairwise_cells
auc_sorted = _active.auc_sorted
auc_pairs = _active.auc_pairs


def backends():
    """Mapping of available backend name to kernel module."""
    out = {"numpy": _numpy}
    jit = _jit if _jit is not None else _load_numba()
    if jit is not None:
        out["numba"] = jit
    return out


def get(backend=None):
    """Kernel module for ``backend`` (``"numba"``/``"numpy"``), or the active one."""
    if backend is None:
        return _active
    avail = backends()
    if backend not in avail:
        raise ValueError(f"kernel backend {backend!r} unavailable; have {sorted(avail)}")
    return avail[backend]
