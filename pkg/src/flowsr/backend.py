"""Kernel backend selection.

The package ships two implementations of its hot kernels: a compiled
Cython extension (flowsr._kernelsc) and a pure-NumPy fallback
(flowsr._kernels_np).  The compiled one is used when importable; set
FLOWSR_BACKEND=python or FLOWSR_BACKEND=compiled to force a choice.
benchmarks/bench_backends.py compares the two.
"""

import os

from flowsr import _kernels_np
from flowsr.errors import ConfigurationError

try:
    from flowsr import _kernelsc
except ImportError:
    _kernelsc = None

_BACKENDS = {"python": _kernels_np}
if _kernelsc is not None:
    _BACKENDS["compiled"] = _kernelsc


def get(name):
    """Return a specific backend module by name ('python' or 'compiled')."""
    if name not in _BACKENDS:
        raise ConfigurationError(
            f"backend {name!r} not available; choices: {sorted(_BACKENDS)}"
        )
    return _BACKENDS[name]


def available():
    return sorted(_BACKENDS)


def _select():
    forced = os.environ.get("FLOWSR_BACKEND")
    if forced:
        return get(forced)
    return _BACKENDS.get("compiled", _kernels_np)


kernels = _select()
NAME = kernels.NAME
