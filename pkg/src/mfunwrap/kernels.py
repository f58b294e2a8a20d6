"""Backend selection for the sweep kernel.

The compiled Cython kernel is used when it was built; otherwise the
pure-Python implementation takes over. :func:`use_backend` switches
explicitly, mainly for tests and benchmarks.
"""
import numpy as np

from . import _sweep_py

try:
    from . import _sweep as _sweep_c
except ImportError:  # extension not built
    _sweep_c = None

_BACKENDS = {"python": _sweep_py.sweep_inplace}
if _sweep_c is not None:
    _BACKENDS["cython"] = _sweep_c.sweep_inplace

BACKEND = "cython" if _sweep_c is not None else "python"


def available_backends():
    return sorted(_BACKENDS)


def use_backend(name):
    """Select ``"cython"`` or ``"python"``; returns the previous backend name."""
    global BACKEND
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    previous, BACKEND = BACKEND, name
    return previous


def sweep_inplace(dx, dy, alpha, beta, inv_temp, data_weight, order, backend=None):
    fn = _BACKENDS[backend or BACKEND]
    fn(
        np.ascontiguousarray(dx, dtype=np.float64),
        np.ascontiguousarray(dy, dtype=np.float64),
        alpha,
        beta,
        float(inv_temp),
        float(data_weight),
        np.ascontiguousarray(order, dtype=np.int_),
    )
