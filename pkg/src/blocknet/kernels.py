"""Hot kernels, dispatched to numba or numpy according to ``_accel.USE_NUMBA``.

Both implementations stay importable (``numpy_kernels`` always,
``numba_kernels`` when numba is installed) so tests and the benchmark can
run them side by side.
"""
from . import _accel
from . import _kernels_numpy as numpy_kernels

try:
    from . import _kernels_numba as numba_kernels
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_kernels = None

_impl = numba_kernels if _accel.USE_NUMBA else numpy_kernels

common_neighbor_counts = _impl.common_neighbor_counts
qp_simplex_rows = _impl.qp_simplex_rows
omega_naive_loops = _impl.omega_naive_loops
gibbs_chain = _impl.gibbs_chain

BACKEND = _accel.backend_name()

__all__ = [
    "BACKEND",
    "common_neighbor_counts",
    "gibbs_chain",
    "numba_kernels",
    "numpy_kernels",
    "omega_naive_loops",
    "qp_simplex_rows",
]
