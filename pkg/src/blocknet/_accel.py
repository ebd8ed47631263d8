"""Backend switch for the compiled kernels.

Set ``BLOCKNET_DISABLE_NUMBA=1`` before import to run the pure numpy
versions of every kernel. The switch is read once, at import time.
"""
import os

_FALSY = {"", "0", "false", "no", "off"}


def _numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_REQUESTED = os.environ.get("BLOCKNET_DISABLE_NUMBA", "0").strip().lower() in _FALSY
USE_NUMBA = NUMBA_REQUESTED and _numba_available()


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def set_threads(count):
    """Cap the worker count used by numba, if it is active."""
    if count is None or not USE_NUMBA:
        return
    import numba

    numba.set_num_threads(max(1, min(int(count), numba.config.NUMBA_NUM_THREADS)))
