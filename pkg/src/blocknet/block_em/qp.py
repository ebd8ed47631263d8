"""Concave quadratic programs over the probability simplex.

Each row solves ``max sum_k a_k x_k**2 + b_k x_k`` subject to ``x >= 0`` and
``sum x = 1`` with every ``a_k < 0``. Stationarity gives
``x_k(lam) = max(0, (b_k - lam) / (-2 a_k))``; bisection on the multiplier
``lam`` brackets the active set, which then fixes ``lam`` in closed form.
"""
import numpy as np

from .. import kernels


def _check(a):
    if not np.all(np.asarray(a) < 0):
        raise ValueError("qp_simplex needs strictly negative quadratic coefficients")


def qp_simplex(a, b):
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    _check(a)
    return kernels.qp_simplex_rows(a[None, :], b[None, :])[0]


def qp_simplex_rows(A, B):
    A = np.ascontiguousarray(A, dtype=float)
    B = np.ascontiguousarray(B, dtype=float)
    _check(A)
    return kernels.qp_simplex_rows(A, B)


def kkt_residual(a, b, x):
    """Largest violation of the KKT conditions at ``x``."""
    a, b, x = (np.asarray(v, dtype=float) for v in (a, b, x))
    grad = 2 * a * x + b
    active = x > 0
    lam = grad[active].mean()
    res = [abs(x.sum() - 1.0), max(0.0, -x.min())]
    res.append(np.abs(grad[active] - lam).max())
    if (~active).any():
        res.append(max(0.0, (grad[~active] - lam).max()))
    return float(max(res))
