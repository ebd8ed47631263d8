"""Quadratic-coefficient kernel ``Omega`` and the variational lower bound.

``Omega[i, k] = sum_{j != i} sum_l xi[j, l] * log pi_kl(g_ij, chi_ij)``.

The sparse route never touches a dense ``n x n`` object. Treating every
dyad as a non-link with no covariate match gives the baseline
``A0 @ Pi0.T`` with ``A0[i, l] = tau[l] - xi[i, l]`` and ``tau`` the column
sums of ``xi``. The true configuration of each dyad is then restored by
adding, for every sparse layer ``M`` in ``SparseLayers``,
``M @ xi @ D.T``, where ``D`` is the inclusion-exclusion (Moebius) sum of
log-probability tables belonging to that layer.
"""
import warnings

import numpy as np

from .. import kernels
from ..errors import CapacityError
from .layers import SparseLayers, popcount, subsets

NAIVE_MAX_N = 2000


class ClampWarning(RuntimeWarning):
    """A link probability of exactly 0 or 1 was clamped before taking logs."""


def moebius_tables(logpi):
    """Per-layer coefficient tables.

    Returns ``(C0, C1)`` with ``C0[T] = sum_{S <= T} (-1)^|T-S| log pi(0, S)``
    for the ``X[T]`` layers (``C0[0]`` is the baseline ``Pi0``) and
    ``C1[T] = sum_{S <= T} (-1)^|T-S| (log pi(1, S) - log pi(0, S))`` for the
    ``G o X[T]`` layers.
    """
    L0, L1 = logpi[0], logpi[1]
    C = L0.shape[0]
    C0 = np.zeros_like(L0)
    C1 = np.zeros_like(L0)
    for T in range(C):
        for S in subsets(T):
            sign = -1.0 if popcount(T ^ S) % 2 else 1.0
            C0[T] += sign * L0[S]
            C1[T] += sign * (L1[S] - L0[S])
    return C0, C1


def omega(g, x, state, layers=None):
    """Sparse-product evaluation of ``Omega`` (``n x K``)."""
    if layers is None:
        layers = SparseLayers(g, x)
    xi = state.xi
    C0, C1 = moebius_tables(state.log_pi())
    A0 = xi.sum(axis=0)[None, :] - xi
    out = A0 @ C0[0].T
    for T, XT in layers.X.items():
        if XT.nnz:
            out += (XT @ xi) @ C0[T].T
    for T, GT in layers.GX.items():
        if GT.nnz:
            out += (GT @ xi) @ C1[T].T
    return out


def omega_naive(g, x, state, layers=None):
    """Direct nested-loop ``Omega``. Test and benchmark oracle, ``n <= 2000``."""
    if g.n > NAIVE_MAX_N:
        raise CapacityError(f"omega_naive is limited to n <= {NAIVE_MAX_N}, got n={g.n}")
    if layers is None:
        layers = SparseLayers(g, x)
    adj = g.to_dense().astype(np.int64)
    codes = layers.dense_codes()
    return kernels.omega_naive_loops(np.ascontiguousarray(state.xi), adj, codes,
                                     np.ascontiguousarray(state.log_pi()))


def entropy_term(xi, eta):
    """``sum_ik xi_ik (log eta_k - log xi_ik)`` with ``0 log 0 = 0``."""
    pos = xi > 0
    logxi = np.zeros_like(xi)
    logxi[pos] = np.log(xi[pos])
    with np.errstate(divide="ignore"):
        logeta = np.log(eta)
    return float(np.where(pos, xi * (logeta[None, :] - logxi), 0.0).sum())


def lower_bound(g, x, state, layers=None, omega_matrix=None, warn=True):
    """Variational lower bound.

    With ``pi`` symmetric in ``(k, l)`` the pair sum over ``i < j`` equals
    half of ``sum_ik xi_ik Omega_ik``.
    """
    if warn and state.clamped_cells():
        warnings.warn(f"{state.clamped_cells()} link probabilities at 0 or 1 were clamped",
                      ClampWarning, stacklevel=2)
    if omega_matrix is None:
        omega_matrix = omega(g, x, state, layers)
    return 0.5 * float((state.xi * omega_matrix).sum()) + entropy_term(state.xi, state.eta)
