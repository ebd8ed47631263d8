"""Closed-form and MM updates for one EM iteration."""
import warnings

import numpy as np

from .layers import SparseLayers, popcount, supersets
from .omega import omega as omega_sparse
from .qp import qp_simplex_rows
from .state import MinorizerCoeffs, floor_rows

QUAD_FORMS = ("derived", "literal")


class EmptyCellWarning(RuntimeWarning):
    """A (block pair, covariate pattern) cell has no dyad mass."""


def minorizer_coeffs(state, omega_matrix, quad_form="derived"):
    """Coefficients of the per-node surrogate QPs at the current ``xi``.

    ``derived`` uses ``(Omega/2 - 1) / xi``, which makes the surrogate touch
    the lower bound at the current point. ``literal`` uses
    ``(Omega/(2 xi) - 1) / xi`` for comparison.
    """
    xi = state.xi
    if quad_form == "derived":
        quad = (0.5 * omega_matrix - 1.0) / xi
    elif quad_form == "literal":
        quad = (0.5 * omega_matrix / xi - 1.0) / xi
    else:
        raise ValueError(f"quad_form must be one of {QUAD_FORMS}")
    lin = np.log(state.eta)[None, :] - np.log(xi) + 1.0
    return MinorizerCoeffs(quad, lin)


def update_xi(g, x, state, layers=None, omega_matrix=None, quad_form="derived"):
    if omega_matrix is None:
        omega_matrix = omega_sparse(g, x, state, layers)
    coeffs = minorizer_coeffs(state, omega_matrix, quad_form)
    return floor_rows(qp_simplex_rows(coeffs.quad, coeffs.lin))


def update_eta(xi):
    return xi.mean(axis=0)


def _pair_mass(M, xi):
    return xi.T @ (M @ xi)


def update_pi(g, x, xi, layers=None, warn=True):
    """Weighted link frequencies per block pair and covariate pattern.

    Numerators use the sparse ``G o X[T]`` layers; denominators split into
    ``P1 = xi' J xi`` (from column sums only) plus ``P2``, the signed sum of
    sparse ``xi' X[T] xi`` terms. Returns ``(pi1, n_fallback)``.
    """
    if layers is None:
        layers = SparseLayers(g, x)
    C = layers.C
    full = C - 1
    tau = xi.sum(axis=0)
    P1 = np.outer(tau, tau) - xi.T @ xi
    WG = {T: _pair_mass(M, xi) for T, M in layers.GX.items()}
    WX = {T: _pair_mass(M, xi) for T, M in layers.X.items()}
    WX[0] = P1
    K = xi.shape[1]
    num = np.zeros((C, K, K))
    den = np.zeros((C, K, K))
    for S in range(C):
        for T in supersets(S, full):
            sign = -1.0 if popcount(T ^ S) % 2 else 1.0
            num[S] += sign * WG[T]
            den[S] += sign * WX[T]
    pairs = g.n * (g.n - 1) / 2
    fallback = g.m / pairs if pairs else 0.0
    empty = den <= 1e-9 * np.maximum(P1, 0.0)[None, :, :] + 1e-300
    pi1 = np.divide(num, den, out=np.full_like(num, fallback), where=~empty)
    n_empty = int(empty.sum())
    if warn and n_empty:
        warnings.warn(f"{n_empty} link-probability cells had no dyad mass; set to the global density",
                      EmptyCellWarning, stacklevel=2)
    return np.clip(pi1, 0.0, 1.0), n_empty
