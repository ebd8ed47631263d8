"""Both kernel backends must give identical results."""
import numpy as np
import pytest
from conftest import random_graph

from blocknet import kernels

nb = kernels.numba_kernels
npk = kernels.numpy_kernels

pytestmark = pytest.mark.skipif(nb is None, reason="numba not installed")


def test_common_neighbors_agree(rng):
    g = random_graph(rng, 60, 0.2)
    labels = rng.integers(0, 3, 60)
    rows, cols = np.triu_indices(60, 1)
    rows, cols = rows.astype(np.int64), cols.astype(np.int64)
    for restrict in (False, True):
        a = nb.common_neighbor_counts(g.indptr, g.indices, rows, cols, labels, restrict)
        b = npk.common_neighbor_counts(g.indptr, g.indices, rows, cols, labels, restrict)
        assert np.array_equal(a, b)
    dense = g.to_dense().astype(int)
    plain = nb.common_neighbor_counts(g.indptr, g.indices, rows, cols, labels, False)
    assert np.array_equal(plain, (dense @ dense)[rows, cols])


def test_qp_agree(rng):
    A = -rng.uniform(0.1, 5, (200, 6))
    B = rng.normal(0, 3, (200, 6))
    assert np.allclose(nb.qp_simplex_rows(A, B), npk.qp_simplex_rows(A, B), atol=1e-12)


def test_omega_naive_agree(rng):
    n, K = 25, 3
    g = random_graph(rng, n, 0.3)
    xi = rng.dirichlet(np.ones(K), n)
    codes = rng.integers(0, 4, (n, n))
    codes = np.triu(codes, 1) + np.triu(codes, 1).T
    logpi = np.log(rng.uniform(0.05, 0.95, (2, 4, K, K)))
    a = nb.omega_naive_loops(xi, g.to_dense().astype(np.int64), codes, logpi)
    b = npk.omega_naive_loops(xi, g.to_dense().astype(np.int64), codes, logpi)
    assert np.allclose(a, b, atol=1e-12)


def _chain(mod, seed):
    rng = np.random.default_rng(seed)
    n, steps = 12, 20_000
    z = rng.integers(0, 2, n).astype(np.int64)
    codes = rng.integers(0, 2, (n, 1)).astype(np.int64)
    order = np.argsort(z, kind="stable").astype(np.int64)
    ptr = np.concatenate([[0], np.cumsum(np.bincount(z, minlength=2))]).astype(np.int64)
    adj = np.zeros((n, n), dtype=np.uint8)
    deg = np.zeros(n, dtype=np.int64)
    counts = np.zeros(3, dtype=np.int64)
    i = rng.integers(0, n, steps)
    j = rng.integers(0, n - 1, steps)
    j = (j + (j >= i)).astype(np.int64)
    u = rng.random(steps)
    trace = np.zeros((steps // 500 + 1, 4), dtype=np.int64)
    rows, _ = mod.gibbs_chain(adj, z, codes, -0.3, -1.0, np.array([0.4]), np.array([0.2]), 0.1, 0.1,
                              ptr, order, deg, counts, np.int64(0), i.astype(np.int64), j, u,
                              np.int64(0), np.int64(0), np.int64(500), trace, np.zeros(0, dtype=np.int64), False)
    return adj, trace[:rows], counts


def test_gibbs_chain_bit_identical():
    a = _chain(nb, 4)
    b = _chain(npk, 4)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
