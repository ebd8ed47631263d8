"""Sparse undirected graphs, discrete node covariates and feature adjacency matrices."""
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import DataError, SparsityBudgetError


def _readonly(a):
    a.setflags(write=False)
    return a


class Graph:
    """Immutable simple undirected graph on nodes ``0..n-1``.

    Stored as a symmetric CSR structure with sorted neighbour lists, which
    serves both intersection-based counting and sparse matrix products.
    Build instances with :meth:`from_edge_list`.
    """

    def __init__(self, n, indptr, indices):
        self.n = int(n)
        self.indptr = _readonly(np.asarray(indptr, dtype=np.int64))
        self.indices = _readonly(np.asarray(indices, dtype=np.int64))

    @classmethod
    def from_edge_list(cls, pairs, n):
        """Canonical graph from node-id pairs; duplicates collapse and self-loops drop."""
        n = int(n)
        if n < 0:
            raise DataError(f"node count must be non-negative, got {n}")
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            bad = (pairs < 0) | (pairs >= n)
            if bad.any():
                row = int(np.flatnonzero(bad.any(axis=1))[0])
                raise DataError(f"edge {tuple(pairs[row])} has a node id outside [0, {n})")
        a, b = pairs[:, 0], pairs[:, 1]
        keep = a != b
        lo = np.minimum(a, b)[keep]
        hi = np.maximum(a, b)[keep]
        key = np.unique(lo * n + hi)
        lo, hi = key // n, key % n
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst)

    @classmethod
    def empty(cls, n):
        return cls.from_edge_list(np.zeros((0, 2), dtype=np.int64), n)

    @classmethod
    def from_dense(cls, adj):
        adj = np.asarray(adj)
        i, j = np.nonzero(np.triu(adj, 1))
        return cls.from_edge_list(np.column_stack([i, j]), adj.shape[0])

    @property
    def m(self):
        return self.indices.shape[0] // 2

    def degrees(self):
        return np.diff(self.indptr)

    def neighbors(self, i):
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def has_edge(self, i, j):
        nb = self.neighbors(i)
        pos = np.searchsorted(nb, j)
        return bool(pos < nb.shape[0] and nb[pos] == j)

    @cached_property
    def edges(self):
        """``(m, 2)`` array of edges with ``i < j``, sorted lexicographically."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        keep = src < self.indices
        return _readonly(np.column_stack([src[keep], self.indices[keep]]))

    @cached_property
    def adjacency(self):
        """Symmetric ``scipy.sparse`` CSR view with float64 unit weights."""
        data = np.ones(self.indices.shape[0])
        A = sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))
        A.has_sorted_indices = True
        return A

    def to_dense(self):
        adj = np.zeros((self.n, self.n), dtype=np.uint8)
        e = self.edges
        adj[e[:, 0], e[:, 1]] = 1
        adj[e[:, 1], e[:, 0]] = 1
        return adj

    def subgraph_edges(self, mask):
        """Edges whose two endpoints both satisfy the boolean node ``mask``."""
        e = self.edges
        return e[mask[e[:, 0]] & mask[e[:, 1]]]

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    density: float
    degree_histogram: np.ndarray
    two_stars: int
    triangles: int


def two_star_count(degrees):
    d = np.asarray(degrees, dtype=np.int64)
    return int((d * (d - 1) // 2).sum())


def triangle_count(g, labels=None):
    """Number of 3-cliques; with ``labels``, only cliques whose nodes share one label."""
    e = g.edges
    if e.shape[0] == 0:
        return 0
    restrict = labels is not None
    lab = np.zeros(g.n, dtype=np.int64) if labels is None else np.asarray(labels, dtype=np.int64)
    cn = kernels.common_neighbor_counts(g.indptr, g.indices, e[:, 0].copy(), e[:, 1].copy(), lab, restrict)
    return int(cn.sum()) // 3


def graph_stats(g):
    pairs = g.n * (g.n - 1) / 2
    deg = g.degrees()
    return GraphStats(
        n=g.n,
        m=g.m,
        density=g.m / pairs if pairs > 0 else 0.0,
        degree_histogram=np.bincount(deg, minlength=1),
        two_stars=two_star_count(deg),
        triangles=triangle_count(g),
    )


def density(n, m):
    return m / (n * (n - 1) / 2)


def common_neighbors(g, i, j, z=None, k=None):
    """``|N(i) & N(j)|``, optionally counting only neighbours with ``z[r] == k``."""
    if i == j:
        raise ValueError("common_neighbors needs two distinct nodes")
    shared = np.intersect1d(g.neighbors(i), g.neighbors(j), assume_unique=True)
    if z is not None:
        shared = shared[np.asarray(z)[shared] == k]
    return int(shared.shape[0])


@dataclass(frozen=True)
class FeatureAdjacency:
    """Sparse 0/1 matrix marking distinct nodes that share covariate ``index``."""

    index: int
    name: str
    matrix: sp.csr_matrix

    @property
    def nnz(self):
        return self.matrix.nnz


class CovariateSet:
    """Discrete node covariates stored as integer category codes.

    Parameters
    ----------
    names : list of str
    codes : (n, p) int array
        Category identifiers; only equality between codes matters.
    categories : list of arrays, optional
        Original category labels per covariate, for reporting.
    """

    def __init__(self, names, codes, categories=None):
        codes = np.array(codes, dtype=np.int64)
        if codes.ndim == 1:
            codes = codes[:, None]
        if codes.shape[1] != len(names):
            raise DataError(f"{len(names)} covariate names for {codes.shape[1]} columns")
        if codes.size and codes.min() < 0:
            raise DataError("covariate values must be present for every node")
        self.names = list(names)
        self.codes = _readonly(codes)
        self.categories = categories
        self._cache = {}

    @classmethod
    def from_columns(cls, columns, min_category_size=None):
        """Factorize raw per-node values into codes.

        ``min_category_size`` pools every category smaller than the given
        count into one shared category; off by default.
        """
        names = list(columns)
        if not names:
            return cls.empty(0)
        codes, cats = [], []
        for name in names:
            values = np.asarray(columns[name])
            missing = [k for k, v in enumerate(values) if v is None or (isinstance(v, str) and v == "")]
            if missing:
                raise DataError(f"covariate {name!r} is missing for node row {missing[0]}")
            uniq, inv, counts = np.unique(values, return_inverse=True, return_counts=True)
            if min_category_size and min_category_size > 1:
                rare = counts < min_category_size
                if rare.sum() > 1:
                    keep_ids = np.cumsum(~rare) - 1
                    pooled = int((~rare).sum())
                    inv = np.where(rare[inv], pooled, keep_ids[inv])
                    uniq = np.append(uniq[~rare], "<pooled>")
            codes.append(inv)
            cats.append(uniq)
        return cls(names, np.column_stack(codes), cats)

    @classmethod
    def empty(cls, n):
        return cls([], np.zeros((n, 0), dtype=np.int64), [])

    @property
    def n(self):
        return self.codes.shape[0]

    @property
    def p(self):
        return self.codes.shape[1]

    def index_of(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown covariate {name!r}; have {self.names}") from None

    def select(self, names):
        idx = [self.index_of(nm) for nm in names]
        cats = [self.categories[k] for k in idx] if self.categories is not None else None
        return CovariateSet([self.names[k] for k in idx], self.codes[:, idx], cats)

    def same(self, i, j):
        """Vector of equality indicators ``1{x_is == x_js}`` over covariates."""
        return (self.codes[i] == self.codes[j]).astype(np.int64)

    def pair_count(self, s):
        """Non-zeros of the feature adjacency of covariate ``s``: sum of c(c-1)."""
        c = np.bincount(self.codes[:, s]).astype(np.int64)
        return int((c * (c - 1)).sum())

    def inverted_index(self, s):
        """Map category code -> sorted node array, for categories with >= 2 nodes."""
        col = self.codes[:, s]
        order = np.argsort(col, kind="stable")
        bounds = np.flatnonzero(np.diff(col[order])) + 1
        groups = np.split(order, bounds)
        return {int(col[grp[0]]): grp for grp in groups if grp.shape[0] > 1}

    def feature_adjacency(self, s, max_nnz=None):
        """Build (and cache) the feature adjacency matrix of covariate ``s``."""
        if not 0 <= s < self.p:
            raise IndexError(f"covariate index {s} out of range for p={self.p}")
        if s in self._cache:
            fa = self._cache[s]
            if max_nnz is not None and fa.nnz > max_nnz:
                raise SparsityBudgetError(self.names[s], fa.nnz, max_nnz)
            return fa
        nnz = self.pair_count(s)
        if max_nnz is not None and nnz > max_nnz:
            raise SparsityBudgetError(self.names[s], nnz, max_nnz)
        rows, cols = [], []
        for grp in self.inverted_index(s).values():
            c = grp.shape[0]
            r = np.repeat(grp, c)
            q = np.tile(grp, c)
            off = r != q
            rows.append(r[off])
            cols.append(q[off])
        if rows:
            rows = np.concatenate(rows)
            cols = np.concatenate(cols)
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
        M = sp.csr_matrix((np.ones(rows.shape[0]), (rows, cols)), shape=(self.n, self.n))
        M.sort_indices()
        fa = FeatureAdjacency(s, self.names[s], M)
        self._cache[s] = fa
        return fa

    def __repr__(self):
        return f"CovariateSet(n={self.n}, names={self.names})"


def feature_adjacency(c, s, max_nnz=None):
    return c.feature_adjacency(s, max_nnz=max_nnz)


def as_codes(x, n):
    """Normalize ``None`` / CovariateSet / array covariates to an ``(n, p)`` code array."""
    if x is None:
        return np.zeros((n, 0), dtype=np.int64)
    if isinstance(x, CovariateSet):
        return x.codes
    codes = np.asarray(x, dtype=np.int64)
    return codes[:, None] if codes.ndim == 1 else codes
