"""Sparse dyad layers shared by the Omega kernel and the pi update.

For every subset ``T`` of covariates (a bitmask, bit ``s`` for covariate
``s``) we keep

* ``X[T]``  = Hadamard product of the feature adjacency matrices in ``T``
  (``T != 0``; the empty product would be the dense all-ones matrix ``J``
  and is never formed), and
* ``GX[T]`` = ``G`` Hadamard ``X[T]`` (``GX[0]`` is ``G`` itself).

Any dyad indicator of the form ``Gamma(d) o Lambda_1(chi_1) o ... o
Lambda_p(chi_p)`` expands over these layers by inclusion-exclusion, because
``A o (J - X) = A - A o X``. That gives ``2**(p+1) - 1`` sparse matrices.
"""
import numpy as np

from ..errors import ConfigError
from ..graph import CovariateSet, as_codes

MAX_COVARIATES = 6


def popcount(v):
    return bin(v).count("1")


def subsets(mask):
    """All sub-masks of ``mask``, including ``mask`` and 0."""
    s = mask
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & mask


def supersets(mask, full):
    for t in subsets(full & ~mask):
        yield mask | t


class SparseLayers:
    def __init__(self, g, x=None, max_nnz=None):
        self.g = g
        self.n = g.n
        codes = as_codes(x, g.n)
        self.p = codes.shape[1]
        if self.p > MAX_COVARIATES:
            raise ConfigError(f"at most {MAX_COVARIATES} covariates are supported in block recovery, got {self.p}")
        if isinstance(x, CovariateSet):
            cov = x
        else:
            cov = CovariateSet([f"cov_{s + 1}" for s in range(self.p)], codes)
        self.C = 1 << self.p
        G = g.adjacency
        self.X = {}
        self.GX = {0: G}
        for T in range(1, self.C):
            low = T & -T
            s = low.bit_length() - 1
            base = cov.feature_adjacency(s, max_nnz=max_nnz).matrix
            if T == low:
                XT = base
            else:
                XT = self.X[T ^ low].multiply(base).tocsr()
            XT.eliminate_zeros()
            self.X[T] = XT
            GT = G.multiply(XT).tocsr()
            GT.eliminate_zeros()
            self.GX[T] = GT
        self.codes = codes

    @property
    def nnz_total(self):
        return sum(M.nnz for M in self.X.values()) + sum(M.nnz for M in self.GX.values())

    def dyad_codes(self, rows, cols):
        """Covariate-configuration code ``sum_s 1{x_is == x_js} << s`` of each dyad."""
        same = self.codes[rows] == self.codes[cols]
        return (same * (1 << np.arange(self.p))).sum(axis=1).astype(np.int64)

    def dense_codes(self):
        """``(n, n)`` configuration codes; for small-n oracles only."""
        out = np.zeros((self.n, self.n), dtype=np.int64)
        for s in range(self.p):
            col = self.codes[:, s]
            out |= (col[:, None] == col[None, :]).astype(np.int64) << s
        return out
