"""Payoffs, potential function, change statistics and the exact stationary law.

Internally the potential is the ordered double sum over ``(i, j)``, so an
edge contributes ``u_ij + u_ji = 2 u_ij``. Reported coefficients use the
unordered sufficient-statistic convention::

    edges = 2 * alpha    two_stars = psi    triangles = 4 * gamma    same_<cov> = 2 * beta
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logsumexp

from .errors import CapacityError, DataError
from .graph import Graph, as_codes, triangle_count, two_star_count


@dataclass(frozen=True)
class ModelParams:
    alpha_w: float
    alpha_b: float
    beta_w: np.ndarray = field(default_factory=lambda: np.zeros(0))
    beta_b: np.ndarray = field(default_factory=lambda: np.zeros(0))
    psi: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        bw = np.atleast_1d(np.asarray(self.beta_w, dtype=float))
        bb = np.atleast_1d(np.asarray(self.beta_b, dtype=float))
        if bw.shape != bb.shape:
            raise ValueError(f"beta_w has {bw.size} entries but beta_b has {bb.size}")
        object.__setattr__(self, "beta_w", bw)
        object.__setattr__(self, "beta_b", bb)
        for name in ("alpha_w", "alpha_b", "psi", "gamma"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def P(self):
        return self.beta_w.shape[0]

    def to_unordered(self, names=None):
        """Flat dict in the unordered convention, keyed ``within_*`` / ``between_*``."""
        names = self._names(names)
        out = {
            "within_edges": 2 * self.alpha_w,
            "within_two_stars": self.psi,
            "within_triangles": 4 * self.gamma,
        }
        out.update({f"within_same_{nm}": 2 * b for nm, b in zip(names, self.beta_w)})
        out["between_edges"] = 2 * self.alpha_b
        out.update({f"between_same_{nm}": 2 * b for nm, b in zip(names, self.beta_b)})
        return {k: float(v) for k, v in out.items()}

    @classmethod
    def from_unordered(cls, coefs, names=None):
        if names is None:
            names = [k[len("within_same_"):] for k in coefs if k.startswith("within_same_")]
        try:
            return cls(
                alpha_w=coefs["within_edges"] / 2,
                alpha_b=coefs["between_edges"] / 2,
                beta_w=[coefs[f"within_same_{nm}"] / 2 for nm in names],
                beta_b=[coefs[f"between_same_{nm}"] / 2 for nm in names],
                psi=coefs.get("within_two_stars", 0.0),
                gamma=coefs.get("within_triangles", 0.0) / 4,
            )
        except KeyError as exc:
            raise DataError(f"parameter JSON lacks key {exc.args[0]!r}") from None

    def _names(self, names):
        if names is None:
            return [f"cov_{k + 1}" for k in range(self.P)]
        if len(names) != self.P:
            raise ValueError(f"{len(names)} covariate names for P={self.P}")
        return list(names)


@dataclass(frozen=True)
class BlockAssignment:
    """Hard block labels ``z`` with values in ``[0, K)``."""

    z: np.ndarray
    K: int

    def __post_init__(self):
        z = np.array(self.z, dtype=np.int64)
        if z.ndim != 1:
            raise ValueError("block labels must be one-dimensional")
        if z.size and (z.min() < 0 or z.max() >= self.K):
            raise ValueError(f"block labels must lie in [0, {self.K})")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "K", int(self.K))

    @classmethod
    def from_labels(cls, labels):
        """Relabel arbitrary labels to ``0..K-1`` in order of first sorted value."""
        uniq, inv = np.unique(np.asarray(labels), return_inverse=True)
        return cls(inv.ravel(), max(len(uniq), 1))

    @property
    def n(self):
        return self.z.shape[0]

    def sizes(self):
        return np.bincount(self.z, minlength=self.K)

    def one_hot(self):
        out = np.zeros((self.n, self.K))
        out[np.arange(self.n), self.z] = 1.0
        return out


def _labels(z):
    return z.z if isinstance(z, BlockAssignment) else np.asarray(z, dtype=np.int64)


@dataclass(frozen=True)
class ChangeStats:
    edge_pair_utility: float
    two_star_count: int
    triangle_count: int
    same_cov: np.ndarray


def direct_utility(params, x_i, x_j, same_block):
    """``u_ij``: intercept plus homophily terms, within or between blocks."""
    same = (np.asarray(x_i) == np.asarray(x_j)).astype(float)
    if same.shape[0] != params.P:
        raise ValueError(f"{same.shape[0]} covariates for P={params.P}")
    if same_block:
        return params.alpha_w + float(same @ params.beta_w)
    return params.alpha_b + float(same @ params.beta_b)


def pair_utilities(params, codes, z, rows, cols):
    """Vectorized ``u_ij + u_ji`` for the dyads ``(rows[t], cols[t])``."""
    same = (codes[rows] == codes[cols]).astype(float)
    within = z[rows] == z[cols]
    u = np.where(within, params.alpha_w + same @ params.beta_w, params.alpha_b + same @ params.beta_b)
    return 2.0 * u


def within_block_graph(g, z):
    """Subgraph keeping only edges whose endpoints share a block."""
    e = g.edges
    keep = z[e[:, 0]] == z[e[:, 1]]
    return Graph.from_edge_list(e[keep], g.n)


def potential(g, x, z, params):
    """Potential ``Q`` whose logit dynamics have stationary law ``exp(Q)/c``."""
    z = _labels(z)
    codes = as_codes(x, g.n)
    e = g.edges
    q = pair_utilities(params, codes, z, e[:, 0], e[:, 1]).sum()
    if params.psi != 0.0 or params.gamma != 0.0:
        gw = within_block_graph(g, z)
        q += params.psi * two_star_count(gw.degrees())
        q += 4.0 * params.gamma * triangle_count(gw)
    return float(q)


def change_stats(g, x, z, params, i, j):
    """Statistics for toggling dyad ``(i, j)`` and ``Q(g + ij) - Q(g - ij)``."""
    if i == j:
        raise ValueError("change statistics need two distinct nodes")
    z = _labels(z)
    codes = as_codes(x, g.n)
    same = (codes[i] == codes[j]).astype(np.int64)
    if z[i] == z[j]:
        k = z[i]
        ni = g.neighbors(i)
        nj = g.neighbors(j)
        ni = ni[(z[ni] == k) & (ni != j)]
        nj = nj[(z[nj] == k) & (nj != i)]
        s2 = int(ni.shape[0] + nj.shape[0])
        tri = int(np.intersect1d(ni, nj, assume_unique=True).shape[0])
        u = params.alpha_w + float(same @ params.beta_w)
    else:
        s2 = tri = 0
        u = params.alpha_b + float(same @ params.beta_b)
    stats = ChangeStats(2.0 * u, s2, tri, same)
    delta = 2.0 * u + params.psi * s2 + 4.0 * params.gamma * tri
    return stats, delta


def toggle(g, i, j):
    """Copy of ``g`` with dyad ``(i, j)`` flipped."""
    e = g.edges
    if g.has_edge(i, j):
        lo, hi = min(i, j), max(i, j)
        e = e[~((e[:, 0] == lo) & (e[:, 1] == hi))]
    else:
        e = np.vstack([e, [[i, j]]])
    return Graph.from_edge_list(e, g.n)


def dyad_list(n):
    """Dyads ``(i, j)``, ``i < j``, in the bit order used by graph codes."""
    i, j = np.triu_indices(n, 1)
    return np.column_stack([i, j])


def graph_from_code(code, n):
    dyads = dyad_list(n)
    bits = (int(code) >> np.arange(dyads.shape[0])) & 1
    return Graph.from_edge_list(dyads[bits.astype(bool)], n)


def graph_code(g):
    """Integer whose bit ``t`` is set when dyad ``t`` of :func:`dyad_list` is an edge."""
    n = g.n
    code = 0
    for i, j in g.edges:
        code |= 1 << int(i * (2 * n - i - 1) // 2 + (j - i - 1))
    return code


@dataclass(frozen=True)
class StationaryTable:
    n: int
    log_potential: np.ndarray
    probs: np.ndarray

    def prob(self, g):
        return float(self.probs[graph_code(g)])


def exact_stationary(n, x, z, params, max_n=5):
    """Enumerate all ``2**(n(n-1)/2)`` graphs; ``probs[code]`` is the stationary probability."""
    if n > max_n:
        raise CapacityError(f"exact enumeration is limited to n <= {max_n}, got n={n}")
    D = n * (n - 1) // 2
    q = np.array([potential(graph_from_code(c, n), x, z, params) for c in range(2 ** D)])
    probs = np.exp(q - logsumexp(q))
    return StationaryTable(n, q, probs)


def independent_link_probs(params, x, z, n):
    """Link probabilities ``Lambda(u_ij + u_ji)`` when there are no externalities."""
    dyads = dyad_list(n)
    u = pair_utilities(params, as_codes(x, n), _labels(z), dyads[:, 0], dyads[:, 1])
    return dyads, expit(u)
