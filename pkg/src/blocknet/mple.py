"""Structural parameters by maximum pseudolikelihood, conditional on a block assignment.

Each dyad contributes the logit of its conditional link probability given
the rest of the graph. Within-block dyads carry the externality change
statistics; between-block dyads only the direct payoff terms. The two
groups are fitted separately.

Coefficients follow the unordered convention: ``edges`` (``2 alpha``),
``two_stars`` (``psi``), ``triangles`` (``4 gamma``) and ``same_<cov>``
(``2 beta``).
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import kernels
from .errors import ConfigError, NumericalError, RankDeficiencyError, SeparationError
from .graph import CovariateSet, as_codes
from .model import ModelParams, _labels

log = logging.getLogger(__name__)

GROUPS = ("within", "between")
SAMPLING = ("auto", "all", "case-control")
CASE_CONTROL_MIN_N = 20000
DEFAULT_RATIO = 5
DIVERGENCE_BOUND = 30.0


def covariate_names(x, p):
    if isinstance(x, CovariateSet):
        return list(x.names)
    return [f"cov_{s + 1}" for s in range(p)]


def design_columns(group, names):
    base = ["edges", "two_stars", "triangles"] if group == "within" else ["edges"]
    return base + [f"same_{nm}" for nm in names]


@dataclass
class Design:
    """Logistic design. ``y`` counts links among ``weights`` dyads sharing a row."""

    group: str
    columns: list
    X: np.ndarray
    y: np.ndarray
    weights: np.ndarray
    offset: np.ndarray
    sampling: dict = field(default_factory=dict)
    rows: np.ndarray = None
    cols: np.ndarray = None

    @property
    def n_rows(self):
        return int(round(self.weights.sum()))


def _within_pairs(z):
    order = np.argsort(z, kind="stable")
    bounds = np.flatnonzero(np.diff(z[order])) + 1
    rows, cols = [], []
    for members in np.split(order, bounds):
        if members.size < 2:
            continue
        members = np.sort(members)
        a, b = np.triu_indices(members.size, 1)
        rows.append(members[a])
        cols.append(members[b])
    if not rows:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    return np.concatenate(rows), np.concatenate(cols)


def _between_pairs(z):
    n = z.shape[0]
    rows, cols = np.triu_indices(n, 1)
    keep = z[rows] != z[cols]
    return rows[keep].astype(np.int64), cols[keep].astype(np.int64)


def _link(g, rows, cols):
    if rows.size == 0:
        return np.zeros(0)
    return np.asarray(g.adjacency[rows, cols]).ravel()


def _within_stats(g, z, rows, cols, links):
    e = g.edges
    inside = z[e[:, 0]] == z[e[:, 1]]
    deg_in = np.bincount(e[inside].ravel(), minlength=g.n)
    s2 = deg_in[rows] + deg_in[cols] - 2 * links
    tri = kernels.common_neighbor_counts(g.indptr, g.indices, rows, cols, z, True)
    return s2.astype(float), tri.astype(float)


def _sample_non_edges(g, z, group, count, rng):
    """Distinct non-edges drawn uniformly from the dyads of ``group``."""
    n = g.n
    taken = set()
    rows, cols = [], []
    if group == "within":
        sizes = np.bincount(z)
        pairs = sizes * (sizes - 1) // 2
        members = [np.flatnonzero(z == k) for k in range(sizes.size)]
        cum = np.cumsum(pairs)
    while len(rows) < count:
        need = 2 * (count - len(rows)) + 16
        if group == "within":
            idx = rng.integers(0, cum[-1], size=need)
            blk = np.searchsorted(cum, idx, side="right")
            local = idx - (cum[blk] - pairs[blk])
            # invert the row-major upper-triangle index within the block
            for k, t in zip(blk.tolist(), local.tolist()):
                m = sizes[k]
                a = int(m - 2 - math.floor(math.sqrt(-8 * t + 4 * m * (m - 1) - 7) / 2.0 - 0.5))
                b = int(t + a + 1 - m * (m - 1) // 2 + (m - a) * (m - a - 1) // 2)
                i, j = members[k][a], members[k][b]
                _accept(g, int(i), int(j), taken, rows, cols, count)
        else:
            i = rng.integers(0, n, size=need)
            j = rng.integers(0, n - 1, size=need)
            j = j + (j >= i)
            for a, b in zip(i.tolist(), j.tolist()):
                if z[a] != z[b]:
                    _accept(g, min(a, b), max(a, b), taken, rows, cols, count)
    return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64)


def _accept(g, i, j, taken, rows, cols, count):
    if len(rows) >= count or (i, j) in taken or g.has_edge(i, j):
        return
    taken.add((i, j))
    rows.append(i)
    cols.append(j)


def _group_edges(g, z, group):
    e = g.edges
    inside = z[e[:, 0]] == z[e[:, 1]]
    sel = inside if group == "within" else ~inside
    return e[sel, 0].astype(np.int64), e[sel, 1].astype(np.int64)


def _group_pair_count(z, group):
    sizes = np.bincount(z).astype(np.int64)
    within = int((sizes * (sizes - 1) // 2).sum())
    n = z.shape[0]
    return within if group == "within" else n * (n - 1) // 2 - within


def resolve_sampling(sampling, n):
    if sampling not in SAMPLING:
        raise ConfigError(f"sampling must be one of {SAMPLING}, got {sampling!r}")
    if sampling == "auto":
        return "all" if n <= CASE_CONTROL_MIN_N else "case-control"
    return sampling


def build_design(g, x, z, group, sampling="all", ratio=DEFAULT_RATIO, seed=0):
    """One row per dyad of ``group`` (``within`` or ``between``).

    ``sampling="case-control"`` keeps every link of the group plus
    ``ratio`` non-links per link drawn without replacement, and records the
    offset ``log(N0 / n0)`` (non-links in the group over non-links kept).
    """
    if group not in GROUPS:
        raise ConfigError(f"group must be one of {GROUPS}, got {group!r}")
    z = _labels(z)
    codes = as_codes(x, g.n)
    names = covariate_names(x, codes.shape[1])
    sampling = resolve_sampling(sampling, g.n)
    info = {"method": sampling}
    offset = 0.0
    if sampling == "all":
        rows, cols = _within_pairs(z) if group == "within" else _between_pairs(z)
        links = _link(g, rows, cols)
    else:
        er, ec = _group_edges(g, z, group)
        total0 = _group_pair_count(z, group) - er.size
        keep0 = min(int(ratio) * er.size, total0)
        nr, nc = _sample_non_edges(g, z, group, keep0, np.random.default_rng(seed))
        rows = np.concatenate([er, nr])
        cols = np.concatenate([ec, nc])
        links = np.concatenate([np.ones(er.size), np.zeros(nr.size)])
        if keep0:
            offset = math.log(total0 / keep0)
        info.update(ratio=int(ratio), non_links_total=int(total0), non_links_kept=int(keep0),
                    offset=offset, seed=seed)
    same = (codes[rows] == codes[cols]).astype(float)
    parts = [np.ones((rows.size, 1))]
    if group == "within":
        s2, tri = _within_stats(g, z, rows, cols, links)
        parts += [s2[:, None], tri[:, None]]
    parts.append(same)
    X = np.hstack(parts)
    return Design(group, design_columns(group, names), X, links.astype(float),
                  np.ones(rows.size), np.full(rows.size, offset), info, rows, cols)


def between_cells(g, x, z):
    """Exact between-block design aggregated over covariate-match patterns.

    Between-block rows depend only on which covariates match, so the dyads
    collapse into ``2**p`` binomial cells. Counts come from inclusion-exclusion
    over joint category counts and never enumerate dyads.
    """
    z = _labels(z)
    codes = as_codes(x, g.n)
    p = codes.shape[1]
    C = 1 << p

    def matching_pairs(T, with_block):
        cols = [codes[:, s] for s in range(p) if T >> s & 1]
        if with_block:
            cols.append(z)
        if not cols:
            return g.n * (g.n - 1) // 2
        _, counts = np.unique(np.column_stack(cols), axis=0, return_counts=True)
        counts = counts.astype(np.int64)
        return int((counts * (counts - 1) // 2).sum())

    at_least = [matching_pairs(T, False) - matching_pairs(T, True) for T in range(C)]
    totals = np.zeros(C, dtype=np.int64)
    for S in range(C):
        rest = (C - 1) & ~S
        t = rest
        while True:
            sign = -1 if bin(t).count("1") % 2 else 1
            totals[S] += sign * at_least[S | t]
            if t == 0:
                break
            t = (t - 1) & rest
    er, ec = _group_edges(g, z, "between")
    pattern = ((codes[er] == codes[ec]) * (1 << np.arange(p))).sum(axis=1).astype(np.int64)
    links = np.bincount(pattern, minlength=C).astype(float)
    keep = totals > 0
    bits = ((np.arange(C)[:, None] >> np.arange(p)) & 1).astype(float)
    X = np.hstack([np.ones((C, 1)), bits])[keep]
    names = covariate_names(x, p)
    return Design("between", design_columns("between", names), X, links[keep],
                  totals[keep].astype(float), np.zeros(int(keep.sum())),
                  {"method": "all", "aggregated_cells": int(keep.sum())})


# logistic pieces, exposed for finite-difference checks

def loglik(beta, d):
    eta = d.X @ beta + d.offset
    return float((d.y * eta - d.weights * np.logaddexp(0.0, eta)).sum())


def score(beta, d):
    mu = expit(d.X @ beta + d.offset)
    return d.X.T @ (d.y - d.weights * mu)


def information(beta, d):
    mu = expit(d.X @ beta + d.offset)
    w = d.weights * mu * (1.0 - mu)
    return (d.X * w[:, None]).T @ d.X


def _check_rank(d):
    w = d.weights
    gram = (d.X * w[:, None]).T @ d.X
    scale = np.sqrt(np.diag(gram))
    for k, name in enumerate(d.columns):
        if scale[k] == 0:
            raise RankDeficiencyError(name)
        sub = gram[: k + 1, : k + 1] / np.outer(scale[: k + 1], scale[: k + 1])
        if np.linalg.eigvalsh(sub).min() < 1e-10:
            raise RankDeficiencyError(name)


@dataclass
class FitResult:
    group: str
    columns: list
    coef: np.ndarray
    se: np.ndarray
    loglik: float
    bic: float
    n_rows: int
    iterations: int
    converged: bool
    sampling: dict = field(default_factory=dict)

    @property
    def z_scores(self):
        return self.coef / self.se

    def coefficients(self):
        return dict(zip(self.columns, self.coef.tolist()))

    def to_dict(self):
        return {
            "group": self.group,
            "coefficients": self.coefficients(),
            "se": dict(zip(self.columns, self.se.tolist())),
            "z_scores": dict(zip(self.columns, self.z_scores.tolist())),
            "logPL": self.loglik,
            "BIC": self.bic,
            "n_rows": self.n_rows,
            "iterations": self.iterations,
            "converged": self.converged,
            "sampling": self.sampling,
        }


def fit_logistic(d, tol=1e-8, max_iter=100):
    """Newton-Raphson fit of the logistic (pseudo)likelihood.

    Stops once ``max |score| <= tol``. Standard errors come from the inverse
    observed information. Diverging coefficients raise SeparationError.
    """
    if d.X.shape[0] == 0:
        raise NumericalError(f"{d.group} group has no dyads to fit")
    if np.all(d.y == 0) or np.all(d.y == d.weights):
        raise SeparationError(f"{d.group} response is constant ({'no' if np.all(d.y == 0) else 'all'} links);"
                              " the edges coefficient diverges")
    _check_rank(d)
    k = d.X.shape[1]
    beta = np.zeros(k)
    rate = d.y.sum() / d.weights.sum()
    beta[0] = math.log(rate / (1.0 - rate)) - float(np.average(d.offset, weights=d.weights))
    ll = loglik(beta, d)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = score(beta, d)
        if np.abs(grad).max() <= tol:
            converged = True
            it -= 1
            break
        try:
            step = np.linalg.solve(information(beta, d), grad)
        except np.linalg.LinAlgError:
            raise SeparationError(f"{d.group} information matrix became singular; coefficients "
                                  f"{dict(zip(d.columns, np.round(beta, 3).tolist()))}") from None
        t = 1.0
        while True:
            cand = beta + t * step
            new = loglik(cand, d)
            if new >= ll - 1e-12 * abs(ll) or t < 1e-10:
                break
            t *= 0.5
        if np.array_equal(cand, beta):
            break
        beta, ll = cand, new
        if np.abs(beta).max() > DIVERGENCE_BOUND:
            worst = d.columns[int(np.abs(beta).argmax())]
            raise SeparationError(f"{d.group} coefficient {worst!r} diverges ({beta[np.abs(beta).argmax()]:.3g});"
                                  " the data are (quasi-)separated")
    else:
        converged = np.abs(score(beta, d)).max() <= tol
    if not converged:
        log.warning("%s fit stopped after %d iterations with max |score| %.3g",
                    d.group, it, np.abs(score(beta, d)).max())
    cov = np.linalg.inv(information(beta, d))
    se = np.sqrt(np.diag(cov))
    n_rows = d.n_rows
    bic = -2.0 * ll + k * math.log(n_rows)
    return FitResult(d.group, list(d.columns), beta, se, ll, bic, n_rows, it, bool(converged), dict(d.sampling))


@dataclass
class Estimate:
    within: FitResult
    between: FitResult

    def coefficients(self):
        out = {f"within_{k}": v for k, v in self.within.coefficients().items()}
        out.update({f"between_{k}": v for k, v in self.between.coefficients().items()})
        return out

    def params(self):
        return ModelParams.from_unordered(self.coefficients())

    def to_dict(self):
        return {"within": self.within.to_dict(), "between": self.between.to_dict()}


def estimate(g, x, z, sampling="auto", ratio=DEFAULT_RATIO, seed=0, tol=1e-8):
    """Separate within- and between-block fits conditional on ``z``.

    Standard errors ignore the uncertainty in ``z``. The between group is
    fitted exactly from aggregated cells unless case-control sampling is
    requested explicitly.
    """
    mode = resolve_sampling(sampling, g.n)
    within = fit_logistic(build_design(g, x, z, "within", mode, ratio, seed), tol=tol)
    if sampling == "case-control":
        bd = build_design(g, x, z, "between", "case-control", ratio, seed + 1)
    else:
        bd = between_cells(g, x, z)
    between = fit_logistic(bd, tol=tol)
    return Estimate(within, between)


def log_pseudolikelihood(g, x, z, params):
    """``sum`` over all dyads of ``log P(g_ij | rest)`` at ``params``."""
    codes = as_codes(x, g.n)
    names = covariate_names(x, codes.shape[1])
    coefs = params.to_unordered(names)
    total = 0.0
    for group in GROUPS:
        d = build_design(g, x, z, group, "all")
        beta = np.array([coefs[f"{group}_{c}"] for c in d.columns])
        total += loglik(beta, d)
    return total


def coefficient_table(est):
    """Rows ``(term, within, within_se, between, between_se)`` for CSV output."""
    terms = list(dict.fromkeys(est.within.columns + est.between.columns))
    rows = []
    for term in terms:
        row = [term]
        for fit in (est.within, est.between):
            if term in fit.columns:
                k = fit.columns.index(term)
                row += [float(fit.coef[k]), float(fit.se[k])]
            else:
                row += ["", ""]
        rows.append(row)
    rows.append(["BIC", est.within.bic, "", est.between.bic, ""])
    rows.append(["n_rows", est.within.n_rows, "", est.between.n_rows, ""])
    return rows
