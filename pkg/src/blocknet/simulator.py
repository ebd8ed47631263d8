"""Sequential network-formation dynamics and synthetic datasets.

A step picks a meeting pair and resamples the dyad from its conditional law
``Lambda(dQ)``. That logit update has ``exp(Q)/c`` as its stationary law for
any meeting rule that gives every pair positive probability.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import kernels
from .errors import ConfigError
from .graph import CovariateSet, Graph, as_codes, triangle_count, two_star_count
from .model import BlockAssignment, ModelParams, change_stats

CHUNK = 1 << 20


@dataclass
class SimConfig:
    """Chain configuration.

    ``steps`` defaults to 100 sweeps over all dyads. ``meeting`` may be a
    callable ``(rng, size, n) -> (i, j)`` returning proposal pairs; the
    default draws pairs uniformly.
    """

    n: int
    K: int
    eta: np.ndarray
    params: ModelParams
    steps: int | None = None
    burn_in: int = 0
    seed: int = 0
    record_every: int = 0
    meeting: object = None

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        problems = []
        if self.n < 2:
            problems.append(f"n must be at least 2, got {self.n}")
        if self.eta.shape != (self.K,):
            problems.append(f"eta has {self.eta.size} entries for K={self.K}")
        if np.any(self.eta < 0):
            problems.append("eta entries must be non-negative")
        if abs(self.eta.sum() - 1.0) > 1e-9:
            problems.append(f"eta must sum to 1, sums to {self.eta.sum():.6g}")
        if self.steps is None:
            self.steps = 100 * self.n * (self.n - 1) // 2
        if not self.steps > self.burn_in >= 0:
            problems.append(f"need steps > burn_in >= 0, got steps={self.steps}, burn_in={self.burn_in}")
        if self.record_every < 0:
            problems.append("record_every must be non-negative")
        if problems:
            raise ConfigError(problems)


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def draw_types(n, eta, seed=None):
    eta = np.asarray(eta, dtype=float)
    z = _rng(seed).choice(eta.shape[0], size=n, p=eta)
    return BlockAssignment(z, eta.shape[0])


def uniform_pairs(rng, size, n):
    i = rng.integers(0, n, size=size)
    j = rng.integers(0, n - 1, size=size)
    j = j + (j >= i)
    return i, j


def step(g, x, z, params, rng, pair=None):
    """One meeting and logit link decision; returns the updated graph.

    Reference implementation on immutable graphs. :func:`run_chain` does the
    same thing in a compiled loop.
    """
    rng = _rng(rng)
    if pair is None:
        i, j = (int(v[0]) for v in uniform_pairs(rng, 1, g.n))
    else:
        i, j = pair
    _, delta = change_stats(g, x, z, params, i, j)
    link = rng.random() < expit(delta)
    if link == g.has_edge(i, j):
        return g
    e = g.edges
    if link:
        e = np.vstack([e, [[min(i, j), max(i, j)]]])
    else:
        e = e[~((e[:, 0] == min(i, j)) & (e[:, 1] == max(i, j)))]
    return Graph.from_edge_list(e, g.n)


@dataclass
class ChainResult:
    graph: Graph
    z: BlockAssignment
    trace: np.ndarray = field(default_factory=lambda: np.zeros((0, 4), dtype=np.int64))
    state_codes: np.ndarray | None = None

    @property
    def trace_columns(self):
        return ("step", "edges", "two_stars", "triangles")


class _ChainState:
    """Mutable dense state shared by the compiled kernel across chunks."""

    def __init__(self, n, z, codes, start=None):
        self.adj = np.zeros((n, n), dtype=np.uint8) if start is None else start.to_dense()
        self.z = np.ascontiguousarray(z, dtype=np.int64)
        self.codes = np.ascontiguousarray(codes, dtype=np.int64)
        order = np.argsort(self.z, kind="stable")
        K = int(self.z.max()) + 1 if n else 1
        self.block_ptr = np.zeros(K + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.z, minlength=K), out=self.block_ptr[1:])
        self.block_nodes = order.astype(np.int64)
        within = self.z[:, None] == self.z[None, :]
        aw = self.adj.astype(bool) & within
        self.deg_in = aw.sum(axis=1).astype(np.int64)
        g = Graph.from_dense(self.adj)
        gw = Graph.from_dense(aw.astype(np.uint8))
        self.counts = np.array([g.m, two_star_count(gw.degrees()), triangle_count(gw)], dtype=np.int64)
        self.code = np.int64(0)

    def run(self, params, i, j, u, first_step, burn_in, record_every, track_code):
        size = i.shape[0]
        trace = np.zeros((size // record_every + 1 if record_every else 0, 4), dtype=np.int64)
        codes_out = np.zeros(size if track_code else 0, dtype=np.int64)
        rows, code = kernels.gibbs_chain(
            self.adj, self.z, self.codes, params.alpha_w, params.alpha_b,
            params.beta_w, params.beta_b, params.psi, params.gamma,
            self.block_ptr, self.block_nodes, self.deg_in, self.counts, self.code,
            i.astype(np.int64), j.astype(np.int64), u, np.int64(first_step), np.int64(burn_in),
            np.int64(record_every), trace, codes_out, track_code,
        )
        self.code = np.int64(code)
        return trace[:rows], codes_out


def run_chain(config, x=None, z=None, start=None, record_states=False, rng=None):
    """Apply ``config.steps`` logit updates starting from the empty graph.

    Parameters
    ----------
    config : SimConfig
    x : CovariateSet or array, optional
    z : BlockAssignment, optional
        Drawn from ``config.eta`` when omitted.
    start : Graph, optional
        Initial state; the empty graph by default.
    record_states : bool
        Also return the integer code of the graph after every post-burn-in
        step (graphs with at most 11 nodes).
    """
    rng = np.random.default_rng(config.seed) if rng is None else rng
    n = config.n
    if z is None:
        z = draw_types(n, config.eta, rng)
    codes = as_codes(x, n)
    if codes.shape[1] != config.params.P:
        raise ConfigError(f"{codes.shape[1]} covariates but params have P={config.params.P}")
    if record_states and n > 11:
        raise ConfigError("record_states needs n <= 11 so graph codes fit in 64 bits")
    if record_states and start is not None and start.m:
        raise ConfigError("record_states requires the empty starting graph")
    state = _ChainState(n, z.z, codes, start)
    meeting = config.meeting or uniform_pairs
    traces, state_codes = [], []
    done = 0
    while done < config.steps:
        size = min(CHUNK, config.steps - done)
        i, j = meeting(rng, size, n)
        u = rng.random(size)
        tr, cs = state.run(config.params, np.asarray(i), np.asarray(j), u, done,
                           config.burn_in, config.record_every, record_states)
        traces.append(tr)
        if record_states:
            keep = np.arange(done + 1, done + size + 1) > config.burn_in
            state_codes.append(cs[keep])
        done += size
    result = ChainResult(Graph.from_dense(state.adj), z, np.vstack(traces) if traces else None)
    if record_states:
        result.state_codes = np.concatenate(state_codes)
    return result


@dataclass
class CovariateSpec:
    """How one synthetic covariate is drawn.

    Each block gets a home category; with probability ``block_correlation``
    a node takes its block's home category, otherwise a draw from ``probs``
    (uniform over ``n_categories`` when omitted).
    """

    name: str
    n_categories: int
    probs: np.ndarray | None = None
    block_correlation: float = 0.0


@dataclass
class Dataset:
    graph: Graph
    covariates: CovariateSet
    z: BlockAssignment
    params: ModelParams
    seed: int


def draw_covariates(specs, z, rng):
    n = z.n
    columns = {}
    for spec in specs:
        probs = None if spec.probs is None else np.asarray(spec.probs, dtype=float)
        values = rng.choice(spec.n_categories, size=n, p=probs)
        if spec.block_correlation > 0:
            home = rng.integers(0, spec.n_categories, size=z.K)
            tied = rng.random(n) < spec.block_correlation
            values = np.where(tied, home[z.z], values)
        columns[spec.name] = values
    if not columns:
        return CovariateSet.empty(n)
    return CovariateSet(list(columns), np.column_stack(list(columns.values())),
                        [np.arange(s.n_categories) for s in specs])


def _sample_between(z, codes, params, rng):
    """Exact draw of every between-block dyad; they are independent given ``z``."""
    n = z.shape[0]
    edges = []
    for i in range(n - 1):
        j = np.arange(i + 1, n)
        j = j[z[j] != z[i]]
        if j.size == 0:
            continue
        same = (codes[j] == codes[i]).astype(float)
        p = expit(2.0 * (params.alpha_b + same @ params.beta_b))
        hit = j[rng.random(j.size) < p]
        edges.append(np.column_stack([np.full(hit.size, i), hit]))
    return np.vstack(edges) if edges else np.zeros((0, 2), dtype=np.int64)


def generate_dataset(config, covariate_specs=(), method="factorized"):
    """Draw types, covariates and a network; returns all ground truth.

    ``method="chain"`` runs the literal chain over all dyads. The default
    ``"factorized"`` runs an independent chain inside each block, giving each
    block its share of ``config.steps`` in proportion to its dyad count, and
    draws between-block dyads exactly from their independent Bernoulli laws.
    Both target the same stationary distribution.
    """
    seeds = np.random.SeedSequence(config.seed).spawn(4)
    z = draw_types(config.n, config.eta, np.random.default_rng(seeds[0]))
    x = draw_covariates(covariate_specs, z, np.random.default_rng(seeds[1]))
    if x.p != config.params.P:
        raise ConfigError(f"{x.p} covariate specs but params have P={config.params.P}")
    if method == "chain":
        res = run_chain(config, x, z, rng=np.random.default_rng(seeds[2]))
        return Dataset(res.graph, x, z, config.params, config.seed)
    if method != "factorized":
        raise ConfigError(f"unknown generation method {method!r}")
    total_pairs = config.n * (config.n - 1) / 2
    block_seeds = seeds[2].spawn(z.K)
    edges = []
    for k in range(z.K):
        members = np.flatnonzero(z.z == k)
        nk = members.size
        if nk < 2:
            continue
        pairs_k = nk * (nk - 1) / 2
        steps_k = max(1, int(round(config.steps * pairs_k / total_pairs)))
        sub = SimConfig(nk, 1, [1.0], config.params, steps=steps_k, seed=0)
        res = run_chain(sub, x.codes[members], BlockAssignment(np.zeros(nk, dtype=np.int64), 1),
                        rng=np.random.default_rng(block_seeds[k]))
        edges.append(members[res.graph.edges])
    edges.append(_sample_between(z.z, x.codes, config.params, np.random.default_rng(seeds[3])))
    g = Graph.from_edge_list(np.vstack(edges), config.n)
    return Dataset(g, x, z, config.params, config.seed)
