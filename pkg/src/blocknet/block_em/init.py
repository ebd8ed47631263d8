"""Initial partition from community detection, merged down to ``K_max`` by modularity gain."""
import heapq

import networkx as nx
import numpy as np

from ..model import BlockAssignment


def label_propagation(g, seed=0):
    """Asynchronous label propagation; isolated nodes share one residual label."""
    G = _graph(g)
    labels = np.full(g.n, -1, dtype=np.int64)
    isolated = g.degrees() == 0
    comms = nx.community.asyn_lpa_communities(G.subgraph(np.flatnonzero(~isolated).tolist()), seed=seed)
    # sort for a seed-deterministic labelling independent of set iteration order
    for c, members in enumerate(sorted((sorted(m) for m in comms), key=lambda m: m[0])):
        labels[members] = c
    if isolated.any():
        labels[isolated] = labels.max() + 1
    return labels


def _graph(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(map(tuple, g.edges.tolist()))
    return G


def _as_sets(labels):
    return [set(np.flatnonzero(labels == c).tolist()) for c in np.unique(labels)]


def louvain(g, seed=0):
    labels = np.zeros(g.n, dtype=np.int64)
    parts = nx.community.louvain_communities(_graph(g), seed=seed)
    for c, members in enumerate(sorted((sorted(q) for q in parts), key=lambda q: q[0])):
        labels[members] = c
    return labels


def modularity(g, labels):
    return nx.community.modularity(_graph(g), _as_sets(np.asarray(labels)))


def merge_communities(g, labels, K_max):
    """Greedily merge the smallest community into the partner with the best modularity gain.

    The gain of merging ``a`` and ``b`` is ``e_ab/m - d_a d_b / (2 m^2)``
    (edge count between them, total degrees ``d``). A community without
    links to others joins the one with the smallest total degree.
    """
    labels = np.asarray(labels, dtype=np.int64)
    _, labels = np.unique(labels, return_inverse=True)
    count = int(labels.max()) + 1 if labels.size else 0
    if count <= K_max:
        return labels
    m = max(g.m, 1)
    size = np.bincount(labels, minlength=count).astype(np.int64)
    deg = np.bincount(labels, weights=g.degrees(), minlength=count)
    links = [dict() for _ in range(count)]
    e = g.edges
    la, lb = labels[e[:, 0]], labels[e[:, 1]]
    cross = la != lb
    for a, b in zip(la[cross].tolist(), lb[cross].tolist()):
        links[a][b] = links[a].get(b, 0) + 1
        links[b][a] = links[b].get(a, 0) + 1
    parent = np.arange(count)
    alive = set(range(count))
    heap = [(int(size[c]), c) for c in range(count)]
    heapq.heapify(heap)
    degree_heap = [(float(deg[c]), c) for c in range(count)]
    heapq.heapify(degree_heap)
    while len(alive) > K_max:
        sz, a = heapq.heappop(heap)
        if a not in alive or sz != size[a]:
            continue
        best, best_gain = None, -np.inf
        for b, e_ab in links[a].items():
            gain = e_ab / m - deg[a] * deg[b] / (2.0 * m * m)
            if gain > best_gain or (gain == best_gain and b < best):
                best, best_gain = b, gain
        if best is None:
            while True:
                d, b = degree_heap[0]
                if b in alive and b != a and d == deg[b]:
                    break
                if b == a and d == deg[b]:
                    # a itself is the minimum; look past it without discarding it
                    others = [(deg[c], c) for c in alive if c != a]
                    d, b = min(others)
                    break
                heapq.heappop(degree_heap)
            best = b
        b = best
        # fold a into b
        alive.discard(a)
        parent[a] = b
        size[b] += size[a]
        deg[b] += deg[a]
        for c, e_ac in links[a].items():
            links[c].pop(a, None)
            if c != b:
                links[b][c] = links[b].get(c, 0) + e_ac
                links[c][b] = links[c].get(b, 0) + e_ac
        links[b].pop(a, None)
        links[a] = {}
        heapq.heappush(heap, (int(size[b]), b))
        heapq.heappush(degree_heap, (float(deg[b]), b))
    root = parent.copy()
    for c in range(count):
        r = c
        while parent[r] != r:
            r = parent[r]
        root[c] = r
    _, out = np.unique(root[labels], return_inverse=True)
    return out


def init_blocks(g, K_max, seed=0):
    """Initial hard partition with at most ``K_max`` blocks.

    Label propagation can flood a dense graph with one label, which leaves
    the EM nothing to refine, so a Louvain partition is computed as well and
    the candidate with the higher modularity (after merging down to
    ``K_max``) is kept. An edgeless graph carries no community signal and yields a single block.
    """
    if K_max < 1:
        raise ValueError("K_max must be at least 1")
    if g.m == 0:
        return BlockAssignment(np.zeros(g.n, dtype=np.int64), 1)
    candidates = [merge_communities(g, label_propagation(g, seed), K_max),
                  merge_communities(g, louvain(g, seed), K_max)]
    scores = [modularity(g, c) for c in candidates]
    labels = candidates[int(np.argmax(scores))]
    return BlockAssignment.from_labels(labels)
