"""Flat-file formats: edge lists, covariate CSVs, partitions, ground truth and traces.

Node ids in files may be arbitrary strings. When every id is a
non-negative integer they are used as dense indices directly; otherwise
they are relabelled to ``0..n-1`` in sorted order and the original ids are
written back on output.
"""
import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .graph import CovariateSet, Graph
from .model import BlockAssignment, ModelParams


@dataclass
class NodeIndex:
    ids: list
    lookup: dict
    integer: bool

    @property
    def n(self):
        return len(self.ids)

    @classmethod
    def build(cls, tokens, declared_n=None):
        tokens = set(tokens)
        if all(t.isdigit() for t in tokens):
            top = max((int(t) for t in tokens), default=-1) + 1
            n = max(top, declared_n or 0)
            ids = [str(k) for k in range(n)]
            return cls(ids, {s: k for k, s in enumerate(ids)}, True)
        if declared_n is not None and declared_n != len(tokens):
            raise DataError(f"'# nodes: {declared_n}' header disagrees with {len(tokens)} distinct ids")
        ids = sorted(tokens)
        return cls(ids, {s: k for k, s in enumerate(ids)}, False)

    @classmethod
    def dense(cls, n):
        ids = [str(k) for k in range(n)]
        return cls(ids, {s: k for k, s in enumerate(ids)}, True)

    def index(self, token, where):
        try:
            return self.lookup[token]
        except KeyError:
            raise DataError(f"{where}: unknown node id {token!r}") from None


def read_edge_list(path):
    """``(pairs, declared_n)`` with raw string ids; ``# nodes: N`` declares isolated nodes."""
    pairs, declared = [], None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.lower().startswith("nodes:"):
                    try:
                        declared = int(body.split(":", 1)[1])
                    except ValueError:
                        raise DataError(f"{path}:{lineno}: bad node-count header {line!r}") from None
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected two tab-separated node ids, got {line!r}")
            pairs.append((parts[0].strip(), parts[1].strip(), lineno))
    return pairs, declared


def read_covariate_table(path):
    """``(node_ids, {name: values})`` from a ``node_id,cov_...`` CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty covariate file") from None
        header = [h.strip() for h in header]
        if not header or header[0] != "node_id":
            raise DataError(f"{path}:1: first column must be 'node_id', got {header[:1]}")
        ids, rows = [], []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: {len(row)} fields, header has {len(header)}")
            ids.append(row[0].strip())
            rows.append([v.strip() for v in row[1:]])
    names = header[1:]
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate node ids")
    cols = {nm: np.array([r[k] for r in rows], dtype=object) for k, nm in enumerate(names)}
    return ids, cols


@dataclass
class Network:
    graph: Graph
    covariates: CovariateSet
    nodes: NodeIndex


def load_network(edges_path, covariates_path=None, covariates=None, min_category_size=None):
    """Load a graph and (a selection of) its covariates onto a shared node index."""
    pairs, declared = read_edge_list(edges_path)
    tokens = [t for a, b, _ in pairs for t in (a, b)]
    cov_ids, cols = None, {}
    if covariates_path:
        cov_ids, cols = read_covariate_table(covariates_path)
        tokens += cov_ids
        if covariates is not None:
            missing = [nm for nm in covariates if nm not in cols]
            if missing:
                raise DataError(f"{covariates_path}: covariate column(s) {missing} not in header {list(cols)}")
            cols = {nm: cols[nm] for nm in covariates}
    elif covariates:
        raise DataError(f"covariates {list(covariates)} requested but no covariate file given")
    nodes = NodeIndex.build(tokens, declared)
    edges = np.array([[nodes.lookup[a], nodes.lookup[b]] for a, b, _ in pairs], dtype=np.int64).reshape(-1, 2)
    g = Graph.from_edge_list(edges, nodes.n)
    if cov_ids is None:
        return Network(g, CovariateSet.empty(nodes.n), nodes)
    if len(cov_ids) != nodes.n:
        absent = sorted(set(nodes.ids) - set(cov_ids))[:5]
        raise DataError(f"{covariates_path}: covariates cover {len(cov_ids)} of {nodes.n} nodes; missing e.g. {absent}")
    order = np.array([nodes.lookup[t] for t in cov_ids])
    aligned = {}
    for nm, vals in cols.items():
        out = np.empty(nodes.n, dtype=object)
        out[order] = vals
        aligned[nm] = out.astype(str)
    if not aligned:
        return Network(g, CovariateSet.empty(nodes.n), nodes)
    return Network(g, CovariateSet.from_columns(aligned, min_category_size=min_category_size), nodes)


def write_edge_list(path, g, nodes=None):
    nodes = nodes or NodeIndex.dense(g.n)
    with open(path, "w") as fh:
        fh.write(f"# nodes: {g.n}\n")
        for i, j in g.edges.tolist():
            fh.write(f"{nodes.ids[i]}\t{nodes.ids[j]}\n")


def write_covariates(path, cov, nodes=None):
    nodes = nodes or NodeIndex.dense(cov.n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id"] + list(cov.names))
        labels = []
        for s in range(cov.p):
            cats = cov.categories[s] if cov.categories is not None else None
            col = cov.codes[:, s]
            labels.append([str(cats[c]) for c in col] if cats is not None else [str(c) for c in col])
        for i in range(cov.n):
            w.writerow([nodes.ids[i]] + [labels[s][i] for s in range(cov.p)])


def write_partition(path, z, nodes=None):
    z = getattr(z, "z", z)
    nodes = nodes or NodeIndex.dense(len(z))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "block"])
        for i, k in enumerate(np.asarray(z).tolist()):
            w.writerow([nodes.ids[i], k])


def read_partition_table(path):
    """Raw ``{node_id: block_label}`` mapping."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header[:2] != ["node_id", "block"]:
            raise DataError(f"{path}:1: expected header 'node_id,block', got {header}")
        out = {}
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) < 2:
                raise DataError(f"{path}:{lineno}: expected node_id,block")
            if row[0].strip() in out:
                raise DataError(f"{path}:{lineno}: duplicate node id {row[0]!r}")
            out[row[0].strip()] = row[1].strip()
    return out


def read_partition(path, nodes):
    table = read_partition_table(path)
    if set(table) != set(nodes.ids):
        extra = sorted(set(table) - set(nodes.ids))[:5]
        missing = sorted(set(nodes.ids) - set(table))[:5]
        raise DataError(f"{path}: partition node set differs from the graph (missing {missing}, extra {extra})")
    labels = [table[t] for t in nodes.ids]
    return BlockAssignment.from_labels(labels)


def write_truth(path, dataset):
    names = list(dataset.covariates.names)
    obj = {
        "z": dataset.z.z.tolist(),
        "K": dataset.z.K,
        "params": dataset.params.to_unordered(names),
        "covariates": names,
        "seed": dataset.seed,
    }
    write_json(path, obj)


def read_truth(path):
    """``(BlockAssignment, ModelParams, seed)`` from a ground-truth JSON."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
        z = np.asarray(obj["z"], dtype=np.int64)
        K = int(obj.get("K", int(z.max()) + 1 if z.size else 1))
        params = ModelParams.from_unordered(obj["params"], obj.get("covariates"))
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"{path}: malformed truth file ({exc})") from None
    return BlockAssignment(z, K), params, obj.get("seed")


def write_trace(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "lower_bound", "delta"])
        prev = None
        for it, lb in trace:
            w.writerow([it, repr(float(lb)), "" if prev is None else repr(float(lb - prev))])
            prev = lb


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
