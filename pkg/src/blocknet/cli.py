"""Command-line driver: ``synth``, ``estimate``, ``stats``, ``compare`` and ``simulate``.

Every command takes ``--config`` (a JSON object of the same keys as the
long options, underscores for dashes), ``--seed``, ``--threads`` and
``--out``. Explicit flags win over the config file. ``BLOCKNET_OUTPUT_DIR``
and ``BLOCKNET_THREADS`` override the config file but not explicit flags.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""
import argparse
import logging
import os
import platform
import sys

import numpy as np

from . import __version__, _accel, io
from .block_em import em_run, partition_summary, yule_coefficient
from .errors import BlocknetError, ConfigError, DataError
from .graph import CovariateSet, graph_stats
from .mple import SAMPLING, coefficient_table, estimate
from .model import BlockAssignment, ModelParams
from .simulator import CovariateSpec, SimConfig, draw_covariates, draw_types, generate_dataset, run_chain

log = logging.getLogger("blocknet")

DEFAULT_OUT = "blocknet-output"
DEFAULT_MAX_NNZ = 20_000_000

# key -> (type, default); None default with required=True means mandatory
SCHEMAS = {
    "synth": {
        "n": (int, None, True), "K": (int, None, True), "eta": (list, None, False),
        "params": (dict, None, True), "covariates": (list, [], False), "steps": (int, None, False),
        "method": (str, "factorized", False),
    },
    "simulate": {
        "n": (int, None, False), "K": (int, None, False), "eta": (list, None, False),
        "params": (dict, None, False), "covariates": (list, [], False), "steps": (int, None, False),
        "burn_in": (int, 0, False), "record_every": (int, 0, False),
        "truth": (str, None, False), "covariate_file": (str, None, False),
    },
    "estimate": {
        "edges": (str, None, True), "covariate_file": (str, None, False), "use": (list, None, False),
        "K_max": (int, 10, False), "em_iters": (int, 250, False), "tol": (float, 1e-9, False),
        "sampling": (str, "auto", False), "ratio": (int, 5, False), "partition": (str, None, False),
        "no_covariates": (bool, False, False), "checkpoint_dir": (str, None, False),
        "max_nnz": (int, DEFAULT_MAX_NNZ, False), "min_category_size": (int, None, False),
        "quad_form": (str, "derived", False),
    },
    "stats": {
        "edges": (str, None, True), "covariate_file": (str, None, False), "partition": (str, None, False),
    },
    "compare": {
        "partition_a": (str, None, True), "partition_b": (str, None, True),
    },
}
COMMON = {"seed": (int, 0, False), "threads": (int, None, False), "out": (str, None, False)}


def _typecheck(key, value, typ, problems):
    if value is None:
        return value
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if typ is int and isinstance(value, bool) or not isinstance(value, typ):
        problems.append(f"{key} must be of type {typ.__name__}, got {type(value).__name__}")
    return value


def resolve_config(command, args):
    """Merge defaults, config file, environment and flags; collect every problem."""
    schema = {**SCHEMAS[command], **COMMON}
    problems = []
    file_cfg = {}
    if args.config:
        try:
            file_cfg = io.read_json(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
        if not isinstance(file_cfg, dict):
            raise ConfigError(f"{args.config}: config must be a JSON object")
        unknown = sorted(set(file_cfg) - set(schema))
        problems += [f"unknown config key {k!r}" for k in unknown]
    cfg = {k: d for k, (_, d, _) in schema.items()}
    cfg.update({k: v for k, v in file_cfg.items() if k in schema})
    if os.environ.get("BLOCKNET_OUTPUT_DIR"):
        cfg["out"] = os.environ["BLOCKNET_OUTPUT_DIR"]
    if os.environ.get("BLOCKNET_THREADS"):
        try:
            cfg["threads"] = int(os.environ["BLOCKNET_THREADS"])
        except ValueError:
            problems.append(f"BLOCKNET_THREADS must be an integer, got {os.environ['BLOCKNET_THREADS']!r}")
    for k in schema:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            cfg[k] = v
    for k, (typ, _, required) in schema.items():
        cfg[k] = _typecheck(k, cfg[k], typ, problems)
        if required and cfg[k] is None:
            problems.append(f"missing required setting {k!r}")
    if cfg["out"] is None:
        cfg["out"] = DEFAULT_OUT
    if cfg["threads"] is not None and cfg["threads"] < 1:
        problems.append("threads must be at least 1")
    return cfg, problems


def _versions():
    import numba
    import scipy

    return {"blocknet": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "python": platform.python_version(), "backend": _accel.backend_name()}


def _manifest(command, cfg, out, extra=None):
    obj = {"command": command, "config": cfg, "seed": cfg["seed"], "versions": _versions()}
    if extra:
        obj.update(extra)
    io.write_json(os.path.join(out, "manifest.json"), obj)


# model configuration shared by synth and simulate

def _covariate_specs(raw, problems):
    specs = []
    for k, item in enumerate(raw or []):
        if not isinstance(item, dict) or "name" not in item or "n_categories" not in item:
            problems.append(f"covariates[{k}] needs 'name' and 'n_categories'")
            continue
        extra = set(item) - {"name", "n_categories", "probs", "block_correlation"}
        if extra:
            problems.append(f"covariates[{k}] has unknown keys {sorted(extra)}")
        nc = item["n_categories"]
        if not isinstance(nc, int) or nc < 1:
            problems.append(f"covariates[{k}].n_categories must be a positive integer")
            continue
        probs = item.get("probs")
        if probs is not None:
            probs = np.asarray(probs, dtype=float)
            if probs.shape != (nc,) or np.any(probs < 0) or abs(probs.sum() - 1) > 1e-9:
                problems.append(f"covariates[{k}].probs must be {nc} non-negative values summing to 1")
                continue
        rho = item.get("block_correlation", 0.0)
        if not 0.0 <= rho <= 1.0:
            problems.append(f"covariates[{k}].block_correlation must lie in [0, 1]")
        specs.append(CovariateSpec(str(item["name"]), nc, probs, float(rho)))
    return specs


def _model_params(raw, names, problems):
    if raw is None:
        return None
    expected = {"within_edges", "within_two_stars", "within_triangles", "between_edges"}
    expected |= {f"{g}_same_{nm}" for g in ("within", "between") for nm in names}
    missing = sorted(expected - set(raw) - {"within_two_stars", "within_triangles"})
    unknown = sorted(set(raw) - expected)
    problems += [f"params lacks {k!r}" for k in missing]
    problems += [f"params has unknown key {k!r}" for k in unknown]
    bad = [k for k, v in raw.items() if not isinstance(v, (int, float)) or isinstance(v, bool)]
    problems += [f"params[{k!r}] must be a number" for k in bad]
    if missing or unknown or bad:
        return None
    return ModelParams.from_unordered(raw, names)


def _block_config(cfg, problems):
    n, K = cfg["n"], cfg["K"]
    if n is not None and n < 2:
        problems.append(f"n must be at least 2, got {n}")
    if K is not None and K < 1:
        problems.append(f"K must be at least 1, got {K}")
    eta = cfg["eta"]
    if K is not None and K >= 1:
        eta = np.full(K, 1.0 / K) if eta is None else np.asarray(eta, dtype=float)
        if eta.shape != (K,):
            problems.append(f"eta has {eta.size} entries for K={K}")
        elif np.any(eta < 0) or abs(eta.sum() - 1.0) > 1e-9:
            problems.append(f"eta must be non-negative and sum to 1 (sums to {eta.sum():.6g})")
    if cfg["steps"] is not None and cfg["steps"] < 1:
        problems.append("steps must be positive")
    return eta


def cmd_synth(cfg, problems):
    specs = _covariate_specs(cfg["covariates"], problems)
    params = _model_params(cfg["params"], [sp.name for sp in specs], problems)
    eta = _block_config(cfg, problems)
    if cfg["method"] not in ("factorized", "chain"):
        problems.append(f"method must be 'factorized' or 'chain', got {cfg['method']!r}")
    if problems:
        raise ConfigError(problems)
    sim = SimConfig(cfg["n"], cfg["K"], eta, params, steps=cfg["steps"], seed=cfg["seed"])
    ds = generate_dataset(sim, specs, method=cfg["method"])
    out = io.ensure_dir(cfg["out"])
    io.write_edge_list(os.path.join(out, "edges.tsv"), ds.graph)
    io.write_covariates(os.path.join(out, "covariates.csv"), ds.covariates)
    io.write_truth(os.path.join(out, "truth.json"), ds)
    _manifest("synth", cfg, out, {"steps": sim.steps})
    log.info("synth: n=%d m=%d written to %s", ds.graph.n, ds.graph.m, out)
    return ds


def cmd_simulate(cfg, problems):
    """Run the literal chain over all dyads, recording statistics along the way."""
    z = x = None
    if cfg["truth"]:
        z, tparams, _ = io.read_truth(cfg["truth"])
        if cfg["params"] is None:
            cfg["params"] = tparams.to_unordered(io.read_json(cfg["truth"]).get("covariates"))
        cfg["n"] = cfg["n"] or z.n
        cfg["K"] = cfg["K"] or z.K
    for key in ("n", "K", "params"):
        if cfg[key] is None:
            problems.append(f"missing required setting {key!r} (or give --truth)")
    if cfg["covariate_file"]:
        if cfg["covariates"]:
            problems.append("give either covariate specs or a covariate file, not both")
        _, cols = io.read_covariate_table(cfg["covariate_file"])
        x = CovariateSet.from_columns({k: v.astype(str) for k, v in cols.items()})
        names = list(x.names)
    else:
        names = [s.get("name") for s in cfg["covariates"] if isinstance(s, dict)]
    specs = _covariate_specs(cfg["covariates"], problems)
    params = _model_params(cfg["params"], names, problems)
    eta = _block_config(cfg, problems)
    if z is not None and cfg["n"] != z.n:
        problems.append(f"n={cfg['n']} disagrees with the truth file ({z.n} nodes)")
    if x is not None and cfg["n"] is not None and x.n != cfg["n"]:
        problems.append(f"covariate file has {x.n} nodes, n={cfg['n']}")
    if problems:
        raise ConfigError(problems)
    rng = np.random.default_rng(cfg["seed"])
    sim = SimConfig(cfg["n"], cfg["K"], eta, params, steps=cfg["steps"], burn_in=cfg["burn_in"],
                    seed=cfg["seed"], record_every=cfg["record_every"])
    if z is None:
        z = draw_types(sim.n, sim.eta, rng)
    if x is None:
        x = draw_covariates(specs, z, rng)
    res = run_chain(sim, x, z, rng=rng)
    out = io.ensure_dir(cfg["out"])
    io.write_edge_list(os.path.join(out, "edges.tsv"), res.graph)
    io.write_covariates(os.path.join(out, "covariates.csv"), x)
    io.write_partition(os.path.join(out, "partition.csv"), res.z)
    io.write_csv(os.path.join(out, "trace.csv"), list(res.trace_columns), res.trace.tolist())
    _manifest("simulate", cfg, out, {"steps": sim.steps})
    return res


def _load_partition(path, nodes):
    if path.endswith(".json"):
        z, _, _ = io.read_truth(path)
        if z.n != nodes.n:
            raise DataError(f"{path}: truth covers {z.n} nodes, graph has {nodes.n}")
        return z
    return io.read_partition(path, nodes)


def cmd_estimate(cfg, problems):
    if cfg["sampling"] not in SAMPLING:
        problems.append(f"sampling must be one of {SAMPLING}, got {cfg['sampling']!r}")
    if cfg["quad_form"] not in ("derived", "literal"):
        problems.append("quad_form must be 'derived' or 'literal'")
    for key in ("K_max", "em_iters", "ratio"):
        if cfg[key] is not None and cfg[key] < 1:
            problems.append(f"{key} must be at least 1")
    if cfg["use"] and not cfg["covariate_file"]:
        problems.append("covariates selected with 'use' but no covariate_file given")
    if problems:
        raise ConfigError(problems)
    net = io.load_network(cfg["edges"], cfg["covariate_file"], cfg["use"], cfg["min_category_size"])
    out = io.ensure_dir(cfg["out"])
    g, x = net.graph, net.covariates
    extra = {"n": g.n, "m": g.m, "covariates": list(x.names)}
    if cfg["partition"]:
        z = _load_partition(cfg["partition"], net.nodes)
        extra["partition_source"] = cfg["partition"]
    else:
        res = em_run(g, x, K_max=cfg["K_max"], iters=cfg["em_iters"], seed=cfg["seed"], tol=cfg["tol"],
                     quad_form=cfg["quad_form"], max_nnz=cfg["max_nnz"],
                     checkpoint_dir=cfg["checkpoint_dir"], use_covariates=not cfg["no_covariates"])
        z = res.assignment
        io.write_partition(os.path.join(out, "initial_partition.csv"), res.initial, net.nodes)
        io.write_trace(os.path.join(out, "lower_bound.csv"), res.trace)
        extra.update(em_iterations=res.iterations, em_converged=res.converged,
                     initial_blocks=res.initial.K, yule_vs_initial=yule_coefficient(res.initial, z))
    io.write_partition(os.path.join(out, "partition.csv"), z, net.nodes)
    sizes = z.sizes()
    hist = np.bincount(sizes)
    io.write_csv(os.path.join(out, "block_sizes.csv"), ["size", "count"],
                 [[s, int(c)] for s, c in enumerate(hist) if c])
    est = estimate(g, x, z, sampling=cfg["sampling"], ratio=cfg["ratio"], seed=cfg["seed"])
    io.write_json(os.path.join(out, "coefficients.json"), est.to_dict())
    io.write_csv(os.path.join(out, "coefficients.csv"), ["term", "within", "within_se", "between", "between_se"],
                 coefficient_table(est))
    extra["blocks"] = z.K
    _manifest("estimate", cfg, out, extra)
    return est


def cmd_stats(cfg, problems):
    if problems:
        raise ConfigError(problems)
    net = io.load_network(cfg["edges"], cfg["covariate_file"])
    g, x = net.graph, net.covariates
    st = graph_stats(g)
    out = io.ensure_dir(cfg["out"])
    io.write_csv(os.path.join(out, "degree_histogram.csv"), ["degree", "count"],
                 [[d, int(c)] for d, c in enumerate(st.degree_histogram) if c])
    e = g.edges
    report = {"n": st.n, "m": st.m, "density": st.density, "two_stars": st.two_stars, "triangles": st.triangles}
    report["covariate_match_rate"] = {
        nm: float((x.codes[e[:, 0], s] == x.codes[e[:, 1], s]).mean()) if g.m else 0.0
        for s, nm in enumerate(x.names)
    }
    if cfg["partition"]:
        z = _load_partition(cfg["partition"], net.nodes).z
        inside = z[e[:, 0]] == z[e[:, 1]]
        sizes = np.bincount(z).astype(np.int64)
        pw = int((sizes * (sizes - 1) // 2).sum())
        pb = g.n * (g.n - 1) // 2 - pw
        mw = int(inside.sum())
        report.update(within_edges=mw, between_edges=g.m - mw,
                      within_share=mw / g.m if g.m else 0.0,
                      within_density=mw / pw if pw else 0.0,
                      between_density=(g.m - mw) / pb if pb else 0.0)
    io.write_json(os.path.join(out, "stats.json"), report)
    return report


def _partition_table(path):
    # truth files index blocks by the dense node ids written by synth
    if path.endswith(".json"):
        z, _, _ = io.read_truth(path)
        return {str(i): str(k) for i, k in enumerate(z.z.tolist())}
    return io.read_partition_table(path)


def cmd_compare(cfg, problems):
    if problems:
        raise ConfigError(problems)
    a = _partition_table(cfg["partition_a"])
    b = _partition_table(cfg["partition_b"])
    if set(a) != set(b):
        raise DataError(f"partitions cover different node sets ({len(a)} vs {len(b)} nodes, "
                        f"{len(set(a) ^ set(b))} differ)")
    ids = sorted(a)
    za = BlockAssignment.from_labels([a[t] for t in ids])
    zb = BlockAssignment.from_labels([b[t] for t in ids])
    report = {"yule": yule_coefficient(za, zb), "n": len(ids)}
    for tag, z in (("a", za), ("b", zb)):
        s = partition_summary(z)
        report[tag] = {"blocks": s.n_blocks, "median_size": s.median, "iqr_size": s.iqr, "largest": s.largest}
    out = io.ensure_dir(cfg["out"])
    io.write_json(os.path.join(out, "compare.json"), report)
    return report


COMMANDS = {"synth": cmd_synth, "simulate": cmd_simulate, "estimate": cmd_estimate,
            "stats": cmd_stats, "compare": cmd_compare}


def build_parser():
    p = argparse.ArgumentParser(prog="blocknet", description="Block recovery and payoff estimation for strategic network formation.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with settings (keys as the long options)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int, help="cap on worker threads")
        sp.add_argument("--out", help="output directory")
        return sp

    def model_opts(sp):
        sp.add_argument("--n", type=int)
        sp.add_argument("--K", type=int)
        sp.add_argument("--steps", type=int)

    s = common(sub.add_parser("synth", help="draw a synthetic dataset with known parameters"))
    model_opts(s)
    s.add_argument("--method", choices=["factorized", "chain"])

    s = common(sub.add_parser("simulate", help="run the formation chain and record statistics"))
    model_opts(s)
    s.add_argument("--burn-in", dest="burn_in", type=int)
    s.add_argument("--record-every", dest="record_every", type=int)
    s.add_argument("--truth", help="ground-truth JSON supplying blocks and parameters")
    s.add_argument("--covariate-file", dest="covariate_file")

    s = common(sub.add_parser("estimate", help="recover blocks, then fit payoff parameters"))
    s.add_argument("--edges")
    s.add_argument("--covariate-file", dest="covariate_file")
    s.add_argument("--use", action="append", help="covariate column to use (repeatable; default all)")
    s.add_argument("--K-max", dest="K_max", type=int)
    s.add_argument("--em-iters", dest="em_iters", type=int)
    s.add_argument("--tol", type=float)
    s.add_argument("--sampling", choices=list(SAMPLING))
    s.add_argument("--ratio", type=int, help="non-links kept per link under case-control sampling")
    s.add_argument("--partition", help="fixed block assignment (CSV or truth JSON); skips block recovery")
    s.add_argument("--no-covariates", dest="no_covariates", action="store_true",
                   help="ignore covariates during block recovery")
    s.add_argument("--checkpoint-dir", dest="checkpoint_dir")
    s.add_argument("--max-nnz", dest="max_nnz", type=int)
    s.add_argument("--min-category-size", dest="min_category_size", type=int)
    s.add_argument("--quad-form", dest="quad_form", choices=["derived", "literal"])

    s = common(sub.add_parser("stats", help="descriptive statistics of a network"))
    s.add_argument("--edges")
    s.add_argument("--covariate-file", dest="covariate_file")
    s.add_argument("--partition")

    s = common(sub.add_parser("compare", help="compare two partitions"))
    s.add_argument("partition_a", nargs="?")
    s.add_argument("partition_b", nargs="?")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, problems = resolve_config(args.command, args)
        _accel.set_threads(cfg["threads"])
        COMMANDS[args.command](cfg, problems)
    except BlocknetError as exc:
        kind = type(exc).__name__
        if isinstance(exc, ConfigError) and len(exc.problems) > 1:
            print(f"error ({kind}):", file=sys.stderr)
            for prob in exc.problems:
                print(f"  - {prob}", file=sys.stderr)
        else:
            print(f"error ({kind}): {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error (DataError): {exc.filename}: no such file", file=sys.stderr)
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
