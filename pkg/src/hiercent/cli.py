"""Batch command line: ``hiercent {stats,measures,pipeline}``."""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import logging
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__, analysis, datasets, export
from .analysis import EVAL_GROUPS, MeasureParams
from .centrality import CENTRALITY_KINDS
from .evaluation import EVAL_MEASURES, EvalParams
from .graph import GraphError, ParseOptions, graph_stats, largest_connected_component, load_edge_list
from .hierarchy import HIERARCHY_KINDS

log = logging.getLogger("hiercent")

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2
ALL_MEASURES = HIERARCHY_KINDS + CENTRALITY_KINDS
BUNDLED_PREFIX = "bundled:"
EDGE_SUFFIXES = {".edges", ".txt", ".csv", ".tsv", ".el", ".edgelist", ".mtx"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    output: str | None = None
    measures: list[str] = field(default_factory=lambda: list(ALL_MEASURES))
    evals: list[str] = field(default_factory=lambda: list(EVAL_MEASURES))
    rbo_p: list[float] = field(default_factory=lambda: [0.5, 0.9])
    topk: int | None = None
    rbo_ties: str = "index"
    threshold: float = analysis.THRESHOLD
    k: int | None = None
    seed: int = 0
    katz_s: float | None = None
    pagerank_d: float = 0.85
    pagerank_tol: float = 1e-10
    pagerank_max_iters: int = 1000
    local_distinct: bool = False
    schulze_abs: bool = False
    ignore_extra_columns: bool = False
    jobs: int = 1
    format: str = "both"
    strict: bool = False

    def validate(self):
        if not self.inputs:
            raise ConfigError("at least one --input is required")
        if not 0 < self.threshold <= 1:
            raise ConfigError(f"--threshold must lie in (0, 1], got {self.threshold}")
        if self.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        bad = [m for m in self.measures if m not in ALL_MEASURES]
        if bad:
            raise ConfigError(f"unknown measures {bad}; choose from {list(ALL_MEASURES)}")
        bad = [e for e in self.evals if e not in EVAL_MEASURES]
        if bad:
            raise ConfigError(f"unknown evaluation measures {bad}; choose from {list(EVAL_MEASURES)}")
        if any(not 0 < p < 1 for p in self.rbo_p):
            raise ConfigError("--rbo-p values must lie in (0, 1)")
        if self.topk is not None and self.topk < 1:
            raise ConfigError("--topk must be positive")
        if self.k is not None and self.k < 1:
            raise ConfigError("--k must be positive")
        if self.command == "pipeline" and set(self.measures) != set(ALL_MEASURES):
            raise ConfigError("the pipeline needs all ten measures; --measures only applies to 'measures'")

    def measure_params(self) -> MeasureParams:
        return MeasureParams(self.katz_s, self.pagerank_d, self.pagerank_tol, self.pagerank_max_iters,
                             self.local_distinct)

    def eval_params(self) -> list[EvalParams]:
        return analysis.standard_eval_params(self.rbo_p, self.topk, self.evals, self.rbo_ties)


def expand_inputs(inputs: Sequence[str]) -> list[tuple[str, str]]:
    """(network name, source) pairs; directories expand to their edge files, sorted."""
    out = []
    for item in inputs:
        if item.startswith(BUNDLED_PREFIX):
            name = item[len(BUNDLED_PREFIX):]
            try:
                out.append((name, str(datasets.path(name))))
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
            continue
        p = Path(item)
        if p.is_dir():
            files = sorted(f for f in p.iterdir() if f.is_file() and f.suffix.lower() in EDGE_SUFFIXES)
            if not files:
                log.warning("%s: directory holds no edge-list files", p)
            out.extend((f.stem, str(f)) for f in files)
        else:
            out.append((p.stem, str(p)))
    names = [n for n, _ in out]
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise ConfigError(f"duplicate network names {dup}; rename the input files")
    return out


@dataclass
class NetworkResult:
    name: str
    source: str
    n_input: int = 0
    m_input: int = 0
    labels: tuple = ()
    stats: object = None
    hierarchy: dict = field(default_factory=dict)
    centrality: dict = field(default_factory=dict)
    matrices: dict = field(default_factory=dict)
    error: str | None = None


def _load(name: str, source: str, cfg: RunConfig):
    opts = ParseOptions(extra_columns="ignore" if cfg.ignore_extra_columns else "error")
    g = load_edge_list(source, opts, name=source)
    lcc = largest_connected_component(g)
    if lcc.n_nodes != g.n_nodes:
        log.info("%s: kept largest component, %d of %d nodes", name, lcc.n_nodes, g.n_nodes)
    return g, lcc


def process_network(name: str, source: str, cfg: RunConfig) -> NetworkResult:
    res = NetworkResult(name, source)
    try:
        g, lcc = _load(name, source, cfg)
        res.n_input, res.m_input = g.n_nodes, g.n_edges
        res.labels = lcc.labels
        if cfg.command == "stats":
            res.stats = graph_stats(lcc)
            return res
        if cfg.command == "measures":
            meas = _selected_measures(lcc, name, cfg)
        else:
            res.stats = graph_stats(lcc)
            meas = analysis.compute_measures(lcc, name, cfg.measure_params())
            res.matrices = analysis.all_combination_matrices(meas, cfg.eval_params())
        res.hierarchy = {k: v for k, v in meas.hierarchy.items() if k in cfg.measures}
        res.centrality = {k: v for k, v in meas.centrality.items() if k in cfg.measures}
    except (OSError, ValueError, ArithmeticError) as exc:
        msg = str(exc)
        res.error = msg if source in msg else f"{source}: {msg}"
    return res


def _selected_measures(g, name: str, cfg: RunConfig) -> analysis.NetworkMeasures:
    from . import centrality as cen
    from . import hierarchy as hier

    mp = cfg.measure_params()
    hfun: dict[str, Callable] = {
        "core": hier.core_decompose,
        "truss": lambda g: hier.truss_decompose(g)[1],
        "lrc": hier.local_reaching_centrality,
        "tp": hier.triangle_participation,
    }
    cfun: dict[str, Callable] = {
        "degree": cen.degree_centrality,
        "local": lambda g: cen.local_centrality(g, mp.local_distinct),
        "betweenness": cen.betweenness_centrality,
        "cf_closeness": cen.current_flow_closeness,
        "katz": lambda g: cen.katz_centrality(g, mp.katz_s),
        "pagerank": lambda g: cen.pagerank_centrality(g, mp.pagerank_d, mp.pagerank_tol, mp.pagerank_max_iters),
    }
    return analysis.NetworkMeasures(
        name, g,
        {k: f(g) for k, f in hfun.items() if k in cfg.measures},
        {k: f(g) for k, f in cfun.items() if k in cfg.measures},
    )


def run_networks(cfg: RunConfig, items: list[tuple[str, str]]) -> list[NetworkResult]:
    """Process networks on a bounded pool; results come back in input order."""
    if cfg.jobs == 1 or len(items) == 1:
        results = []
        for name, src in items:
            r = process_network(name, src, cfg)
            results.append(r)
            if r.error and cfg.strict:
                break
        return results
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        futures = [pool.submit(process_network, name, src, cfg) for name, src in items]
        results = []
        for fut in futures:
            r = fut.result()
            results.append(r)
            if r.error and cfg.strict:
                for f in futures:
                    f.cancel()
                break
        return results


class Bundle:
    """Tracks every file written under the output root."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[str] = []

    def write(self, rel: str, text: str):
        path = export.write_text(self.root / rel, text)
        self.files.append(rel)
        return path

    def manifest_entries(self) -> list[dict]:
        out = []
        for rel in self.files:
            data = (self.root / rel).read_bytes()
            out.append({"path": rel, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
        return out


def _write_measures(bundle: Bundle, r: NetworkResult):
    params = {}
    for kind, hs in r.hierarchy.items():
        bundle.write(f"{r.name}/measures/hierarchy_{kind}.csv",
                     export.scores_csv(r.labels, {"raw": hs.raw, "level": hs.level}))
        params[f"hierarchy_{kind}"] = hs.params
    for kind, cs in r.centrality.items():
        bundle.write(f"{r.name}/measures/{kind}.csv", export.scores_csv(r.labels, {"value": cs.values}))
        params[kind] = cs.params
    bundle.write(f"{r.name}/measures/params.json", export.json_text({"network": r.name, "params": params}))


def _report_errors(results: list[NetworkResult]) -> int:
    failed = 0
    for r in results:
        if r.error:
            failed += 1
            log.error("%s", r.error)
    return failed


def _versions() -> dict:
    import scipy

    return {"hiercent": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def cmd_stats(cfg: RunConfig) -> int:
    items = expand_inputs(cfg.inputs)
    results = run_networks(cfg, items)
    failed = _report_errors(results)
    rows = [(r.name, r.stats) for r in results if not r.error]
    text = export.stats_csv(rows)
    if cfg.output:
        root = Path(cfg.output)
        for name, s in rows:
            export.write_text(root / name / "stats.csv", export.stats_csv([(name, s)]))
        export.write_text(root / "stats.csv", text)
    else:
        sys.stdout.write(text)
    return EXIT_PARTIAL if failed or len(results) < len(items) else EXIT_OK


def cmd_measures(cfg: RunConfig) -> int:
    if not cfg.output:
        raise ConfigError("'measures' needs --output")
    items = expand_inputs(cfg.inputs)
    results = run_networks(cfg, items)
    failed = _report_errors(results)
    bundle = Bundle(Path(cfg.output))
    for r in results:
        if not r.error:
            _write_measures(bundle, r)
    return EXIT_PARTIAL if failed or len(results) < len(items) else EXIT_OK


def _kmeans_k(cfg: RunConfig, eval_id: str, n_networks: int) -> int:
    default = 3 if eval_id in analysis.CORRELATIONS or eval_id == "correlation" else 2
    k = cfg.k or default
    if k > n_networks:
        log.warning("k-means %s: k=%d exceeds %d networks, using k=%d", eval_id, k, n_networks, n_networks)
        k = n_networks
    return k


def cmd_pipeline(cfg: RunConfig) -> int:
    if not cfg.output:
        raise ConfigError("'pipeline' needs --output")
    items = expand_inputs(cfg.inputs)
    root = Path(cfg.output)
    bundle = Bundle(root)
    results = run_networks(cfg, items)
    failed = _report_errors(results)
    ok = [r for r in results if not r.error]
    stages: dict[str, str] = {}
    want_csv = cfg.format in ("csv", "both")
    want_json = cfg.format in ("json", "both")

    for r in ok:
        bundle.write(f"{r.name}/stats.csv", export.stats_csv([(r.name, r.stats)]))
        _write_measures(bundle, r)
        for eid, m in r.matrices.items():
            if want_csv:
                bundle.write(f"{r.name}/combos_{eid}.csv", export.combination_csv(m))
            if want_json:
                bundle.write(f"{r.name}/combos_{eid}.json", export.json_text(m.to_dict()))

    eval_ids = [e.id for e in cfg.eval_params()]
    names = [r.name for r in ok]

    def stage(label: str, fn: Callable[[], None]):
        try:
            fn()
            stages.setdefault(label, "ok")
        except Exception as exc:  # a failed stage must not sink the others
            log.exception("stage %s failed", label)
            stages[label] = f"failed: {exc}"

    if not ok:
        stages["aggregate"] = "skipped: no network processed"
    else:
        def rankings():
            for eid in eval_ids:
                rk = analysis.binarize_and_rank({r.name: [r.matrices[eid]] for r in ok}, cfg.threshold)
                bundle.write(f"aggregate/ranking_{eid}.csv", export.ranking_csv(rk))
            for group, ids in EVAL_GROUPS.items():
                if all(i in eval_ids for i in ids) and len(ids) > 1:
                    rk = analysis.binarize_and_rank({r.name: [r.matrices[i] for i in ids] for r in ok},
                                                    cfg.threshold)
                    bundle.write(f"aggregate/ranking_{group}.csv", export.ranking_csv(rk))
        stage("ranking", rankings)

        def schulze():
            for eid in eval_ids:
                tally = analysis.schulze_rank([r.matrices[eid] for r in ok], use_abs=cfg.schulze_abs)
                bundle.write(f"aggregate/schulze_{eid}.json", export.json_text({"eval": eid, **tally.to_dict()}))
        stage("schulze", schulze)

        if len(ok) < 2:
            log.warning("network comparison and clustering need two or more networks; skipped")
            stages["network_correlation"] = "skipped: fewer than 2 networks"
            stages["clustering"] = "skipped: fewer than 2 networks"
        else:
            def netcorr():
                for eid in eval_ids:
                    nc = analysis.network_correlation_matrix([r.matrices[eid] for r in ok])
                    bundle.write(f"aggregate/netcorr_{eid}.csv", export.netcorr_csv(nc))
            stage("network_correlation", netcorr)

            def clusters():
                for eid in eval_ids:
                    feats = np.stack([r.matrices[eid].flat() for r in ok])
                    ca = analysis.kmeans(feats, _kmeans_k(cfg, eid, len(ok)), cfg.seed, names=names)
                    bundle.write(f"aggregate/clusters_{eid}.json", export.json_text({"eval": eid, **ca.to_dict()}))
            stage("clustering", clusters)

    manifest = {
        "tool": "hiercent",
        "versions": _versions(),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": asdict(cfg),
        "networks": [
            {"name": r.name, "source": r.source, "status": "error" if r.error else "ok",
             "error": r.error, "input_nodes": r.n_input, "input_edges": r.m_input,
             "lcc_nodes": len(r.labels) if not r.error else None}
            for r in results
        ],
        "stages": stages,
        "complete": not failed and len(results) == len(items) and all(v == "ok" or v.startswith("skipped")
                                                                        for v in stages.values()),
        "files": bundle.manifest_entries(),
    }
    export.write_text(root / "aggregate" / "manifest.json", export.json_text(manifest))
    return EXIT_OK if manifest["complete"] else EXIT_PARTIAL


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _names(text: str) -> list[str]:
    return [t for t in text.replace(",", " ").split() if t]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hiercent", description="Hierarchy and centrality measures on undirected graphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--input", "-i", nargs="+", required=True, dest="inputs",
                        help="edge-list files, directories of them, or bundled:karate / bundled:lesmis")
        sp.add_argument("--output", "-o", help="output directory")
        sp.add_argument("--jobs", "-j", type=int, default=1, help="worker processes")
        sp.add_argument("--strict", action="store_true", help="abort on the first failing input")
        sp.add_argument("--ignore-extra-columns", action="store_true",
                        help="accept lines with weights or other trailing columns")
        sp.add_argument("-v", "--verbose", action="count", default=0)

    def measure_opts(sp):
        sp.add_argument("--katz-s", type=float, default=None, help="Katz attenuation (default 0.9/lambda_max)")
        sp.add_argument("--pagerank-d", type=float, default=0.85)
        sp.add_argument("--pagerank-tol", type=float, default=1e-10)
        sp.add_argument("--pagerank-max-iters", type=int, default=1000)
        sp.add_argument("--local-distinct", action="store_true",
                        help="local centrality counts distinct nodes within two hops")

    sp = sub.add_parser("stats", help="topological statistics of each network's largest component")
    common(sp)

    sp = sub.add_parser("measures", help="per-node hierarchy and centrality scores")
    common(sp)
    measure_opts(sp)
    sp.add_argument("--measures", type=_names, default=list(ALL_MEASURES),
                    help=f"comma-separated subset of {','.join(ALL_MEASURES)}")

    sp = sub.add_parser("pipeline", help="full evaluation: combination matrices and cross-network analysis")
    common(sp)
    measure_opts(sp)
    sp.add_argument("--measures", type=_names, default=list(ALL_MEASURES), help=argparse.SUPPRESS)
    sp.add_argument("--eval", type=_names, default=list(EVAL_MEASURES), dest="evals",
                    help=f"comma-separated subset of {','.join(EVAL_MEASURES)}")
    sp.add_argument("--rbo-p", type=_floats, default=[0.5, 0.9], help="RBO persistence values, e.g. 0.5,0.9")
    sp.add_argument("--rbo-ties", choices=("index", "group"), default="index")
    sp.add_argument("--topk", type=int, default=None, help="top-k cutoff (default: 10, or 10%% from 150 nodes)")
    sp.add_argument("--threshold", type=float, default=analysis.THRESHOLD)
    sp.add_argument("--k", type=int, default=None, help="k-means clusters (default 3 correlations, 2 similarities)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--schulze-abs", action="store_true", help="rank Schulze ballots by |value|")
    sp.add_argument("--format", choices=("csv", "json", "both"), default="both")
    return p


COMMANDS = {"stats": cmd_stats, "measures": cmd_measures, "pipeline": cmd_pipeline}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    verbose = args.pop("verbose")
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    known = set(RunConfig.__dataclass_fields__)
    cfg = RunConfig(**{k: v for k, v in args.items() if k in known})
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"hiercent: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
