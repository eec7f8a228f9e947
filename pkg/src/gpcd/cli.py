"""Command-line driver: build-tree, detect, eval and synth."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .config import FITNESS_VARIANTS, GeneticConfig, InfeasibleConfigError
from .engine import evolve
from .evaluation import GroundTruth, generate_benchmark, pairwise_metrics
from .graph import GraphFormatError, load_graph
from .hierarchy import detect_hierarchy
from .io import (TreeFormatError, load_binary_tree, load_community_tree, load_ground_truth,
                 load_partition, save_binary_tree, save_community_tree, save_ground_truth,
                 save_need, save_partition)
from .representation import (DEFAULT_MU, DEFAULT_TEXT_CANDIDATES, EmbeddingFormatError, attach_embeddings,
                             load_documents, load_embeddings, pseudo_ground_truth, save_embeddings,
                             text_query_need, vertex_query_need)
from .tree import DEFAULT_DEPTH, binarize, eligible_links

log = logging.getLogger("gpcd")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2


class InputError(Exception):
    """Bad user input; maps to exit code 1."""


@dataclass
class RunConfig:
    """Everything needed to reproduce a ``detect`` run."""

    tree: str | None = None
    embeddings: str | None = None
    query_vertices: str | None = None
    query_text: str | None = None
    docs: str | None = None
    mu: float = DEFAULT_MU
    t: int = DEFAULT_TEXT_CANDIDATES
    out: str = "partition.tsv"
    report: str = "report.json"
    workers: int = 1
    genetic: GeneticConfig = field(default_factory=GeneticConfig)

    def to_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "genetic"}
        data.update(self.genetic.to_dict())
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        own = {f.name for f in fields(cls)} - {"genetic"}
        kwargs = {k: v for k, v in data.items() if k in own}
        return cls(**kwargs, genetic=GeneticConfig.from_dict(data))


# CLI flag -> GeneticConfig field
GENETIC_FLAGS = {
    "K": "communities", "P": "population", "T": "iterations", "d": "depth", "lambda": "lam",
    "crossover_rate": "crossover_rate", "mutation_rate": "mutation_rate", "top_n": "top_n",
    "shards": "shards", "seed": "seed", "fitness": "fitness",
}


def read_config_file(path: str) -> dict:
    """Flat key/value settings from a TOML file or a previous run report."""
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".json"):
        data = json.loads(text)
        return data.get("config", data)
    data = tomllib.loads(text)
    flat = {}
    for key, value in data.items():
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return {k.replace("-", "_"): v for k, v in flat.items()}


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then ``--config``, then explicit flags."""
    merged = RunConfig().to_dict()
    if args.config:
        settings = read_config_file(args.config)
        unknown = set(settings) - set(merged)
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(settings)
    for flag in ("tree", "embeddings", "query_vertices", "query_text", "docs", "mu", "t", "out",
                 "report", "workers"):
        value = getattr(args, flag)
        if value is not None:
            merged[flag] = value
    for flag, name in GENETIC_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            merged[name] = value
    try:
        return RunConfig.from_dict(merged)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid configuration: {exc}") from None


def parse_vertex_query(spec: str, names: list[str]) -> dict[int, float]:
    index = {name: i for i, name in enumerate(names)}
    query: dict[int, float] = {}
    for item in filter(None, (s.strip() for s in spec.split(","))):
        name, sep, count = item.rpartition(":")
        if not sep:
            name, count = item, "1"
        if name not in index:
            raise InputError(f"query vertex {name!r} is not in the tree")
        try:
            query[index[name]] = query.get(index[name], 0.0) + float(count)
        except ValueError:
            raise InputError(f"bad query count in {item!r}") from None
    if not query:
        raise InputError("vertex query is empty")
    return query


def cmd_build_tree(args: argparse.Namespace) -> int:
    g = load_graph(args.graph, directed=args.directed)
    if args.import_tree:
        tc = load_community_tree(args.import_tree, g.names)
    else:
        tc = detect_hierarchy(g, seed=args.seed)
    if args.export_community_tree:
        save_community_tree(args.export_community_tree, tc, g.names)
    tb = binarize(g, tc, expand_leaves=not args.no_expand_leaves, depth_bound=args.depth_bound)
    if args.embeddings:
        attach_embeddings(tb, load_embeddings(args.embeddings, g))
    tb.validate()
    save_binary_tree(args.out, tb)
    print(f"nodes={len(tb)} links={len(tb.links())} eligible_links={len(eligible_links(tb))} "
          f"max_depth={tb.max_depth()} vertices={g.num_vertices}")
    return EXIT_OK


def cmd_detect(args: argparse.Namespace) -> int:
    rc = resolve_run_config(args)
    if not rc.tree or not rc.embeddings:
        raise InputError("detect needs --tree and --embeddings")
    if bool(rc.query_vertices) == bool(rc.query_text):
        raise InputError("give exactly one of --query-vertices or --query-text")
    cfg = rc.genetic
    tb = load_binary_tree(rc.tree)
    names = list(tb.vertex_names)
    store = load_embeddings(rc.embeddings, names)
    if rc.query_vertices:
        need = vertex_query_need(store, parse_vertex_query(rc.query_vertices, names))
    else:
        if not rc.docs:
            raise InputError("--query-text needs --docs")
        need = text_query_need(store, load_documents(rc.docs, names, mu=rc.mu), rc.query_text, t=rc.t)
    if cfg.top_n > len(store):
        raise InputError(f"top_n={cfg.top_n} exceeds the vertex count {len(store)}")
    gt = pseudo_ground_truth(store, need, cfg.top_n)

    result = evolve(tb, need, store, gt, cfg, workers=rc.workers)
    save_partition(rc.out, result.partition, names)
    report = {
        "config": rc.to_dict(),
        "best": {"genes": list(result.best.genes), "fitness": result.best.fitness,
                 "selection_order": list(result.best.selection_order)},
        "communities_achieved": len(result.partition),
        "generations": [asdict(h) for h in result.history],
        "wall_time": result.wall_time,
    }
    Path(rc.report).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    print(f"fitness={result.best.fitness:.6f} communities={len(result.partition)} "
          f"generations={len(result.history)}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    labels = load_partition(args.pred)
    names = sorted(labels)
    index = {name: i for i, name in enumerate(names)}
    comms = []
    for line in load_ground_truth(args.gt):
        missing = [v for v in line if v not in index]
        if missing:
            raise InputError(f"ground-truth vertices missing from prediction: {', '.join(missing)}")
        comms.append([index[v] for v in line])
    try:
        gt = GroundTruth(tuple(tuple(c) for c in comms))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    report = pairwise_metrics([labels[n] for n in names], gt)
    if args.json:
        print(json.dumps(report.as_dict()))
    else:
        print(f"f1={report.f1:.6f} rand={report.rand:.6f} jaccard={report.jaccard:.6f}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    bench = generate_benchmark(args.blocks, args.subblocks_per_block, args.vertices_per_subblock,
                               args.p_in_sub, args.p_in_block, args.p_cross, args.noise, args.seed,
                               args.target_subblock)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = bench.graph
    names = list(g.names)
    with open(out / "graph.tsv", "w", encoding="utf-8") as fh:
        for (u, v), w in zip(g.edges, g.weights):
            fh.write(f"{names[u]}\t{names[v]}\t{w:g}\n")
    save_embeddings(out / "embeddings.tsv", bench.embeddings, names)
    save_community_tree(out / "tree.json", bench.planted_tree, names)
    save_need(out / "need.json", bench.need, names)
    save_ground_truth(out / "gt.txt", bench.personalized_gt, names)
    with open(out / "docs.tsv", "w", encoding="utf-8") as fh:
        for v, name in enumerate(names):
            fh.write(f"{name}\tblock{bench.block_of[v]}:1,sub{bench.subblock_of[v]}:2\n")
    print(f"wrote 6 files to {out} (vertices={g.num_vertices} edges={g.num_edges} "
          f"target_subblock={bench.target_subblock})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpcd", description="Personalized community detection on a binary community tree.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-tree", help="offline step: graph -> coded binary community tree")
    p.add_argument("--graph", required=True)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--import-tree", help="nested community tree JSON; skips hierarchy detection")
    p.add_argument("--export-community-tree", help="also write the (detected) community tree JSON")
    p.add_argument("--embeddings", help="attach community embeddings to every node")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth-bound", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--no-expand-leaves", action="store_true",
                   help="keep multi-vertex leaves instead of splitting them into single vertices")
    p.add_argument("--out", default="tree.json")
    p.set_defaults(func=cmd_build_tree)

    p = sub.add_parser("detect", help="online step: evolve a personalized partition")
    p.add_argument("--config", help="TOML settings file or a previous run report (JSON)")
    p.add_argument("--tree")
    p.add_argument("--embeddings")
    p.add_argument("--query-vertices", help="name:count,name:count,...")
    p.add_argument("--query-text")
    p.add_argument("--docs", help="document store for text queries")
    p.add_argument("--mu", type=float)
    p.add_argument("--t", type=int, help="top-likelihood documents used for a text query")
    p.add_argument("--K", type=int)
    p.add_argument("--P", type=int)
    p.add_argument("--T", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--lambda", type=float)
    p.add_argument("--crossover-rate", type=float)
    p.add_argument("--mutation-rate", type=float)
    p.add_argument("--top-n", type=int)
    p.add_argument("--shards", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--fitness", choices=FITNESS_VARIANTS)
    p.add_argument("--out", help="partition file")
    p.add_argument("--report", help="JSON run report")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="pairwise F1/Rand/Jaccard of a partition file against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a synthetic hierarchical benchmark")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--subblocks-per-block", type=int, default=4)
    p.add_argument("--vertices-per-subblock", type=int, default=8)
    p.add_argument("--p-in-sub", type=float, default=0.6)
    p.add_argument("--p-in-block", type=float, default=0.1)
    p.add_argument("--p-cross", type=float, default=0.01)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target-subblock", type=int)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleConfigError as exc:
        print(f"gpcd: infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, GraphFormatError, EmbeddingFormatError, TreeFormatError,
            OSError, ValueError, tomllib.TOMLDecodeError) as exc:
        print(f"gpcd: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
