"""Command-line entry point: ``pathmetrics <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .classify import DEFAULT_BINS, DEFAULT_REFERENCE_N, TopologyKind, canonical_signature, classify_network, signature
from .export import similarity_csv, similarity_dot
from .hierarchy import (
    HierarchyTree,
    agglomerative_cluster,
    collapse_by_pair,
    endpoint_distance,
    flatten,
    symmetrize,
    test_schedule,
)
from .ingest import dump_archive, ingest_lines, load_archive, path_count_matrix, path_frequency_histogram
from .metrics import MetricKind, pairwise_matrix, similarity_map
from .model import DirectedEdge, PathSet, WeightScheme, build_routing_matrix
from .synth import scenario_log, to_structured, to_text, topology_log

log = logging.getLogger("pathmetrics")

DEFAULT_SEED = 0


class CliError(Exception):
    pass


# -- io helpers ------------------------------------------------------------------


def _open_in(path: str) -> TextIO:
    if path == "-":
        return sys.stdin
    try:
        return open(path, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | Path, text: str) -> None:
    if str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_paths(path: str) -> PathSet:
    with _open_in(path) as fh:
        return load_archive(fh)


def _weight_scheme(args: argparse.Namespace, ps: PathSet) -> WeightScheme:
    if args.weights == "indicator":
        return WeightScheme.indicator()
    if args.weights == "frequency":
        return WeightScheme.frequency()
    if not args.weights_file:
        raise CliError("--weights file needs --weights-file")
    by_label = {label: p for p, label in ps.labels().items()}
    supplied = {}
    with _open_in(args.weights_file) as fh:
        for row in csv.reader(line for line in fh if line.strip() and not line.startswith("#")):
            if row[:1] == ["path"]:
                continue
            if len(row) != 2:
                raise CliError(f"weights file rows must be 'path,weight', got {row}")
            if row[0] not in by_label:
                raise CliError(f"weights file names unknown path {row[0]}")
            supplied[by_label[row[0]]] = float(row[1])
    return WeightScheme.supplied(supplied)


def _read_tree(path: str) -> HierarchyTree:
    with _open_in(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return HierarchyTree.from_dict(json.loads(text))
    return HierarchyTree.from_newick(text)


# -- subcommands -----------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    roster = None
    if args.roster:
        with _open_in(args.roster) as fh:
            roster = [line.strip() for line in fh if line.strip() and not line.startswith("#")]
    with _open_in(args.input) as fh:
        ps, stats, errors = ingest_lines(fh, args.format, args.unknown_hop, roster)
    for err in errors:
        log.warning("%s", err)
    _write(args.output, dump_archive(ps))
    if args.stats:
        _write(args.stats, json.dumps(stats.as_dict(), indent=2) + "\n")
    print(stats.report())
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    ps = _load_paths(args.input)
    out = _outdir(args.output)
    hist = path_frequency_histogram(ps, args.bin_width)
    rows = ["bin_low,bin_high,paths"] + [f"{lo:g},{hi:g},{n}" for (lo, hi), n in hist.items()]
    _write(out / "path_frequency.csv", "\n".join(rows) + "\n")
    endpoints, counts = path_count_matrix(ps)
    lines = ["source," + ",".join(endpoints)]
    lines += [f"{e}," + ",".join(str(v) for v in row) for e, row in zip(endpoints, counts)]
    _write(out / "path_counts.csv", "\n".join(lines) + "\n")
    if args.plot:
        from .plotting import plot_path_frequency

        plot_path_frequency(hist, out / "path_frequency.png")
    totals = ps.pair_totals
    print(f"distinct paths: {len(ps)}")
    print(f"pairs:          {len(totals)}")
    print(f"traces:         {sum(totals.values())}")
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    ps = _load_paths(args.input)
    A = build_routing_matrix(ps, _weight_scheme(args, ps))
    kind = MetricKind.parse(args.metric)
    if kind is MetricKind.JACCARD and A.scheme != "indicator":
        log.info("jaccard ignores path weights")
    _write(args.output, pairwise_matrix(A, kind).to_csv())
    if args.routing_csv:
        _write(args.routing_csv, A.to_csv())
    return 0


def cmd_similarity_map(args: argparse.Namespace) -> int:
    ps = _load_paths(args.input)
    A = build_routing_matrix(ps, _weight_scheme(args, ps))
    try:
        ref = DirectedEdge.parse(args.reference_edge)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    sims = similarity_map(A, ref)
    _write(args.output, similarity_dot(sims, ref, set(ps.endpoints)))
    csv_path = args.csv or (
        str(Path(args.output).with_suffix(".csv")) if args.output != "-" else None
    )
    if csv_path:
        _write(csv_path, similarity_csv(sims, ref))
    return 0


def cmd_hierarchy(args: argparse.Namespace) -> int:
    out = _outdir(args.output)
    if args.tree:
        tree = _read_tree(args.tree)
    else:
        if not args.input:
            raise CliError("hierarchy needs --input ARCHIVE or --tree FILE")
        ps = _load_paths(args.input)
        A = build_routing_matrix(ps, WeightScheme.frequency())
        D = endpoint_distance(collapse_by_pair(A, ps))
        S = symmetrize(D)
        _write(out / "distances.csv", S.to_csv())
        tree = agglomerative_cluster(S, args.linkage)
    if args.cut:
        tree = flatten(tree, args.cut)
    _write(out / "hierarchy.nwk", tree.to_newick())
    _write(out / "hierarchy.json", tree.to_json())
    if args.plot:
        from .plotting import plot_dendrogram

        plot_dendrogram(tree, out / "hierarchy.png")
    print(f"leaves: {len(tree.leaves())}")
    print(f"root height: {tree.root.height:g}")
    print(f"tests per round: {tree.round_size()}")
    if args.schedule:
        sched = test_schedule(tree, args.rounds, args.seed)
        _write(out / "schedule.csv", sched.to_csv())
    return 0


def cmd_schedule(args: argparse.Namespace) -> int:
    tree = _read_tree(args.tree)
    sched = test_schedule(tree, args.rounds, args.seed)
    _write(args.output, sched.to_csv())
    n = len(tree.leaves())
    print(f"tests per round: {tree.round_size()} (all pairs: {n * (n - 1) // 2})", file=sys.stderr)
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    ps = _load_paths(args.input)
    out = _outdir(args.output)
    sig = signature(ps, _weight_scheme(args, ps), args.bins)
    result = classify_network(sig, args.reference_n)
    _write(out / "signature.csv", sig.to_csv())
    _write(out / "classification.json", result.report())
    if args.plot:
        from .plotting import plot_signatures

        panels = {"input": sig}
        panels.update(
            {k.value: canonical_signature(k, args.reference_n, args.bins) for k in TopologyKind}
        )
        plot_signatures(panels, out / "signature.png")
    print(result.report(), end="")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    if bool(args.kind) == bool(args.scenario):
        raise CliError("generate needs exactly one of --kind or --scenario")
    if args.kind:
        if args.n is None:
            raise CliError("--kind needs --n")
        records = topology_log(TopologyKind.parse(args.kind), args.n, args.rounds or 1, args.seed)
    else:
        extra = {}
        if args.n is not None:
            extra["n"] = args.n
        if args.failover_round is not None:
            extra["failover_round"] = args.failover_round
        records = scenario_log(args.scenario, args.rounds, args.seed, **extra)
    text = to_structured(records) if args.format == "structured" else to_text(records)
    _write(args.output, text)
    return 0


# -- parser ----------------------------------------------------------------------


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathmetrics",
        description="Edge similarity analysis of observed network paths.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def weights(p: argparse.ArgumentParser, default: str) -> None:
        p.add_argument("--weights", choices=["indicator", "frequency", "file"], default=default)
        p.add_argument("--weights-file", help="CSV of 'path,weight' with labels src>dst#k")

    p = sub.add_parser("ingest", help="parse a trace log into a path archive")
    p.add_argument("--input", required=True, help="trace log ('-' for stdin)")
    p.add_argument("--output", required=True, help="path archive to write")
    p.add_argument("--format", choices=["auto", "text", "structured"], default="auto")
    p.add_argument("--unknown-hop", choices=["drop", "placeholder"], default="drop")
    p.add_argument("--roster", help="file listing expected endpoint ids, one per line")
    p.add_argument("--stats", help="also write ingest statistics as JSON here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="path frequency histogram and path counts per pair")
    p.add_argument("--input", required=True, help="path archive")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--bin-width", type=_positive_float, default=100.0)
    p.add_argument("--plot", action="store_true", help="also render path_frequency.png")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("metrics", help="pairwise edge distance matrix")
    p.add_argument("--input", required=True, help="path archive")
    p.add_argument("--output", default="-", help="CSV to write (default stdout)")
    p.add_argument("--metric", default="d2", help="vardi|d1|d2|d3 (default d2)")
    weights(p, "frequency")
    p.add_argument("--routing-csv", help="also write the routing matrix as CSV")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("similarity-map", help="DOT graph colored by similarity to one edge")
    p.add_argument("--input", required=True, help="path archive")
    p.add_argument("--reference-edge", required=True, help="edge label, e.g. 'Lin->B'")
    p.add_argument("--output", required=True, help="DOT file to write")
    p.add_argument("--csv", help="sidecar CSV (default: DOT path with .csv suffix)")
    weights(p, "frequency")
    p.set_defaults(func=cmd_similarity_map)

    p = sub.add_parser("hierarchy", help="cluster endpoints into a hierarchy")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="path archive")
    src.add_argument("--tree", help="existing tree (JSON or Newick) instead of clustering")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--linkage", choices=["average", "single", "complete"], default="average")
    p.add_argument("--cut", type=float, nargs="+", help="flatten at these decreasing heights")
    p.add_argument("--schedule", action="store_true", help="also write schedule.csv")
    p.add_argument("--rounds", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--plot", action="store_true", help="also render hierarchy.png")
    p.set_defaults(func=cmd_hierarchy)

    p = sub.add_parser("schedule", help="test rounds from a hierarchy tree")
    p.add_argument("--tree", required=True, help="tree file (JSON or Newick)")
    p.add_argument("--output", default="-", help="CSV to write (default stdout)")
    p.add_argument("--rounds", type=_positive_int, default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("classify", help="signature histogram and nearest canonical topology")
    p.add_argument("--input", required=True, help="path archive")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--bins", type=_positive_int, default=DEFAULT_BINS)
    p.add_argument("--reference-n", type=_positive_int, default=DEFAULT_REFERENCE_N)
    weights(p, "indicator")
    p.add_argument("--plot", action="store_true", help="also render signature.png")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("generate", help="synthesize a trace log")
    p.add_argument("--kind", help="ring_unidirectional|ring_bidirectional|star|mesh")
    p.add_argument("--scenario", help="nj-table|lb-5050|lb-4way|failover|enterprise|four-block")
    p.add_argument("--n", type=int, help="node count (kind) or size parameter (scenario)")
    p.add_argument("--rounds", type=_positive_int)
    p.add_argument("--failover-round", type=int)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.add_argument("--output", default="-", help="log file to write (default stdout)")
    p.set_defaults(func=cmd_generate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (CliError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"pathmetrics {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
