"""Batch command line: ``slpa {run,eval,bench,synth,project,hierarchy}``.

Exit codes: 0 success, 2 usage error, 3 data/IO error, 4 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .bench import run_bench, sizes_for_edges
from .core import DEFAULT_ITERATIONS, RunConfig, evolve, write_memories
from .errors import ParameterError, SLPAError
from .graph import (
    Cover,
    Graph,
    load_attribute_table,
    load_cover_file,
    load_edge_list,
    project_bipartite,
    write_cover,
    write_edge_list,
)
from .metrics import (
    NMI_VARIANT,
    DEFAULT_STEEPNESS,
    MetricReport,
    default_bins,
    extended_nmi,
    omega_index,
    overlap_fscore,
    overlapping_modularity,
    size_histogram,
)
from .postprocess import (
    DEFAULT_R_SWEEP,
    Threshold,
    containment_forest,
    detect,
    format_hierarchy,
    write_overlap_report,
)
from .synth import PlantedConfig, homogeneous_random_graph, planted_cover_graph

logger = logging.getLogger("slpa")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4
ALL_METRICS = ("nmi", "omega", "fscore", "qov", "hist")
TRUTH_METRICS = {"nmi", "omega", "fscore"}


class UsageError(Exception):
    pass


def _csv_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _csv_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _sizes(text: str) -> list[int]:
    """Parse ``30,40`` or ``30x10`` (ten communities of 30) or a mix."""
    out: list[int] = []
    for tok in text.split(","):
        size, _, times = tok.strip().partition("x")
        out.extend([int(size)] * (int(times) if times else 1))
    return out


def _fmt_r(r: float) -> str:
    return f"{r:g}"


def _seed_list(args) -> list[int]:
    if args.seeds < 1:
        raise UsageError("--seeds must be at least 1")
    return [args.seed_base + k for k in range(args.seeds)]


def cmd_run(args) -> int:
    rs = args.threshold or ([0.5] if args.disjoint else list(DEFAULT_R_SWEEP))
    for r in rs:
        try:
            Threshold(r, args.disjoint)
        except ParameterError as exc:
            raise UsageError(str(exc)) from None
    seeds = _seed_list(args)
    graph = load_edge_list(args.input, bipartite=args.bipartite)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    logger.info("loaded %s from %s", graph, args.input)

    def one(seed: int):
        start = time.perf_counter()
        memories = evolve(graph, RunConfig(args.iterations, seed))
        elapsed = time.perf_counter() - start
        results = [(r, detect(graph, memories, r, args.keep_subsets, args.disjoint)) for r in rs]
        return seed, memories, elapsed, results

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        outcomes = list(pool.map(one, seeds))

    files = []
    timing = ["seed,n,m,T,seconds"]
    for seed, memories, elapsed, results in outcomes:
        timing.append(f"{seed},{graph.n},{graph.m},{args.iterations},{elapsed:.6f}")
        if args.save_memories:
            write_memories(memories, graph, out / f"memory_s{seed}.txt")
        for r, det in results:
            stem = f"r{_fmt_r(r)}_s{seed}"
            write_cover(det.cover, graph, out / f"cover_{stem}.txt")
            write_overlap_report(det.cover, graph, out / f"overlap_{stem}.txt")
            files.append(
                dict(
                    cover=f"cover_{stem}.txt",
                    overlap=f"overlap_{stem}.txt",
                    r=r,
                    seed=seed,
                    communities=len(det.cover),
                    overlapping_nodes=len(det.overlap_counts(graph.n)),
                )
            )
    summary = graph.load_summary
    manifest = dict(
        version=__version__,
        input=str(args.input),
        T=args.iterations,
        r=rs,
        seeds=seeds,
        bipartite=args.bipartite,
        keep_subsets=args.keep_subsets,
        disjoint=args.disjoint,
        n=graph.n,
        m=graph.m,
        duplicate_edges=summary.duplicate_edges if summary else 0,
        self_loops=summary.self_loops if summary else 0,
        outputs=files,
    )
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    (out / "timing.csv").write_text("\n".join(timing) + "\n")
    print(f"wrote {len(files)} covers for {graph} to {out}")
    return EXIT_OK


def _run_metadata(path: Path) -> dict:
    manifest = path.parent / "manifest.json"
    if manifest.exists():
        data = json.loads(manifest.read_text())
        for entry in data.get("outputs", []):
            if entry.get("cover") == path.name:
                return dict(r=entry["r"], T=data.get("T", ""), seed=entry["seed"])
    return {}


def _side_qov(graph: Graph, cover: Cover, side: int) -> float:
    keep = graph.subgraph_nodes(side)
    projected = project_bipartite(graph, side)
    return overlapping_modularity(projected, cover.restrict(keep))


def cmd_eval(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",")] if args.metrics else None
    if metrics is None:
        metrics = ["nmi", "omega", "fscore", "qov"] if args.truth else ["qov"]
    unknown = set(metrics) - set(ALL_METRICS)
    if unknown:
        raise UsageError(f"unknown metrics: {', '.join(sorted(unknown))}")
    if TRUTH_METRICS & set(metrics) and not args.truth:
        raise UsageError(f"metrics {', '.join(sorted(TRUTH_METRICS & set(metrics)))} need --truth")
    if args.hierarchy and not args.attrs:
        raise UsageError("--hierarchy needs --attrs")
    if args.bins and "hist" not in metrics:
        metrics.append("hist")
    if args.qov and "qov" not in metrics:
        metrics.append("qov")

    graph = load_edge_list(args.input, bipartite=args.bipartite)
    truth = load_cover_file(args.truth, graph) if args.truth else None
    table = load_attribute_table(args.attrs, graph) if args.attrs else None
    report = MetricReport(metadata=dict(nmi_variant=NMI_VARIANT, qov_steepness=f"{DEFAULT_STEEPNESS:g}"))
    for path in map(Path, args.covers):
        cover = load_cover_file(path, graph)
        meta = _run_metadata(path)
        tag = dict(run_id=path.stem, **meta)
        if "nmi" in metrics:
            report.add("nmi", extended_nmi(cover, truth, graph.n), **tag)
        if "omega" in metrics:
            report.add("omega", omega_index(cover, truth, graph.n), **tag)
        if "fscore" in metrics:
            conf = overlap_fscore(cover, truth, graph.n)
            report.add("fscore", conf.f_score, **tag)
            report.add("precision", conf.precision, **tag)
            report.add("recall", conf.recall, **tag)
            if conf.actual:
                report.add("on_ratio", conf.detected / conf.actual, **tag)
        if "qov" in metrics:
            if graph.side is not None:
                for side in (1, 2):
                    report.add(f"qov_side{side}", _side_qov(graph, cover, side), **tag)
            else:
                report.add("qov", overlapping_modularity(graph, cover), **tag)
        if "hist" in metrics:
            bins = _csv_floats(args.bins) if args.bins else default_bins(cover)
            counts = size_histogram(cover, bins)
            for k, c in enumerate(counts):
                hi = "]" if k == len(counts) - 1 else ")"
                report.add(f"hist[{bins[k]:g},{bins[k + 1]:g}{hi}", c, **tag)
        if args.hierarchy:
            print(f"# hierarchy of {path}")
            print(format_hierarchy(containment_forest(cover), table), end="")
    if len(args.covers) > 1:
        report.add_summary()
    if args.out:
        Path(args.out).write_text(report.to_csv())
    sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_table())
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.edges:
        sizes = sizes_for_edges(_csv_ints(args.edges), args.degree)
    else:
        sizes = _csv_ints(args.sizes)
    if len(sizes) < 4:
        raise UsageError("bench needs a ladder of at least 4 sizes")
    result = run_bench(sizes, args.degree, args.iterations, _seed_list(args))
    text = result.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    print(result.summary())
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "planted":
        cfg = PlantedConfig(
            n=args.n,
            community_sizes=_sizes(args.sizes),
            overlapping=args.overlapping,
            memberships=args.memberships,
            p_in=args.p_in,
            mu=args.mu,
            seed=args.seed,
        )
        graph, cover = planted_cover_graph(cfg)
        write_cover(cover, graph, out / "truth.txt")
    else:
        graph = homogeneous_random_graph(args.n, args.degree, args.seed)
    write_edge_list(graph, out / "graph.txt")
    print(f"wrote {graph} to {out}")
    return EXIT_OK


def cmd_project(args) -> int:
    graph = load_edge_list(args.input, bipartite=True)
    projected = project_bipartite(graph, args.side)
    if args.out:
        write_edge_list(projected, args.out)
        print(f"wrote side-{args.side} projection {projected} to {args.out}")
    else:
        write_edge_list(projected, sys.stdout)
    return EXIT_OK


def cmd_hierarchy(args) -> int:
    graph = load_edge_list(args.input, bipartite=args.bipartite)
    cover = load_cover_file(args.cover, graph)
    table = load_attribute_table(args.attrs, graph) if args.attrs else None
    forest = containment_forest(cover)
    text = format_hierarchy(forest, table)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    if forest.ambiguous:
        print(f"# {len(forest.ambiguous)} communities have several minimal supersets", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slpa", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def seeds(sp):
        sp.add_argument("--seeds", type=int, default=1, help="number of seeded repetitions")
        sp.add_argument("--seed-base", type=int, default=0, help="first seed (default 0)")

    run = sub.add_parser("run", help="detect communities")
    run.add_argument("-i", "--input", required=True)
    run.add_argument("-T", "--iterations", type=int, default=DEFAULT_ITERATIONS)
    run.add_argument("-r", "--threshold", type=float, action="append",
                     help="repeatable; default sweep 0.01..0.1")
    seeds(run)
    run.add_argument("--bipartite", action="store_true")
    run.add_argument("--keep-subsets", action="store_true")
    run.add_argument("--disjoint", action="store_true", help="one label per node")
    run.add_argument("--save-memories", action="store_true")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--jobs", type=int, default=1)
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="score covers")
    ev.add_argument("covers", nargs="+")
    ev.add_argument("-i", "--input", required=True)
    ev.add_argument("--truth")
    ev.add_argument("--metrics", help="comma list of " + ",".join(ALL_METRICS))
    ev.add_argument("--hist", "--bins", dest="bins", help="comma separated histogram bin edges")
    ev.add_argument("--qov", action="store_true", help="shorthand for adding qov to --metrics")
    ev.add_argument("--bipartite", action="store_true")
    ev.add_argument("--attrs")
    ev.add_argument("--hierarchy", action="store_true")
    ev.add_argument("--format", choices=("table", "csv"), default="table")
    ev.add_argument("--out", help="write the CSV report here")
    ev.set_defaults(func=cmd_eval)

    be = sub.add_parser("bench", help="runtime scaling ladder")
    ladder = be.add_mutually_exclusive_group(required=True)
    ladder.add_argument("--sizes", help="comma separated node counts")
    ladder.add_argument("--edges", help="comma separated edge counts")
    be.add_argument("-k", "--degree", type=float, default=10.0)
    be.add_argument("-T", "--iterations", type=int, default=DEFAULT_ITERATIONS)
    seeds(be)
    be.add_argument("--out")
    be.set_defaults(func=cmd_bench)

    sy = sub.add_parser("synth", help="generate a synthetic graph")
    sy.add_argument("kind", choices=("planted", "random"))
    sy.add_argument("-n", type=int, required=True)
    sy.add_argument("--sizes", default="", help="community sizes, e.g. 30x10 or 20,40")
    sy.add_argument("--overlapping", type=int, default=0)
    sy.add_argument("--memberships", type=int, default=2)
    sy.add_argument("--p-in", type=float, default=0.3)
    sy.add_argument("--mu", type=float, default=0.1)
    sy.add_argument("-k", "--degree", type=float, default=10.0)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--out", required=True)
    sy.set_defaults(func=cmd_synth)

    pr = sub.add_parser("project", help="one-mode projection of a bipartite graph")
    pr.add_argument("-i", "--input", required=True)
    pr.add_argument("--side", type=int, choices=(1, 2), required=True)
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_project)

    hi = sub.add_parser("hierarchy", help="containment forest of a cover")
    hi.add_argument("-i", "--input", required=True)
    hi.add_argument("--cover", required=True)
    hi.add_argument("--attrs")
    hi.add_argument("--bipartite", action="store_true")
    hi.add_argument("--out")
    hi.set_defaults(func=cmd_hierarchy)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ParameterError) as exc:
        print(f"slpa {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SLPAError, OSError, ValueError) as exc:
        print(f"slpa {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        logger.exception("internal error")
        print(f"slpa {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
