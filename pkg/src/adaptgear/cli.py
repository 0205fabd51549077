"""Command-line entry point.

    adaptgear <crossover|ablate|density|run> [options]

Graph sources (pick one): --graph PATH, --rmat V,E, --planted g,B,p_in,p_out.
Reports are written as JSON or CSV via --out/--format; a matplotlib figure
is rendered next to the report unless --no-figure is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bench, plots


def _parse_rmat(text: str) -> tuple[int, int]:
    try:
        v, e = (int(p) for p in text.split(","))
        return v, e
    except ValueError:
        raise argparse.ArgumentTypeError(f"--rmat expects V,E; got {text!r}")


def _parse_planted(text: str) -> tuple[int, int, float, float]:
    try:
        g, b, p_in, p_out = text.split(",")
        return int(g), int(b), float(p_in), float(p_out)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--planted expects g,B,p_in,p_out; got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptgear",
        description="Subgraph-level adaptive sparse aggregation benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("crossover", "time CSR/COO/dense kernels across a density ladder"),
        ("ablate", "compare the O1/O2/O3 optimization modes"),
        ("density", "report subgraph densities and topology overhead"),
        ("run", "run the adaptive pipeline and emit a full report"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--graph", type=str, default=None, help="edge-list file")
        p.add_argument("--rmat", type=_parse_rmat, default=None, metavar="V,E")
        p.add_argument("--planted", type=_parse_planted, default=None,
                       metavar="g,B,p_in,p_out")
        p.add_argument("--comm-size", type=int, default=16)
        p.add_argument("--reorder", type=str, default="bfs",
                       help="bfs | none | file:PATH")
        p.add_argument("--mode", choices=bench.MODES, default="O3")
        p.add_argument("--op", choices=["sum", "mean", "max"], default="sum")
        p.add_argument("--model", choices=["gcn", "gin", "agg-only"],
                       default="agg-only")
        p.add_argument("--feat-dim", type=int, default=32)
        p.add_argument("--iters", type=int, default=50)
        p.add_argument("--profile-iters", type=int, default=3)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--no-figure", action="store_true",
                       help="skip rendering the PNG next to the report")
    return parser


def _config_from_args(args) -> bench.RunConfig:
    return bench.RunConfig(
        graph_path=args.graph,
        rmat=args.rmat,
        planted=args.planted,
        comm_size=args.comm_size,
        reorder=args.reorder,
        mode=args.mode,
        op=args.op,
        model=args.model.replace("-", "_"),
        feat_dim=args.feat_dim,
        iters=args.iters,
        profile_iters=args.profile_iters,
        seed=args.seed,
        threads=args.threads,
        out=args.out,
        fmt=args.format,
    )


def _csv_rows(command: str, report: dict) -> list[dict]:
    if command == "crossover":
        return report["points"]
    if command == "ablate":
        return report["modes"]
    if command == "density":
        flat = {"num_vertices": report["num_vertices"],
                "num_edges": report["num_edges"]}
        flat.update({f"density_{k}": v for k, v in report["density"].items()})
        flat.update({f"preprocessing_ms_{k}": v
                     for k, v in report["preprocessing_ms"].items()})
        flat.update({f"topology_bytes_{k}": v
                     for k, v in report["topology_bytes"].items()})
        return [flat]
    return report["iterations"]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _config_from_args(args)

    if args.command == "crossover":
        report = bench.run_crossover_sweep(cfg)
        figure = plots.save_crossover_figure
    elif args.command == "ablate":
        report = bench.run_ablation(cfg)
        figure = plots.save_ablation_figure
    elif args.command == "density":
        report = bench.run_density(cfg)
        figure = plots.save_density_figure
    else:
        report = bench.run_pipeline(cfg)
        figure = plots.save_trace_figure

    if args.out:
        payload = report if args.format == "json" else _csv_rows(args.command, report)
        path = bench.emit_report(payload, args.format, args.out)
        print(f"report written to {path}")
        if not args.no_figure:
            fig_path = os.path.splitext(path)[0] + ".png"
            figure(report, fig_path)
            print(f"figure written to {fig_path}")
    else:
        json.dump(report, sys.stdout, indent=2)
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
