"""Command-line interface.

Subcommands: ``design`` (run the coherence solver), ``bounds`` (print the
coherence bounds for a (d, N, field) grid), ``baseline`` (alternating
projection), ``cs`` (sensing-matrix experiments from a JSON spec), ``table``
(aggregate run summaries into a Markdown/CSV table).  Every subcommand writes
a run manifest before heavy computation starts; re-running from a manifest
reproduces the outputs (wall-clock fields aside).
"""

from __future__ import annotations

import argparse
import datetime
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .baselines import VARIANTS, alternating_projection
from .bounds import composite_bound, welch_bound
from .cs import ExperimentSpec, run_synthetic_experiment
from .frame import init_frame
from .frameio import write_frame
from .rng import substream
from .solver import SolverConfig, solve
from .trace import STATUS_BOUND_REACHED, STATUS_MAX_ITERS
from . import report

log = logging.getLogger("telet.cli")

_CONFIG_KEYS = {
    "design": ["d", "N", "field", "seed", "max_iters", "inner_iters", "eta", "tol",
               "accel", "oversample", "threads", "plot"],
    "baseline": ["d", "N", "field", "variant", "seed", "max_iters", "tol",
                 "oversample", "threads", "plot"],
    "bounds": ["d", "N", "field"],
    "cs": ["spec", "threads", "plot"],
    "table": ["runs"],
}


def _setup_logging() -> None:
    level = os.environ.get("TELET_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _default_max_iters(n: int) -> int:
    return 10_000 if n <= 100 else 1_000


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _write_manifest(out_dir: Path, subcommand: str, config: dict, outputs: list[str]) -> Path:
    path = out_dir / "manifest.json"
    report.write_json(path, {
        "subcommand": subcommand,
        "version": __version__,
        "seed": config.get("seed"),
        "config": config,
        "outputs": outputs,
        "started_at": _now(),
        "finished_at": None,
    })
    return path


def _finish_manifest(path: Path) -> None:
    payload = json.loads(path.read_text(encoding="utf-8"))
    payload["finished_at"] = _now()
    report.write_json(path, payload)


def _resolved_config(args: argparse.Namespace, subcommand: str) -> dict:
    if getattr(args, "from_manifest", None):
        manifest = json.loads(Path(args.from_manifest).read_text(encoding="utf-8"))
        if manifest.get("subcommand") != subcommand:
            raise SystemExit(f"manifest was written by {manifest.get('subcommand')!r}, not {subcommand!r}")
        return manifest["config"]
    config = {key: getattr(args, key) for key in _CONFIG_KEYS[subcommand]}
    if "max_iters" in config and config["max_iters"] is None:
        config["max_iters"] = _default_max_iters(config["N"])
    return config


def _solver_config(config: dict, acceleration: str) -> SolverConfig:
    return SolverConfig(
        max_outer_iters=config["max_iters"],
        inner_iters=config.get("inner_iters", 100),
        mda_eta=config.get("eta", 1.0),
        stop_tol=config["tol"],
        rng_seed=config["seed"],
        acceleration=acceleration,
    )


def cmd_design(args: argparse.Namespace) -> int:
    config = _resolved_config(args, "design")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = ["frame.txt", "trace.csv", "summary.json"] + (["convergence.png"] if config["plot"] else [])
    manifest = _write_manifest(out_dir, "design", config, outputs)
    frame0 = init_frame(config["d"], config["N"], config["field"],
                        oversample_factor=config["oversample"],
                        rng_seed=substream(config["seed"], "init"))
    frame, trace = solve(frame0, _solver_config(config, config["accel"]))
    write_frame(frame, out_dir / "frame.txt")
    report.write_trace_csv(trace, out_dir / "trace.csv")
    summary = {
        "d": config["d"], "N": config["N"], "field": config["field"], "seed": config["seed"],
        "method": "telet", "mu": trace.best_mu, "bound": trace.bound,
        "gap": trace.best_mu - trace.bound, "iterations": trace.records[-1].iteration,
        "status": trace.status, "best_iteration": trace.best_iteration,
        "welch": welch_bound(config["d"], config["N"]),
    }
    report.write_json(out_dir / "summary.json", summary)
    if config["plot"]:
        report.render_convergence_figure(
            trace, out_dir / "convergence.png",
            title=f"design d={config['d']} N={config['N']} ({config['field']})")
    _finish_manifest(manifest)
    print(f"mu={trace.best_mu:.6f} bound={trace.bound:.6f} status={trace.status}")
    return 0 if trace.status in (STATUS_BOUND_REACHED, STATUS_MAX_ITERS) else 1


def cmd_baseline(args: argparse.Namespace) -> int:
    config = _resolved_config(args, "baseline")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = ["frame.txt", "trace.csv", "summary.json"] + (["convergence.png"] if config["plot"] else [])
    manifest = _write_manifest(out_dir, "baseline", config, outputs)
    frame, trace = alternating_projection(
        config["d"], config["N"], config["variant"], max_iters=config["max_iters"],
        seed=int(substream(config["seed"], "init").generate_state(1)[0]),
        field=config["field"], stop_tol=config["tol"],
        oversample_factor=config["oversample"],
    )
    write_frame(frame, out_dir / "frame.txt")
    report.write_trace_csv(trace, out_dir / "trace.csv", variant=config["variant"])
    summary = {
        "d": config["d"], "N": config["N"], "field": config["field"], "seed": config["seed"],
        "method": config["variant"], "mu": trace.best_mu, "bound": trace.bound,
        "gap": trace.best_mu - trace.bound, "iterations": trace.records[-1].iteration,
        "status": trace.status, "best_iteration": trace.best_iteration,
        "welch": welch_bound(config["d"], config["N"]),
    }
    report.write_json(out_dir / "summary.json", summary)
    if config["plot"]:
        report.render_convergence_figure(
            trace, out_dir / "convergence.png",
            title=f"{config['variant']} d={config['d']} N={config['N']} ({config['field']})")
    _finish_manifest(manifest)
    print(f"mu={trace.best_mu:.6f} bound={trace.bound:.6f} status={trace.status}")
    return 0 if trace.status in (STATUS_BOUND_REACHED, STATUS_MAX_ITERS) else 1


def cmd_bounds(args: argparse.Namespace) -> int:
    config = _resolved_config(args, "bounds")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = _write_manifest(out_dir, "bounds", config, ["bounds.csv"])
    rows = []
    for d in config["d"]:
        for n in config["N"]:
            if n < d:
                continue
            rows.append({
                "d": d, "N": n, "field": config["field"],
                "welch": welch_bound(d, n),
                "composite": composite_bound(d, n, config["field"]),
            })
    print(f"{'d':>4} {'N':>5} {'field':>8} {'welch':>8} {'composite':>10}")
    for row in rows:
        print(f"{row['d']:>4} {row['N']:>5} {row['field']:>8} {row['welch']:>8.4f} {row['composite']:>10.4f}")
    report.write_results_csv(rows, out_dir / "bounds.csv", ["d", "N", "field", "welch", "composite"])
    _finish_manifest(manifest)
    return 0


def cmd_cs(args: argparse.Namespace) -> int:
    config = _resolved_config(args, "cs")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw = config.get("spec_resolved") or json.loads(Path(config["spec"]).read_text(encoding="utf-8"))
    spec = ExperimentSpec.from_dict(raw)
    outputs = ["results.csv"]
    manifest = _write_manifest(out_dir, "cs", {**config, "spec_resolved": raw}, outputs)
    rows = run_synthetic_experiment(spec, threads=config.get("threads", 1))
    report.write_results_csv(rows, out_dir / "results.csv",
                             ["method", "d", "K", "seed", "MSE", "mu_ED", "wall_ms"])
    if config["plot"]:
        if len(spec.k_list) > 1 or len(spec.d_list) == 1:
            report.render_mse_figure(rows, out_dir / "mse_vs_K.png", "K")
        if len(spec.d_list) > 1:
            report.render_mse_figure(rows, out_dir / "mse_vs_d.png", "d")
    _finish_manifest(manifest)
    print(f"wrote {len(rows)} result rows to {out_dir / 'results.csv'}")
    return 0


def cmd_table(args: argparse.Namespace) -> int:
    config = _resolved_config(args, "table")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = _write_manifest(out_dir, "table", config, ["table.md", "table.csv", "table.png"])
    summaries = []
    for path in sorted(Path(config["runs"]).glob("**/summary.json")):
        try:
            summaries.append(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            log.warning("skipping unreadable summary %s: %s", path, exc)
    rows = report.aggregate_summary_rows(summaries)
    report.write_markdown_table(rows, out_dir / "table.md")
    columns = ["d", "N", "mu_CB"] + sorted(
        {k for row in rows for k in row if k.startswith("mu_") and k != "mu_CB"})
    report.write_results_csv(rows, out_dir / "table.csv", columns)
    report.render_table_figure(rows, out_dir / "table.png")
    print((out_dir / "table.md").read_text(encoding="utf-8"))
    _finish_manifest(manifest)
    return 0


def _add_common(parser: argparse.ArgumentParser, *, bounds_grid: bool = False) -> None:
    if bounds_grid:
        parser.add_argument("--d", type=_int_list, required=True, help="comma-separated dimensions")
        parser.add_argument("--N", type=_int_list, required=True, help="comma-separated vector counts")
    else:
        parser.add_argument("--d", type=int, required=True, help="vector dimension")
        parser.add_argument("--N", type=int, required=True, help="number of vectors")
    parser.add_argument("--field", choices=["real", "complex"], default="complex")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="telet", description=__doc__)
    parser.add_argument("--version", action="version", version=f"telet {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("design", help="construct a minimal-coherence frame")
    _add_common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=None,
                   help="outer iteration cap (default: 1e4 for N<=100, else 1e3)")
    p.add_argument("--inner-iters", dest="inner_iters", type=int, default=100)
    p.add_argument("--eta", type=float, default=1.0, help="mirror-ascent step constant")
    p.add_argument("--tol", type=float, default=1e-5, help="stop when |mu - bound| < tol")
    p.add_argument("--accel", choices=["none", "squarem"], default="squarem")
    p.add_argument("--oversample", type=float, default=4.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.add_argument("--out", required=True)
    p.add_argument("--from-manifest", default=None)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("bounds", help="print welch and composite bounds for a grid")
    _add_common(p, bounds_grid=True)
    p.add_argument("--out", required=True)
    p.add_argument("--from-manifest", default=None)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("baseline", help="alternating-projection baseline")
    _add_common(p)
    p.add_argument("--variant", choices=list(VARIANTS), default="tropp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--oversample", type=float, default=4.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.add_argument("--out", required=True)
    p.add_argument("--from-manifest", default=None)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("cs", help="sensing-matrix experiment grid from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.add_argument("--out", required=True)
    p.add_argument("--from-manifest", default=None)
    p.set_defaults(func=cmd_cs)

    p = sub.add_parser("table", help="aggregate run summaries into a table")
    p.add_argument("runs", help="directory scanned recursively for summary.json files")
    p.add_argument("--out", required=True)
    p.add_argument("--from-manifest", default=None)
    p.set_defaults(func=cmd_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
