"""Delimited outputs (trace/result CSV, summaries, tables) and the matching
matplotlib figures rendered alongside them."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .trace import ConvergenceTrace


class _JsonEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, (np.integer,)):
            return int(obj)
        if isinstance(obj, (np.floating,)):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        return super().default(obj)


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, cls=_JsonEncoder) + "\n", encoding="utf-8")


def write_trace_csv(trace: ConvergenceTrace, path, variant: str | None = None) -> None:
    """Trace rows as CSV: iter,mu,objective,inner_iters,wall_ms, plus
    alpha/backtracks under acceleration and a variant column for baselines."""
    with_accel = trace.has_acceleration_columns
    header = ["iter", "mu", "objective", "inner_iters", "wall_ms"]
    if with_accel:
        header += ["alpha", "backtracks"]
    if variant is not None:
        header.append("variant")
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for rec in trace.records:
            row = [rec.iteration, f"{rec.mu:.17g}", f"{rec.objective:.17g}", rec.inner_iters, f"{rec.wall_ms:.3f}"]
            if with_accel:
                row += ["" if rec.alpha is None else f"{rec.alpha:.17g}",
                        "" if rec.backtracks is None else rec.backtracks]
            if variant is not None:
                row.append(variant)
            writer.writerow(row)


def render_convergence_figure(trace: ConvergenceTrace, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(trace.iterations(), trace.mus(), lw=1.2, label="coherence")
    if math.isfinite(trace.bound):
        ax.axhline(trace.bound, color="tab:red", ls="--", lw=1.0, label="composite bound")
    ax.set_xlabel("iteration")
    ax.set_ylabel(r"max |<x_i, x_j>|")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_results_csv(rows: list[dict], path, columns: list[str] | None = None) -> None:
    if not rows:
        Path(path).write_text("", encoding="utf-8")
        return
    columns = columns or list(rows[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in columns})


def render_mse_figure(rows: list[dict], path, x_key: str) -> None:
    """One curve per method of mean MSE against ``x_key`` (log-scale MSE)."""
    methods = sorted({row["method"] for row in rows})
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for method in methods:
        pts: dict[float, list[float]] = {}
        for row in rows:
            if row["method"] == method:
                pts.setdefault(row[x_key], []).append(row["MSE"])
        xs = sorted(pts)
        ys = [float(np.mean(pts[x])) for x in xs]
        ax.plot(xs, ys, marker="o", ms=3, lw=1.2, label=method)
    ax.set_xlabel(x_key)
    ax.set_ylabel("MSE")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def aggregate_summary_rows(summaries: list[dict]) -> list[dict]:
    """Collapse per-run summaries into one row per (d, N): bound plus the
    coherence reached by every method present."""
    table: dict[tuple[int, int], dict] = {}
    for summary in summaries:
        key = (int(summary["d"]), int(summary["N"]))
        row = table.setdefault(key, {"d": key[0], "N": key[1], "mu_CB": summary.get("bound")})
        row[f"mu_{summary.get('method', 'run')}"] = summary.get("mu")
    return [table[key] for key in sorted(table)]


def write_markdown_table(rows: list[dict], path) -> None:
    if not rows:
        Path(path).write_text("(no runs found)\n", encoding="utf-8")
        return
    columns = ["d", "N", "mu_CB"] + sorted(
        {k for row in rows for k in row if k.startswith("mu_") and k != "mu_CB"}
    )
    lines = ["| " + " | ".join(columns) + " |", "|" + "|".join(["---"] * len(columns)) + "|"]
    for row in rows:
        cells = []
        for col in columns:
            value = row.get(col)
            cells.append("" if value is None else (f"{value:.4f}" if isinstance(value, float) else str(value)))
        lines.append("| " + " | ".join(cells) + " |")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def render_table_figure(rows: list[dict], path) -> None:
    """Grouped bars of achieved coherence per (d, N) against the bound."""
    if not rows:
        return
    labels = [f"({row['d']},{row['N']})" for row in rows]
    methods = sorted({k for row in rows for k in row if k.startswith("mu_") and k != "mu_CB"})
    fig, ax = plt.subplots(figsize=(max(6.0, 1.2 * len(rows)), 4.0))
    xs = np.arange(len(rows))
    width = 0.8 / max(len(methods), 1)
    for idx, method in enumerate(methods):
        vals = [row.get(method, np.nan) for row in rows]
        ax.bar(xs + idx * width, vals, width, label=method[3:])
    bounds = [row.get("mu_CB", np.nan) for row in rows]
    ax.plot(xs + 0.4 - width / 2, bounds, "k_", ms=14, label="bound")
    ax.set_xticks(xs + 0.4 - width / 2)
    ax.set_xticklabels(labels)
    ax.set_ylabel("coherence")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
