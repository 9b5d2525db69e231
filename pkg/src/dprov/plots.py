"""Figure rendering for benchmark rows and run traffic.

Everything draws straight to files (Agg backend), next to the CSV the data
came from, so headless runs produce a complete report directory.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .bench import BenchRow  # noqa: E402


def _series(rows: Sequence[BenchRow], phase: str) -> tuple[list[int], list[BenchRow]]:
    picked = sorted((r for r in rows if r.phase == phase), key=lambda r: r.param_value)
    return [r.param_value for r in picked], picked


def plot_batch(rows: Sequence[BenchRow], out_path: "str | Path") -> Path:
    """Batched vs per-item verification: wall time and group mults over B."""
    out_path = Path(out_path)
    fig, (ax_time, ax_ops) = plt.subplots(1, 2, figsize=(10, 4))

    for phase, style in (("batch-verify", "o-"), ("single-verify", "s--")):
        xs, picked = _series(rows, phase)
        ax_time.plot(xs, [r.wall_time_ns / 1e6 for r in picked], style, label=phase)
        ax_ops.plot(xs, [r.group_mults for r in picked], style, label=phase)

    ax_time.set_xlabel("batch size")
    ax_time.set_ylabel("median wall time (ms)")
    ax_time.set_xscale("log", base=2)
    ax_time.set_title("verification time")
    ax_time.legend()
    ax_time.grid(True, alpha=0.3)

    ax_ops.set_xlabel("batch size")
    ax_ops.set_ylabel("scalar multiplications")
    ax_ops.set_xscale("log", base=2)
    ax_ops.set_title("group operations")
    ax_ops.legend()
    ax_ops.grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_warrant(rows: Sequence[BenchRow], out_path: "str | Path") -> Path:
    """Update cost against issuance cost, over the number of touched issuers."""
    out_path = Path(out_path)
    issue = [r for r in rows if r.phase == "warrant-issue"]
    xs, updates = _series(rows, "warrant-update")

    fig, (ax_time, ax_bytes) = plt.subplots(1, 2, figsize=(10, 4))

    ax_time.plot(xs, [r.wall_time_ns / 1e6 for r in updates], "o-", label="update")
    ax_bytes.plot(xs, [r.bytes for r in updates], "o-", label="update")
    if issue:
        ax_time.axhline(issue[0].wall_time_ns / 1e6, color="tab:red", linestyle=":",
                        label=f"full issuance (n_wi={issue[0].param_value})")
        ax_bytes.axhline(issue[0].bytes, color="tab:red", linestyle=":",
                         label=f"full issuance (n_wi={issue[0].param_value})")

    ax_time.set_xlabel("issuers touched (n_u)")
    ax_time.set_ylabel("median wall time (ms)")
    ax_time.set_title("warrant maintenance time")
    ax_time.legend()
    ax_time.grid(True, alpha=0.3)

    ax_bytes.set_xlabel("issuers touched (n_u)")
    ax_bytes.set_ylabel("wire bytes per run")
    ax_bytes.set_title("warrant maintenance traffic")
    ax_bytes.legend()
    ax_bytes.grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_traffic(records, out_path: "str | Path") -> Path:
    """Bar chart of wire bytes per protocol phase for one simulation run."""
    out_path = Path(out_path)
    totals: dict[str, int] = {}
    for rec in records:
        totals[rec.phase] = totals.get(rec.phase, 0) + rec.wire_bytes

    fig, ax = plt.subplots(figsize=(7, 4))
    phases = list(totals)
    ax.bar(phases, [totals[p] for p in phases], color="tab:blue")
    ax.set_ylabel("wire bytes")
    ax.set_title("traffic per phase")
    ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
