"""Bench report rendering: delimited output plus step-growth figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from .verify import StepProfile, format_profile_table


def write_profile_csv(profiles: Sequence[StepProfile], path: str) -> str:
    rows = [row for p in profiles for row in p.to_rows()]
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=["program", "n", "steps",
                                                    "answers", "censored"])
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_profile_json(profiles: Sequence[StepProfile], path: str) -> str:
    rows = [row for p in profiles for row in p.to_rows()]
    Path(path).write_text(json.dumps(rows, indent=2) + "\n", "utf-8")
    return path


def render_profile_figure(profiles: Sequence[StepProfile], path: str) -> str:
    """Resolution steps against input length, one line per program, log
    scale; written to ``path`` (format from the extension)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for profile in profiles:
        xs = [r.n for r in profile.rows if not r.censored]
        ys = [r.steps for r in profile.rows if not r.censored]
        ax.plot(xs, ys, marker="o", label=profile.program)
        censored = [(r.n, r.steps) for r in profile.rows if r.censored]
        if censored:
            ax.scatter([c[0] for c in censored], [c[1] for c in censored],
                       marker="x", color="red", zorder=3)
    ax.set_yscale("log")
    ax.set_xlabel("input length n (reversed list)")
    ax.set_ylabel("resolution steps to first answer")
    ax.set_title("Step growth on reversed inputs")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


__all__ = ["write_profile_csv", "write_profile_json", "render_profile_figure",
           "format_profile_table"]
