"""Evaluation report output: JSON, delimited metrics, and figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .synthetic import EvalReport

_METRIC_KEYS = ("ari", "nmi", "precision", "recall", "f1")


def report_as_dict(report: EvalReport) -> dict:
    return {
        "instances": [
            {
                "index": i,
                "seed": r.spec.seed,
                "spec": r.spec.as_dict(),
                "truth": r.truth.labels(),
                "predicted": r.predicted.labels(),
                "metrics": r.metrics.as_dict(),
            }
            for i, r in enumerate(report.instances)
        ],
        "mean": report.mean.as_dict(),
        "seed_ledger": report.seeds(),
    }


def write_report_json(path: str | Path, report: EvalReport) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report_as_dict(report), fh, indent=2)
        fh.write("\n")


def write_report_csv(path: str | Path, report: EvalReport) -> None:
    """One row per instance; stable column order for downstream scripting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["instance", "seed", "segments", "bases", "noise_sigma", *_METRIC_KEYS]
        )
        for i, r in enumerate(report.instances):
            metrics = r.metrics.as_dict()
            writer.writerow(
                [
                    i,
                    r.spec.seed,
                    r.spec.segment_count,
                    r.spec.base_motion_count,
                    r.spec.noise_sigma,
                    *[f"{metrics[k]:.6f}" for k in _METRIC_KEYS],
                ]
            )


def render_figures(out_dir: str | Path, report: EvalReport) -> list[Path]:
    """Write PNG figures next to the report; returns the created paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    created = [_per_instance_figure(out_dir, report)]
    noise_fig = _noise_figure(out_dir, report)
    if noise_fig is not None:
        created.append(noise_fig)
    return created


def _per_instance_figure(out_dir: Path, report: EvalReport) -> Path:
    n = len(report.instances)
    x = np.arange(n)
    width = 0.25
    fig, ax = plt.subplots(figsize=(max(6.0, 0.5 * n + 2.0), 4.0))
    for offset, key in zip((-width, 0.0, width), ("ari", "nmi", "f1")):
        vals = [r.metrics.as_dict()[key] for r in report.instances]
        ax.bar(x + offset, vals, width=width, label=key.upper())
    mean = report.mean.as_dict()
    ax.axhline(mean["ari"], color="C0", linestyle=":", linewidth=1)
    ax.axhline(mean["f1"], color="C2", linestyle=":", linewidth=1)
    ax.set_xlabel("instance")
    ax.set_ylabel("score")
    ax.set_ylim(0.0, 1.05)
    ax.set_xticks(x)
    ax.legend(loc="lower right")
    ax.set_title("Pattern recovery per instance")
    fig.tight_layout()
    path = out_dir / "metrics_by_instance.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _noise_figure(out_dir: Path, report: EvalReport) -> Path | None:
    # Only meaningful when the suite sweeps more than one noise level.
    levels = sorted({r.spec.noise_sigma for r in report.instances})
    if len(levels) < 2:
        return None
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for key in ("ari", "nmi", "f1"):
        means = [
            np.mean(
                [
                    r.metrics.as_dict()[key]
                    for r in report.instances
                    if r.spec.noise_sigma == lvl
                ]
            )
            for lvl in levels
        ]
        ax.plot(levels, means, marker="o", label=key.upper())
    ax.set_xlabel("noise sigma (radians per joint)")
    ax.set_ylabel("mean score")
    ax.set_ylim(0.0, 1.05)
    ax.legend(loc="lower left")
    ax.set_title("Pattern recovery vs. pose noise")
    fig.tight_layout()
    path = out_dir / "metrics_vs_noise.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
