"""Figure rendering for the report paths; every figure goes to a file."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from polarseq.simulation import BlerPoint, StudyStep


def save_bler_figure(curves: dict[str, list[BlerPoint]], path: str) -> None:
    """Semilog block-error curves, one line per labelled construction."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for label in sorted(curves):
        points = sorted(curves[label], key=lambda p: p.snr_db)
        xs = [p.snr_db for p in points if p.bler > 0]
        ys = [p.bler for p in points if p.bler > 0]
        ax.semilogy(xs, ys, marker="o", label=label)
    ax.set_xlabel("Es/N0 per dimension (dB)")
    ax.set_ylabel("BLER")
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_study_figure(steps: list[StudyStep], path: str,
                      reference: float = 2.0 ** 0.25) -> None:
    """Interval bounds per doubling step, with the reference base marked."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    xs = range(len(steps))
    los = [s.interval.lo for s in steps]
    his = [s.interval.hi if math.isfinite(s.interval.hi) else float("nan")
           for s in steps]
    ax.plot(xs, los, marker="v", label="lower bound")
    ax.plot(xs, his, marker="^", label="upper bound")
    ax.axhline(reference, linestyle="--", color="gray",
               label=f"{reference:.6f}")
    ax.set_xticks(list(xs), [s.step for s in steps], rotation=30)
    ax.set_ylabel("base")
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
