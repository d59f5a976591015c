"""Figure rendering for the reproduction runs (opt-in, written next to the CSVs)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import geom  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 11,
    "axes.spines.right": False,
    "axes.spines.top": False,
    "legend.frameon": False,
}

LABELS = {"classical": "classical SMF", "optimal": "optimal SMF (sampled)", "sweep": "optimal SMF (sweep)"}


def _save(fig, path: Path) -> Path:
    # no timestamp/software metadata so repeated runs give identical files
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_example_a(summary, path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.5))
        for engine, series in summary.avg_diameter.items():
            ax.plot(summary.k, series, marker="o", ms=3, label=LABELS.get(engine, engine))
        ax.set_xlabel("k")
        ax.set_ylabel("average diameter")
        ax.legend()
        fig.tight_layout()
        return _save(fig, path)


def plot_example_b(run, path: Path, steps=(10, 20)) -> Path:
    steps = [k for k in steps if k < len(run.classical)] or [len(run.classical) - 1]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(steps), figsize=(4.5 * len(steps), 4), squeeze=False)
        for ax, k in zip(axes[0], steps):
            for engine, poly, style in (
                ("classical", run.classical[k], dict(color="tab:blue", alpha=0.25)),
                ("optimal", run.optimal[k], dict(color="tab:red", alpha=0.5)),
            ):
                v = poly.vertices
                if len(v) >= 3:
                    ax.fill(v[:, 0], v[:, 1], label=engine, **style)
                elif len(v):
                    ax.plot(v[:, 0], v[:, 1], label=engine, color=style["color"])
            ax.plot(*run.states[k], "k*", label="true state")
            ratio = geom.area(run.optimal[k]) / max(geom.area(run.classical[k]), 1e-300)
            ax.set_title(f"k = {k}, area ratio {100 * ratio:.3g}%")
            ax.set_xlabel("$x^{(1)}$")
            ax.set_ylabel("$x^{(2)}$")
            ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        return _save(fig, path)
