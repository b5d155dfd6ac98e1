"""Report figures, rendered to files next to the delimited output."""

from __future__ import annotations

from pathlib import Path

from .evaluate import ExperimentReport

_METHOD_COLORS = {"gcn": "#1f78b4", "lp": "#33a02c", "featclf": "#ff7f00"}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_loss_curves(report: ExperimentReport, path) -> Path | None:
    """One line per (method, seed) training-loss history; None if no method
    in the report produces a loss curve."""
    curves = [
        (method, r.seed, r.loss_history)
        for method in report.methods
        for r in report.results[method]
        if r.loss_history
    ]
    if not curves:
        return None
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    seen = set()
    for method, seed, history in curves:
        label = method if method not in seen else None
        seen.add(method)
        ax.plot(
            range(1, len(history) + 1),
            history,
            color=_METHOD_COLORS.get(method, "#666666"),
            alpha=0.6,
            label=label,
        )
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    ax.set_yscale("log")
    ax.set_title(f"{report.experiment}: loss per epoch ({len(report.seeds)} seeds)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_metric_bars(report: ExperimentReport, path) -> Path:
    """Median recall and precision per method, side by side."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    methods = report.methods
    width = 0.38
    for offset, (metric, hatch) in enumerate((("recall", None), ("precision", "//"))):
        values = [report.medians[m][metric] or 0.0 for m in methods]
        ax.bar(
            [i + (offset - 0.5) * width for i in range(len(methods))],
            values,
            width=width,
            hatch=hatch,
            color=[_METHOD_COLORS.get(m, "#666666") for m in methods],
            edgecolor="black",
            label=metric,
        )
        for i, m in enumerate(methods):
            if report.medians[m][metric] is None:
                ax.text(i + (offset - 0.5) * width, 0.02, "absent", ha="center", rotation=90)
    ax.set_xticks(range(len(methods)))
    ax.set_xticklabels(methods)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("median over seeds")
    ax.set_title(f"{report.experiment}: fraud-node recall and precision")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
