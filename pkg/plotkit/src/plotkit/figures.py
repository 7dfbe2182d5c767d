"""Figure builders over parsed CSV data.

All builders return a matplotlib Figure laid out with a fixed style so
that rendering the same data twice yields byte-identical output.  The
Agg backend is forced and SVG hashing is salted with a constant, which
removes every run-dependent identifier from the saved files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.figure import Figure

from plotkit.readers import SchemaError

matplotlib.rcParams.update(
    {
        "svg.hashsalt": "plotkit",
        "svg.fonttype": "path",
        "figure.dpi": 100,
        "savefig.dpi": 100,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "lines.linewidth": 1.4,
        "legend.fontsize": 8,
        "figure.constrained_layout.use": True,
    }
)

RATE_MEASURE = "receive_rate"
DELAY_MEASURE = "avg_delay"


def _require_measure(
    label: str, series: dict[str, list[tuple[int, float]]], measure: str
) -> list[tuple[int, float]]:
    if measure not in series or not series[measure]:
        raise SchemaError(label, f"no rows for measure {measure}")
    return series[measure]


def convergence_curves(
    inputs: Sequence[tuple[str, dict[str, list[tuple[int, float]]]]],
) -> Figure:
    """Two panels, receive rate and average delay, one curve per input."""
    fig, (rate_ax, delay_ax) = plt.subplots(1, 2, figsize=(9, 3.4))
    for label, series in inputs:
        rate_points = _require_measure(label, series, RATE_MEASURE)
        delay_points = _require_measure(label, series, DELAY_MEASURE)
        rate_ax.plot(*zip(*rate_points), label=label)
        delay_ax.plot(*zip(*delay_points), label=label)
    rate_ax.set_xlabel("epoch")
    rate_ax.set_ylabel("receive rate")
    rate_ax.set_ylim(0.0, 1.05)
    delay_ax.set_xlabel("epoch")
    delay_ax.set_ylabel("average delay")
    rate_ax.legend()
    delay_ax.legend()
    return fig


def score_distribution(
    curves: dict[int, list[float]], epochs: Iterable[int] | None = None
) -> Figure:
    """Sorted per-node score curves, one per epoch, on a sequential scale."""
    chosen = sorted(curves) if epochs is None else sorted(epochs)
    missing = [epoch for epoch in chosen if epoch not in curves]
    if missing:
        raise SchemaError(
            "score distribution", f"no rows for epochs {missing}"
        )
    if not chosen:
        raise SchemaError("score distribution", "no epochs to plot")
    fig, ax = plt.subplots(figsize=(6, 3.8))
    cmap = plt.get_cmap("viridis")
    low, high = chosen[0], chosen[-1]
    span = max(high - low, 1)
    for epoch in chosen:
        scores = curves[epoch]
        ax.plot(
            range(len(scores)),
            scores,
            color=cmap((epoch - low) / span),
            linewidth=0.9,
        )
    mappable = plt.cm.ScalarMappable(
        cmap=cmap, norm=matplotlib.colors.Normalize(vmin=low, vmax=high)
    )
    fig.colorbar(mappable, ax=ax, label="epoch")
    ax.set_xlabel("node rank")
    ax.set_ylabel("retained-set score")
    return fig


def _grouped_panels(
    groups: list[tuple[str, list[tuple[float, float]]]],
    x_label: str,
    log_x: bool = False,
) -> Figure:
    """Coverage and delay panels from (group, [(coverage, delay)]) rows."""
    fig, (cov_ax, delay_ax) = plt.subplots(1, 2, figsize=(9, 3.4))
    categorical = not log_x
    for index, (name, points) in enumerate(groups):
        x = index if categorical else float(name)
        covs = [cov for cov, _ in points]
        delays = [delay for _, delay in points]
        for ax, values in ((cov_ax, covs), (delay_ax, delays)):
            ax.plot(
                [x] * len(values),
                values,
                linestyle="none",
                marker="o",
                markersize=4,
                alpha=0.6,
                color="tab:blue",
            )
            mean = sum(values) / len(values)
            ax.plot(
                [x], [mean], marker="_", markersize=16, color="tab:red"
            )
    if categorical:
        ticks = range(len(groups))
        names = [name for name, _ in groups]
        for ax in (cov_ax, delay_ax):
            ax.set_xticks(ticks)
            ax.set_xticklabels(names, rotation=20, ha="right")
    else:
        for ax in (cov_ax, delay_ax):
            ax.set_xscale("log")
    cov_ax.set_ylabel("final coverage")
    delay_ax.set_ylabel("final delay")
    cov_ax.set_xlabel(x_label)
    delay_ax.set_xlabel(x_label)
    return fig


def topology_comparison(
    rows: list[tuple[str, int, float, float]],
) -> Figure:
    """Final coverage and delay per policy; dots are seeds, dash is mean."""
    if not rows:
        raise SchemaError("topology comparison", "no data rows")
    order: list[str] = []
    grouped: dict[str, list[tuple[float, float]]] = {}
    for policy, _, coverage, delay in rows:
        if policy not in grouped:
            order.append(policy)
            grouped[policy] = []
        grouped[policy].append((coverage, delay))
    return _grouped_panels(
        [(name, grouped[name]) for name in order], "policy"
    )


def parameter_sweep(
    rows: list[tuple[float, int, float, float]],
) -> Figure:
    """Final coverage and delay across swept weight values (log x)."""
    if not rows:
        raise SchemaError("parameter sweep", "no data rows")
    grouped: dict[float, list[tuple[float, float]]] = {}
    for weight, _, coverage, delay in rows:
        grouped.setdefault(weight, []).append((coverage, delay))
    groups = [
        (repr(weight), grouped[weight]) for weight in sorted(grouped)
    ]
    return _grouped_panels(groups, "delay weight", log_x=True)


def attack_impact(
    rows: list[tuple[int, float | None, float | None, float]],
) -> Figure:
    """Per-epoch victim metrics and attacker share of outgoing edges.

    Victim coverage and delay panels are drawn only when the trace
    reports them; traces with NaN victim columns still get the share
    panel.
    """
    if not rows:
        raise SchemaError("attack impact", "no data rows")
    epochs = [epoch for epoch, _, _, _ in rows]
    coverage = [(e, c) for e, c, _, _ in rows if c is not None]
    delay = [(e, d) for e, _, d, _ in rows if d is not None]
    shares = [s for _, _, _, s in rows]
    panels = int(bool(coverage)) + int(bool(delay)) + 1
    fig, axes = plt.subplots(
        1, panels, figsize=(3.2 * panels + 1.0, 3.2), squeeze=False
    )
    cursor = 0
    if coverage:
        ax = axes[0][cursor]
        ax.plot(*zip(*coverage), color="tab:blue")
        ax.set_ylabel("victim topic coverage")
        ax.set_ylim(0.0, 1.05)
        ax.set_xlabel("epoch")
        cursor += 1
    if delay:
        ax = axes[0][cursor]
        ax.plot(*zip(*delay), color="tab:green")
        ax.set_ylabel("victim topic delay")
        ax.set_xlabel("epoch")
        cursor += 1
    ax = axes[0][cursor]
    ax.plot(epochs, shares, color="tab:red")
    ax.set_ylabel("attacker outgoing fraction")
    ax.set_ylim(0.0, 1.05)
    ax.set_xlabel("epoch")
    return fig


def save_figure(fig: Figure, out_path: str | Path) -> None:
    """Write the figure as SVG or PNG with run-independent metadata."""
    path = Path(out_path)
    suffix = path.suffix.lower()
    path.parent.mkdir(parents=True, exist_ok=True)
    if suffix == ".svg":
        fig.savefig(path, format="svg", metadata={"Date": None})
    elif suffix == ".png":
        fig.savefig(path, format="png")
    else:
        raise ValueError(
            f"unsupported output suffix {suffix!r}, use .svg or .png"
        )
    plt.close(fig)
