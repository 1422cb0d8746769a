"""Render sweep results and mixture components to figure files.

Companion to the CSV outputs: the report commands can drop a PNG/PDF next
to the delimited data. Uses the Agg backend so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import DataError

_METRIC_LABELS = {
    "f1_micro": "micro F1",
    "f1_macro": "macro F1",
    "f1_example": "example F1",
    "kl": "KL(truth || estimate)",
    "recovery": "annotator-type recovery rate",
}


def _grid_values(rows, axis):
    seen = []
    for row in rows:
        value = row[axis]
        if value not in seen:
            seen.append(value)
    return seen


def render_sweep_figure(rows, axis, out_path, metric="f1_micro"):
    """Plot the per-model median of ``metric`` against the swept axis.

    ``rows`` are sweep row dicts (in-memory or re-read from CSV); models
    with no finite values for the metric (e.g. KL for majority voting)
    are skipped. Raises DataError if nothing is plottable.
    """
    if metric not in _METRIC_LABELS:
        raise DataError(f"unknown metric {metric!r}")
    values = _grid_values(rows, axis)
    models = _grid_values(rows, "model")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    plotted = 0
    for model in models:
        medians = []
        for value in values:
            cell = [
                float(row[metric])
                for row in rows
                if row["model"] == model and row[axis] == value and row[metric] != ""
            ]
            medians.append(np.median(cell) if cell else np.nan)
        if np.all(np.isnan(medians)):
            continue
        ax.plot(range(len(values)), medians, marker="o", label=model)
        plotted += 1
    if not plotted:
        plt.close(fig)
        raise DataError(f"no rows carry metric {metric!r}")
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels([str(v) for v in values])
    ax.set_xlabel(axis)
    ax.set_ylabel(_METRIC_LABELS[metric])
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_component_figure(mix_mean, rate_mean, out_path, label_names=None):
    """Bar charts of per-component label rates, ordered by mixing weight."""
    mix_mean = np.asarray(mix_mean, dtype=float)
    rate_mean = np.asarray(rate_mean, dtype=float)
    if rate_mean.ndim != 2 or rate_mean.shape[0] != mix_mean.size:
        raise DataError("rate_mean must be (num_components, num_labels)")
    num_components, num_labels = rate_mean.shape
    if label_names is None:
        label_names = [str(j) for j in range(num_labels)]
    order = np.argsort(-mix_mean)
    ncols = min(3, num_components)
    nrows = (num_components + ncols - 1) // ncols
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.2 * ncols, 2.4 * nrows), squeeze=False, sharey=True
    )
    for slot, k in enumerate(order):
        ax = axes[slot // ncols][slot % ncols]
        ax.bar(range(num_labels), rate_mean[k])
        ax.set_ylim(0.0, 1.0)
        ax.set_title(f"share {mix_mean[k]:.3f}", fontsize=9)
        ax.set_xticks(range(num_labels))
        ax.set_xticklabels(label_names, rotation=45, ha="right", fontsize=7)
    for slot in range(num_components, nrows * ncols):
        axes[slot // ncols][slot % ncols].axis("off")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
