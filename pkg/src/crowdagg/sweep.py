"""Experiment sweeps: simulate -> fit -> evaluate over one parameter grid.

A sweep fixes the ground truth and all but one of {R, T, L, K}, runs every
(grid value, model, seed) cell independently, and emits one CSV row per
cell. The seed of a cell is base_seed + grid_index, so appending grid
values never changes existing rows, and every row can be reproduced by
running simulate/fit/eval with the row's recorded parameters.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bmmb, bnc
from .data import (
    FitConfig,
    Hyperparams,
    MAX_LABELSET_LABELS,
    as_label_matrix,
    binarize,
)
from .errors import DataError
from .metrics import (
    EvalReport,
    REPORT_FIELDS,
    annotator_type_recovery,
    empirical_label_distribution,
    f1_scores,
    kl_labelsets,
    majority_vote,
    report_row,
)
from .simulate import SimConfig, generate_annotations, sample_annotator_pool

MODELS = ("mv", "bnc", "bmmb")
AXES = ("R", "T", "L", "K")


@dataclass(frozen=True)
class SweepSpec:
    """One swept axis with fixed values for the other parameters."""

    truth: np.ndarray
    models: tuple
    axis: str
    values: tuple
    seeds: tuple
    ratio: tuple = (1, 1, 1)
    annotations_each: int = 5
    num_annotators: int = 100
    num_components: int = 1
    eta: float = 1e-4
    max_iter: int = 500
    restarts: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "truth", as_label_matrix(self.truth))
        if self.axis not in AXES:
            raise DataError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise DataError("values must be non-empty")
        if not self.seeds:
            raise DataError("seeds must be non-empty")
        unknown = set(self.models) - set(MODELS)
        if unknown or not self.models:
            raise DataError(f"models must be a non-empty subset of {MODELS}")

    def cell_params(self, value):
        """Fixed parameters with the swept axis overridden by ``value``."""
        params = {
            "ratio": self.ratio,
            "annotations_each": self.annotations_each,
            "num_annotators": self.num_annotators,
            "num_components": self.num_components,
        }
        key = {
            "R": "ratio",
            "T": "annotations_each",
            "L": "num_annotators",
            "K": "num_components",
        }[self.axis]
        params[key] = value
        return params


def run_cell(truth, model, ratio, annotations_each, num_annotators, num_components,
             seed, eta=1e-4, max_iter=500, restarts=None) -> dict:
    """Simulate annotations, fit one model, evaluate it, return a row dict."""
    truth = as_label_matrix(truth)
    num_labels = truth.shape[1]
    sim = SimConfig(
        ratio=tuple(ratio),
        annotations_each=annotations_each,
        num_annotators=num_annotators,
        seed=seed,
    )
    profiles = sample_annotator_pool(sim, num_labels)
    annotations = generate_annotations(truth, profiles, annotations_each, seed)

    kl = None
    recovery = None
    if model == "mv":
        predictions = majority_vote(annotations)
    else:
        hp = Hyperparams.for_annotations(annotations, num_components=num_components)
        cfg = FitConfig(eta=eta, max_iter=max_iter, restarts=restarts, seed=seed)
        result = bmmb.fit(annotations, hp, cfg) if model == "bmmb" else bnc.fit(annotations, hp, cfg)
        predictions = binarize(result.label_prob)
        recovery = annotator_type_recovery(profiles, result.reliability)
        if model == "bmmb" and num_labels <= MAX_LABELSET_LABELS:
            kl = kl_labelsets(
                empirical_label_distribution(truth),
                bmmb.label_set_distribution(result),
            )
    micro, macro, example = f1_scores(truth, predictions)
    report = EvalReport(micro, macro, example, kl_labelsets=kl, type_recovery_rate=recovery)
    return report_row(
        report,
        model=model,
        ratio=tuple(ratio),
        annotations_each=annotations_each,
        num_annotators=num_annotators,
        num_components=num_components,
        seed=seed,
    )


def _run_cell_task(args):
    index, kwargs = args
    return index, run_cell(**kwargs)


def run_sweep(spec: SweepSpec, workers: int = 1):
    """Run every (grid value, model, seed) cell; rows come back in grid order."""
    tasks = []
    for grid_index, value in enumerate(spec.values):
        params = spec.cell_params(value)
        for model in spec.models:
            for base_seed in spec.seeds:
                tasks.append((
                    len(tasks),
                    dict(
                        truth=spec.truth,
                        model=model,
                        seed=base_seed + grid_index,
                        eta=spec.eta,
                        max_iter=spec.max_iter,
                        restarts=spec.restarts,
                        **params,
                    ),
                ))
    if workers > 1:
        rows = [None] * len(tasks)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, row in pool.map(_run_cell_task, tasks):
                rows[index] = row
        return rows
    return [_run_cell_task(task)[1] for task in tasks]


def write_sweep_csv(path, rows, spec: SweepSpec):
    """Write sweep rows with a '#'-comment header recording the fixed setup."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# axis={spec.axis} values={list(spec.values)!r}\n")
        fh.write(
            "# fixed: R={} T={} L={} K={}\n".format(
                ":".join(str(r) for r in spec.ratio),
                spec.annotations_each,
                spec.num_annotators,
                spec.num_components,
            )
        )
        fh.write(f"# models={','.join(spec.models)} seeds={list(spec.seeds)!r}\n")
        writer = csv.DictWriter(fh, fieldnames=REPORT_FIELDS)
        writer.writeheader()
        writer.writerows(rows)


def read_sweep_csv(path):
    """Read rows back, skipping the comment header."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))
