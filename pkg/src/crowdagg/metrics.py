"""Majority-voting baseline and evaluation measures.

F1 conventions: a pooled/per-label/per-instance unit with no true and no
predicted positives scores 1; a unit where exactly one side is empty
scores 0. The label-set KL divergence is directed KL(P || P_hat) with a
smoothing floor applied to P_hat only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import (
    AnnotationSet,
    LabelSetDistribution,
    MAX_LABELSET_LABELS,
    as_label_matrix,
)
from .errors import CapacityError, DataError
from .simulate import KINDS

# Midpoints of the simulator's reliability intervals, in kind order;
# nearest-center classification breaks ties toward the lower index.
KIND_CENTERS = {"reliable": 0.92, "normal": 0.755, "random": 0.5}


def majority_vote(annotations: AnnotationSet) -> np.ndarray:
    """Predict a label present iff strictly more than half its annotators voted 1.

    Instances with no annotators get all-zero rows.
    """
    positive = annotations.positive_votes()
    total = annotations.annotators_per_instance()[:, None]
    return (2.0 * positive > total).astype(np.uint8)


def _f1_from_counts(tp, fp, fn):
    tp = np.asarray(tp, dtype=float)
    denom = 2.0 * tp + np.asarray(fp, dtype=float) + np.asarray(fn, dtype=float)
    return np.where(denom > 0, 2.0 * tp / np.maximum(denom, 1.0), 1.0)


def f1_scores(z_true, z_pred):
    """Micro, macro, and example-based F1 between two binary matrices.

    Micro pools true/false positives over all cells; macro averages
    per-label F1 over labels; example averages per-instance F1 over
    instances.
    """
    z_true = as_label_matrix(z_true)
    z_pred = as_label_matrix(z_pred)
    if z_true.shape != z_pred.shape:
        raise DataError(f"shape mismatch: {z_true.shape} vs {z_pred.shape}")
    tp = (z_true & z_pred).astype(float)
    fp = ((1 - z_true) & z_pred).astype(float)
    fn = (z_true & (1 - z_pred)).astype(float)
    micro = float(_f1_from_counts(tp.sum(), fp.sum(), fn.sum()))
    per_label = _f1_from_counts(tp.sum(axis=0), fp.sum(axis=0), fn.sum(axis=0))
    per_instance = _f1_from_counts(tp.sum(axis=1), fp.sum(axis=1), fn.sum(axis=1))
    macro = float(per_label.mean()) if per_label.size else 1.0
    example = float(per_instance.mean()) if per_instance.size else 1.0
    return micro, macro, example


def empirical_label_distribution(z) -> LabelSetDistribution:
    """Empirical distribution of label subsets over the rows of ``z``."""
    z = as_label_matrix(z)
    num_instances, num_labels = z.shape
    if num_labels > MAX_LABELSET_LABELS:
        raise CapacityError(
            f"label-set distributions support at most {MAX_LABELSET_LABELS} labels,"
            f" got {num_labels}"
        )
    if num_instances == 0:
        raise DataError("cannot take an empirical distribution of zero instances")
    weights = 1 << np.arange(num_labels - 1, -1, -1)
    masks = z.astype(np.int64) @ weights
    counts = np.bincount(masks, minlength=2 ** num_labels).astype(float)
    return LabelSetDistribution(num_labels, counts / num_instances)


def kl_labelsets(p: LabelSetDistribution, p_hat: LabelSetDistribution,
                 eps: float = 1e-10) -> float:
    """Directed KL(p || p_hat) over label subsets.

    Terms with p(S) = 0 contribute nothing; p_hat is floored at ``eps``
    before the log, and the tiny negative values that flooring can induce
    are clamped to 0.
    """
    if p.num_labels != p_hat.num_labels:
        raise DataError("label-set distributions have different label counts")
    if not eps > 0:
        raise ValueError("eps must be > 0")
    pv = p.probs
    qv = np.maximum(p_hat.probs, eps)
    mask = pv > 0
    return max(float(np.sum(pv[mask] * np.log(pv[mask] / qv[mask]))), 0.0)


def annotator_type_recovery(profiles, reliability) -> float:
    """Fraction of annotators whose kind is recovered from estimated reliability.

    Each annotator's estimates are averaged across labels and assigned the
    nearest kind center (ties go to the more reliable kind).
    """
    reliability = np.asarray(reliability, dtype=float)
    if reliability.ndim != 2 or reliability.shape[0] != len(profiles):
        raise DataError("reliability must be (num_annotators, num_labels)")
    centers = np.array([KIND_CENTERS[kind] for kind in KINDS])
    scores = reliability.mean(axis=1)
    predicted = np.argmin(np.abs(scores[:, None] - centers[None, :]), axis=1)
    actual = np.array([KINDS.index(p.kind) for p in profiles])
    return float(np.mean(predicted == actual))


@dataclass(frozen=True)
class EvalReport:
    """Evaluation measures for one fitted model against the ground truth."""

    f1_micro: float
    f1_macro: float
    f1_example: float
    kl_labelsets: float | None = None
    type_recovery_rate: float | None = None


REPORT_FIELDS = (
    "model", "R", "T", "L", "K", "seed",
    "f1_micro", "f1_macro", "f1_example", "kl", "recovery",
)


def report_row(report: EvalReport, *, model="", ratio=None, annotations_each=None,
               num_annotators=None, num_components=None, seed=None) -> dict:
    """Flatten an EvalReport plus its run context into one row.

    The same dict serializes as a flat JSON object or a CSV row; absent
    measures become empty strings.
    """
    def fmt(value):
        return "" if value is None else value

    return {
        "model": model,
        "R": ":".join(str(r) for r in ratio) if ratio is not None else "",
        "T": fmt(annotations_each),
        "L": fmt(num_annotators),
        "K": fmt(num_components),
        "seed": fmt(seed),
        "f1_micro": report.f1_micro,
        "f1_macro": report.f1_macro,
        "f1_example": report.f1_example,
        "kl": fmt(report.kl_labelsets),
        "recovery": fmt(report.type_recovery_rate),
    }
