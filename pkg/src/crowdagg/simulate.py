"""Heterogeneous annotator pools and noisy annotation generation.

Annotators come in three kinds with per-label reliability (probability of
agreeing with the ground truth) drawn once per (annotator, label):

    reliable  Uni[0.85, 0.99)
    normal    Uni[0.66, 0.85)
    random    exactly 0.5

Every random draw is keyed on (seed, stream, annotator_id) through
numpy's SeedSequence spawn keys, so regenerating with more annotators
never reshuffles the draws of earlier ones, and generation for distinct
annotators could run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import AnnotationSet, as_label_matrix
from .errors import DataError

RELIABLE = "reliable"
NORMAL = "normal"
RANDOM = "random"
KINDS = (RELIABLE, NORMAL, RANDOM)
RELIABILITY_RANGE = {RELIABLE: (0.85, 0.99), NORMAL: (0.66, 0.85)}

_STREAM_POOL = 0
_STREAM_LABELS = 1
_STREAM_PLANT = 2


@dataclass(frozen=True)
class AnnotatorProfile:
    """One simulated annotator: its kind and true per-label reliability."""

    annotator_id: int
    kind: str
    reliability: np.ndarray


@dataclass(frozen=True)
class SimConfig:
    """Pool shape: kind ratio, annotations per annotator, pool size, seed."""

    ratio: tuple
    annotations_each: int
    num_annotators: int
    seed: int = 0

    def __post_init__(self):
        ratio = tuple(int(r) for r in self.ratio)
        if len(ratio) != 3 or any(r < 0 for r in ratio) or sum(ratio) == 0:
            raise DataError("ratio must be three non-negative integers, not all zero")
        object.__setattr__(self, "ratio", ratio)
        if self.annotations_each < 1:
            raise DataError("annotations_each must be >= 1")
        if self.num_annotators < 1:
            raise DataError("num_annotators must be >= 1")


def _stream_rng(seed, stream, index=0):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, index)))


def apportion(ratio, total: int) -> list:
    """Split ``total`` into integer counts proportional to ``ratio``.

    Largest-remainder rounding: each count differs from its exact share by
    less than 1, and ties go to the lower index, deterministically.
    """
    weights = np.asarray(ratio, dtype=float)
    if np.any(weights < 0) or weights.sum() <= 0:
        raise DataError("ratio entries must be non-negative with a positive sum")
    shares = total * weights / weights.sum()
    counts = np.floor(shares).astype(int)
    order = np.argsort(-(shares - counts), kind="stable")
    counts[order[: total - counts.sum()]] += 1
    return counts.tolist()


def sample_annotator_pool(cfg: SimConfig, num_labels: int):
    """Draw the annotator pool with kind counts apportioned from cfg.ratio."""
    counts = apportion(cfg.ratio, cfg.num_annotators)
    profiles = []
    annotator_id = 0
    for kind, count in zip(KINDS, counts):
        for _ in range(count):
            if kind == RANDOM:
                reliability = np.full(num_labels, 0.5)
            else:
                lo, hi = RELIABILITY_RANGE[kind]
                rng = _stream_rng(cfg.seed, _STREAM_POOL, annotator_id)
                reliability = rng.uniform(lo, hi, size=num_labels)
            reliability.setflags(write=False)
            profiles.append(AnnotatorProfile(annotator_id, kind, reliability))
            annotator_id += 1
    return profiles


def generate_annotations(truth, profiles, annotations_each: int, seed: int) -> AnnotationSet:
    """Produce noisy annotations of ``truth`` from the given pool.

    Each annotator labels a uniformly random subset of ``annotations_each``
    instances without replacement; every bit independently agrees with the
    ground truth with that annotator's per-label reliability.
    """
    z = as_label_matrix(truth)
    num_instances, num_labels = z.shape
    if not 1 <= annotations_each <= num_instances:
        raise DataError(
            f"annotations_each={annotations_each} must be in [1, {num_instances}]"
        )
    annotator_ids = []
    instance_ids = []
    labels = []
    for profile in profiles:
        if profile.reliability.shape != (num_labels,):
            raise DataError("profile reliability length does not match label count")
        rng = _stream_rng(seed, _STREAM_LABELS, profile.annotator_id)
        chosen = np.sort(rng.choice(num_instances, size=annotations_each, replace=False))
        agree = rng.random((annotations_each, num_labels)) < profile.reliability[None, :]
        labels.append(np.where(agree, z[chosen], 1 - z[chosen]))
        instance_ids.append(chosen)
        annotator_ids.append(np.full(annotations_each, profile.annotator_id))
    return AnnotationSet(
        num_instances=num_instances,
        num_labels=num_labels,
        num_annotators=max((p.annotator_id for p in profiles), default=-1) + 1,
        annotator_ids=np.concatenate(annotator_ids) if profiles else np.zeros(0, dtype=np.intp),
        instance_ids=np.concatenate(instance_ids) if profiles else np.zeros(0, dtype=np.intp),
        labels=np.concatenate(labels) if profiles else None,
    )


def plant_mixture_ground_truth(num_instances, num_labels, mix_weights, rates, seed):
    """Sample a ground-truth matrix from a Bernoulli mixture.

    Each instance draws a component from ``mix_weights`` and then
    independent per-label bits from that component's row of ``rates``.
    Returns (N x C matrix, component assignments).
    """
    mix_weights = np.asarray(mix_weights, dtype=float)
    rates = np.asarray(rates, dtype=float)
    if abs(mix_weights.sum() - 1.0) > 1e-9 or np.any(mix_weights < 0):
        raise DataError("mix_weights must be a probability vector")
    if rates.ndim != 2 or rates.shape != (mix_weights.size, num_labels):
        raise DataError("rates must have shape (num_components, num_labels)")
    if np.any(rates < 0) or np.any(rates > 1):
        raise DataError("rates must lie in [0, 1]")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STREAM_PLANT,)))
    assignments = rng.choice(mix_weights.size, size=num_instances, p=mix_weights)
    truth = (rng.random((num_instances, num_labels)) < rates[assignments]).astype(np.uint8)
    return truth, assignments


def random_planted_mixture(num_instances, num_labels, num_components, seed,
                           lo: float = 0.1, hi: float = 0.9):
    """Plant a mixture with distinct two-level rate patterns.

    Component rates are coin-flip patterns over {lo, hi} (resampled until
    all components differ), mixing weights are uniform. Returns
    (mix_weights, rates, truth, assignments).
    """
    if num_components > 2 ** num_labels:
        raise DataError("cannot plant more distinct components than label patterns")
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STREAM_PLANT, 1)))
    patterns = set()
    rows = []
    while len(rows) < num_components:
        bits = tuple(rng.integers(0, 2, size=num_labels).tolist())
        if bits in patterns:
            continue
        patterns.add(bits)
        rows.append([hi if b else lo for b in bits])
    rates = np.array(rows)
    mix_weights = np.full(num_components, 1.0 / num_components)
    truth, assignments = plant_mixture_ground_truth(
        num_instances, num_labels, mix_weights, rates, seed
    )
    return mix_weights, rates, truth, assignments


PROFILE_HEADER_PREFIX = "annotator,kind"


def write_profiles(profiles, path):
    """Write the pool as CSV: annotator,kind,rel_0,...,rel_{C-1}."""
    num_labels = profiles[0].reliability.size if profiles else 0
    header = PROFILE_HEADER_PREFIX + "".join(f",rel_{j}" for j in range(num_labels))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        for p in profiles:
            values = ",".join(repr(float(v)) for v in p.reliability)
            fh.write(f"{p.annotator_id},{p.kind},{values}\n")


def read_profiles(path):
    """Read a pool written by write_profiles."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    while lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(PROFILE_HEADER_PREFIX):
        raise DataError(f"{path}:1: expected header starting with {PROFILE_HEADER_PREFIX!r}")
    profiles = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) < 3:
            raise DataError(f"{path}:{lineno}: expected at least 3 fields")
        if cells[1] not in KINDS:
            raise DataError(f"{path}:{lineno}: unknown annotator kind {cells[1]!r}")
        try:
            reliability = np.array([float(v) for v in cells[2:]])
            profiles.append(AnnotatorProfile(int(cells[0]), cells[1], reliability))
        except ValueError:
            raise DataError(f"{path}:{lineno}: malformed profile row") from None
    return profiles
