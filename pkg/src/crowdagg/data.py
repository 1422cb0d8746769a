"""Core data types: annotation stores, model states, and configuration.

Notation used throughout the package:

    N   number of instances
    C   number of labels
    L   number of annotators
    K   number of mixture components

An annotation is a full C-bit label vector supplied by one annotator for
one instance; the ground truth and all predictions are N x C binary
matrices held as plain numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DataError

MAX_LABELSET_LABELS = 20


def as_label_matrix(values) -> np.ndarray:
    """Validate and coerce an N x C binary matrix to uint8."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise DataError(f"label matrix must be 2-dimensional, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise DataError("label matrix entries must be 0 or 1")
    return arr.astype(np.uint8)


@dataclass(frozen=True)
class AnnotationSet:
    """Sparse store of per-annotator, per-instance binary label vectors.

    Records are kept in canonical order, sorted by (annotator, instance);
    at most one record may exist per (annotator, instance) pair and every
    label vector has exactly ``num_labels`` bits. Instances and annotators
    that appear in no record are allowed.
    """

    num_instances: int
    num_labels: int
    num_annotators: int
    annotator_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    instance_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.intp))
    labels: np.ndarray = None

    def __post_init__(self):
        ann = np.asarray(self.annotator_ids, dtype=np.intp)
        ins = np.asarray(self.instance_ids, dtype=np.intp)
        labels = self.labels
        if labels is None:
            labels = np.zeros((0, self.num_labels), dtype=np.uint8)
        labels = np.asarray(labels)
        if min(self.num_instances, self.num_labels, self.num_annotators) < 0:
            raise DataError("dimensions must be non-negative")
        if ann.shape != ins.shape or ann.ndim != 1:
            raise DataError("annotator_ids and instance_ids must be equal-length vectors")
        if labels.shape != (ann.size, self.num_labels):
            raise DataError(
                f"labels must have shape ({ann.size}, {self.num_labels}), got {labels.shape}"
            )
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise DataError("annotation labels must be 0 or 1")
        if ann.size:
            if ann.min() < 0 or ann.max() >= self.num_annotators:
                raise DataError("annotator id out of range")
            if ins.min() < 0 or ins.max() >= self.num_instances:
                raise DataError("instance id out of range")
        order = np.lexsort((ins, ann))
        ann, ins, labels = ann[order], ins[order], labels.astype(np.uint8)[order]
        if ann.size > 1:
            dup = (ann[1:] == ann[:-1]) & (ins[1:] == ins[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise DataError(
                    f"duplicate annotation for annotator {ann[k]}, instance {ins[k]}"
                )
        for name, arr in (("annotator_ids", ann), ("instance_ids", ins), ("labels", labels)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_records(cls, records, num_instances, num_labels, num_annotators):
        """Build from an iterable of (annotator_id, instance_id, bits) triples."""
        records = list(records)
        ann = np.array([r[0] for r in records], dtype=np.intp)
        ins = np.array([r[1] for r in records], dtype=np.intp)
        labels = np.array([list(r[2]) for r in records], dtype=np.uint8)
        labels = labels.reshape(len(records), num_labels)
        return cls(num_instances, num_labels, num_annotators, ann, ins, labels)

    @property
    def num_records(self) -> int:
        return int(self.annotator_ids.size)

    def records(self):
        """Iterate (annotator_id, instance_id, label_vector) in canonical order."""
        for k in range(self.num_records):
            yield int(self.annotator_ids[k]), int(self.instance_ids[k]), self.labels[k]

    def positive_votes(self) -> np.ndarray:
        """N x C counts of annotators voting 1 on each (instance, label)."""
        out = np.zeros((self.num_instances, self.num_labels))
        for j in range(self.num_labels):
            out[:, j] = np.bincount(
                self.instance_ids, weights=self.labels[:, j], minlength=self.num_instances
            )
        return out

    def annotators_per_instance(self) -> np.ndarray:
        """|L(i)| for each instance."""
        return np.bincount(self.instance_ids, minlength=self.num_instances)

    def records_per_annotator(self) -> np.ndarray:
        """|N(l)| for each annotator."""
        return np.bincount(self.annotator_ids, minlength=self.num_annotators)

    def by_annotator(self):
        """Iterate (annotator_id, instance_ids, labels) groups, one per annotator."""
        for l in range(self.num_annotators):
            mask = self.annotator_ids == l
            yield l, self.instance_ids[mask], self.labels[mask]

    def by_instance(self):
        """Iterate (instance_id, annotator_ids, labels) groups, one per instance."""
        for i in range(self.num_instances):
            mask = self.instance_ids == i
            yield i, self.annotator_ids[mask], self.labels[mask]


@dataclass(frozen=True)
class Hyperparams:
    """Prior parameters for both aggregation models.

    ``a, b`` are the Beta prior on annotator reliability, ``alpha, beta``
    the Beta prior on label rates, and ``gamma`` the symmetric Dirichlet
    parameter over mixing weights (defaults to 1/K). The independent-label
    model ignores ``gamma`` and ``num_components``.
    """

    a: float
    b: float
    alpha: float = 0.06
    beta: float = 0.84
    gamma: float | None = None
    num_components: int = 1

    def __post_init__(self):
        if self.num_components < 1:
            raise DataError("num_components must be >= 1")
        if self.gamma is None:
            object.__setattr__(self, "gamma", 1.0 / self.num_components)
        for name in ("a", "b", "alpha", "beta", "gamma"):
            if not getattr(self, name) > 0:
                raise DataError(f"hyperparameter {name} must be > 0")

    @classmethod
    def for_annotations(cls, annotations: AnnotationSet, num_components: int = 1, **overrides):
        """Pick (a, b) from the annotation density unless overridden."""
        if "a" not in overrides or "b" not in overrides:
            avg, _ = annotation_stats(annotations)
            a, b = choose_prior(avg)
            overrides.setdefault("a", a)
            overrides.setdefault("b", b)
        return cls(num_components=num_components, **overrides)


@dataclass(frozen=True)
class FitConfig:
    """Termination and restart settings for the fit drivers.

    ``restarts=None`` resolves to each model's default: 1 for the
    independent-label model (deterministic initialization) and 3 for the
    mixture model.
    """

    eta: float = 1e-4
    max_iter: int = 500
    restarts: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.eta > 0:
            raise DataError("eta must be > 0")
        if self.max_iter < 1:
            raise DataError("max_iter must be >= 1")
        if self.restarts is not None and self.restarts < 1:
            raise DataError("restarts must be >= 1")


@dataclass
class BncState:
    """Variational parameters of the independent-label model.

    skill_a, skill_b : L x C Beta parameters of annotator reliability
    label_prob       : N x C posterior probability that a label is present
    rate_a, rate_b   : length-C Beta parameters of per-label prevalence
    """

    skill_a: np.ndarray
    skill_b: np.ndarray
    label_prob: np.ndarray
    rate_a: np.ndarray
    rate_b: np.ndarray


@dataclass
class BmmbState:
    """Variational parameters of the Bernoulli-mixture model.

    skill_a, skill_b : L x C Beta parameters of annotator reliability
    label_prob       : N x C posterior probability that a label is present
    rate_a, rate_b   : K x C Beta parameters of per-component label rates
    resp             : N x K responsibilities (rows sum to 1)
    mix              : length-K Dirichlet parameters over mixing weights
    """

    skill_a: np.ndarray
    skill_b: np.ndarray
    label_prob: np.ndarray
    rate_a: np.ndarray
    rate_b: np.ndarray
    resp: np.ndarray
    mix: np.ndarray


@dataclass(frozen=True)
class FitResult:
    """Output of a fit: posterior label probabilities plus diagnostics.

    ``reliability`` is the posterior-mean annotator reliability
    skill_a / (skill_a + skill_b). For the mixture model, ``mix_mean`` and
    ``rate_mean`` hold the posterior means of the mixing weights and
    per-component label rates; they are None otherwise.
    """

    model: str
    label_prob: np.ndarray
    reliability: np.ndarray
    elbo_trace: tuple
    iterations: int
    converged: bool
    mix_mean: np.ndarray | None = None
    rate_mean: np.ndarray | None = None


@dataclass(frozen=True)
class LabelSetDistribution:
    """Probability vector over all 2^C label subsets.

    ``probs[s]`` is the probability of the subset whose bitmask is ``s``,
    where a label vector is read as a binary numeral with label 0 in the
    most significant position (row (1, 0) -> index 0b10).
    """

    num_labels: int
    probs: np.ndarray

    def __post_init__(self):
        if self.num_labels > MAX_LABELSET_LABELS:
            raise CapacityError(
                f"label-set distributions support at most {MAX_LABELSET_LABELS} labels,"
                f" got {self.num_labels}"
            )
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (2 ** self.num_labels,):
            raise DataError(
                f"expected {2 ** self.num_labels} subset probabilities, got {probs.shape}"
            )
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise DataError("subset probabilities must be non-negative and sum to 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


def binarize(label_prob, threshold: float = 0.5) -> np.ndarray:
    """Threshold posterior label probabilities into an N x C binary matrix.

    An entry is 1 iff its probability is >= threshold; 0.5 is the Bayes
    decision boundary under symmetric loss, hence the default.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    return (np.asarray(label_prob, dtype=float) >= threshold).astype(np.uint8)


def annotation_stats(annotations: AnnotationSet):
    """Average annotations per instance and per-annotator record counts."""
    counts = annotations.records_per_annotator()
    if annotations.num_instances == 0:
        return 0.0, counts
    return annotations.num_records / annotations.num_instances, counts


def choose_prior(avg_per_instance: float):
    """Reliability prior (a, b) keyed on the average annotations per instance.

    Sparser annotation coverage gets a stronger optimistic prior.
    """
    if avg_per_instance < 0:
        raise DataError("average annotations per instance cannot be negative")
    if avg_per_instance < 2:
        return 12.0, 1.0
    if avg_per_instance < 4:
        return 6.0, 1.0
    return 4.0, 1.0
