"""Bayesian aggregation of noisy multi-label crowdsourced annotations.

Two aggregation models share a common interface: ``bnc`` treats every
label as an independent binary task, ``bmmb`` models label dependency
with a mixture of independent Bernoulli components. Both estimate
per-annotator reliability alongside the posterior label probabilities.
A majority-voting baseline, a heterogeneous-annotator simulator, and an
experiment sweep harness round out the toolkit; see the ``crowdagg``
command-line entry point for the end-to-end pipeline.
"""

# crowdagg.figures is intentionally not imported here: it selects the Agg
# matplotlib backend on import, which only the file-rendering paths want.
from . import bmmb, bnc, dataio, metrics, simulate, special, sweep
from .data import (
    AnnotationSet,
    BmmbState,
    BncState,
    FitConfig,
    FitResult,
    Hyperparams,
    LabelSetDistribution,
    annotation_stats,
    binarize,
    choose_prior,
)
from .errors import CapacityError, DataError

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "BmmbState",
    "BncState",
    "CapacityError",
    "DataError",
    "FitConfig",
    "FitResult",
    "Hyperparams",
    "LabelSetDistribution",
    "annotation_stats",
    "binarize",
    "bmmb",
    "bnc",
    "choose_prior",
    "dataio",
    "metrics",
    "simulate",
    "special",
    "sweep",
]
