"""Mean-field variational inference for the independent-label model (BNC).

Each of the C labels is aggregated as its own binary task: the ground
truth bit of (instance, label) is Bernoulli with a per-label prevalence,
annotators report it correctly with a per-(annotator, label) reliability,
and Beta priors sit on both rates. The fully factorized posterior is
optimized by closed-form coordinate ascent; one sweep updates

    label_prob  ->  skill (reliability Beta counts)  ->  rate (prevalence)

and then evaluates the ELBO, which is non-decreasing across sweeps.
"""

from __future__ import annotations

import numpy as np

from .data import AnnotationSet, BncState, FitConfig, FitResult, Hyperparams
from .special import beta_expect_log, log_gamma

_ENTROPY_EPS = 1e-12


def _segment_sum(values, ids, length):
    """Sum rows of an (M, C) array into ``length`` buckets keyed by ids."""
    out = np.zeros((length, values.shape[1]))
    for j in range(values.shape[1]):
        out[:, j] = np.bincount(ids, weights=values[:, j], minlength=length)
    return out


def _smoothed_vote_frequency(y: AnnotationSet) -> np.ndarray:
    """Initial label_prob: (positive votes + 0.5) / (votes + 1) per cell."""
    votes = y.annotators_per_instance()[:, None].astype(float)
    return (y.positive_votes() + 0.5) / (votes + 1.0)


def _annotation_log_scores(state, y: AnnotationSet):
    """Per-(instance, label) log-evidence sums from the annotations.

    Returns (score_present, score_absent): each annotator contributes
    E[ln reliability] when its vote matches the hypothesized bit and
    E[ln(1 - reliability)] otherwise.
    """
    skill_pos, skill_neg = beta_expect_log(state.skill_a, state.skill_b)
    pos = skill_pos[y.annotator_ids]
    neg = skill_neg[y.annotator_ids]
    bits = y.labels
    present = _segment_sum(bits * pos + (1 - bits) * neg, y.instance_ids, y.num_instances)
    absent = _segment_sum((1 - bits) * pos + bits * neg, y.instance_ids, y.num_instances)
    return present, absent


def _annotation_likelihood(state, y: AnnotationSet) -> float:
    """Expected annotation log-likelihood under the current posterior."""
    skill_pos, skill_neg = beta_expect_log(state.skill_a, state.skill_b)
    pos = skill_pos[y.annotator_ids]
    neg = skill_neg[y.annotator_ids]
    bits = y.labels
    lam = state.label_prob[y.instance_ids]
    return float(
        np.sum(lam * (bits * pos + (1 - bits) * neg))
        + np.sum((1.0 - lam) * ((1 - bits) * pos + bits * neg))
    )


def _beta_block(post_a, post_b, prior_a, prior_b) -> float:
    """Sum of -KL(Beta(post) || Beta(prior)) over all cells."""
    pos, neg = beta_expect_log(post_a, post_b)
    ln_b_post = log_gamma(post_a) + log_gamma(post_b) - log_gamma(post_a + post_b)
    ln_b_prior = log_gamma(prior_a) + log_gamma(prior_b) - log_gamma(prior_a + prior_b)
    return float(
        np.sum(ln_b_post - ln_b_prior + (prior_a - post_a) * pos + (prior_b - post_b) * neg)
    )


def _clipped_log(p):
    return np.log(np.clip(p, _ENTROPY_EPS, 1.0 - _ENTROPY_EPS))


def init_state(y: AnnotationSet, hp: Hyperparams) -> BncState:
    """Deterministic initialization from smoothed vote frequencies."""
    state = BncState(
        skill_a=np.full((y.num_annotators, y.num_labels), float(hp.a)),
        skill_b=np.full((y.num_annotators, y.num_labels), float(hp.b)),
        label_prob=_smoothed_vote_frequency(y),
        rate_a=np.full(y.num_labels, float(hp.alpha)),
        rate_b=np.full(y.num_labels, float(hp.beta)),
    )
    update_skill(state, y, hp)
    update_rates(state, hp)
    return state


def update_skill(state, y: AnnotationSet, hp: Hyperparams) -> None:
    """Reliability Beta counts: prior plus expected (dis)agreement totals.

    Conservation: (skill_a - a) + (skill_b - b) equals the number of
    instances each annotator labeled, for every label.
    """
    lam = state.label_prob[y.instance_ids]
    agree = lam * y.labels + (1.0 - lam) * (1 - y.labels)
    state.skill_a = hp.a + _segment_sum(agree, y.annotator_ids, y.num_annotators)
    state.skill_b = hp.b + _segment_sum(1.0 - agree, y.annotator_ids, y.num_annotators)


def update_labels(state: BncState, y: AnnotationSet, hp: Hyperparams) -> None:
    """Posterior label probabilities from prevalence plus annotator evidence.

    The two log-scores are normalized in the log domain (pairwise
    log-sum-exp), so unannotated cells fall back to the prior-only
    posterior sigmoid(E[ln rate] - E[ln(1 - rate)]).
    """
    rate_pos, rate_neg = beta_expect_log(state.rate_a, state.rate_b)
    present, absent = _annotation_log_scores(state, y)
    present = present + rate_pos[None, :]
    absent = absent + rate_neg[None, :]
    state.label_prob = np.exp(present - np.logaddexp(present, absent))


def update_rates(state: BncState, hp: Hyperparams) -> None:
    """Prevalence Beta counts: prior plus expected label totals."""
    lam = state.label_prob
    state.rate_a = hp.alpha + lam.sum(axis=0)
    state.rate_b = hp.beta + (1.0 - lam).sum(axis=0)


def elbo(state: BncState, y: AnnotationSet, hp: Hyperparams) -> float:
    """Evidence lower bound of the current posterior.

    Expected annotation log-likelihood, minus KL of both Beta blocks from
    their priors, plus the label block (expected prior minus entropy, with
    the 0 log 0 = 0 convention enforced by clipping inside the logs).
    """
    rate_pos, rate_neg = beta_expect_log(state.rate_a, state.rate_b)
    lam = state.label_prob
    label_block = float(
        np.sum(lam * (rate_pos[None, :] - _clipped_log(lam)))
        + np.sum((1.0 - lam) * (rate_neg[None, :] - _clipped_log(1.0 - lam)))
    )
    return (
        _annotation_likelihood(state, y)
        + _beta_block(state.skill_a, state.skill_b, hp.a, hp.b)
        + _beta_block(state.rate_a, state.rate_b, hp.alpha, hp.beta)
        + label_block
    )


def sweep_once(state: BncState, y: AnnotationSet, hp: Hyperparams) -> float:
    """One full coordinate-ascent sweep; returns the ELBO afterwards."""
    update_labels(state, y, hp)
    update_skill(state, y, hp)
    update_rates(state, hp)
    return elbo(state, y, hp)


def _relative_gain(current, previous):
    return (current - previous) / max(abs(previous), 1e-12)


def fit(y: AnnotationSet, hp: Hyperparams, cfg: FitConfig | None = None,
        on_sweep=None) -> FitResult:
    """Run coordinate ascent until the relative ELBO gain drops below eta.

    Initialization is deterministic, so restarts would be redundant and
    ``cfg.restarts`` is ignored here. ``on_sweep(iteration, state)`` is
    invoked after every sweep when given.
    """
    cfg = cfg or FitConfig()
    state = init_state(y, hp)
    trace = []
    converged = False
    for iteration in range(1, cfg.max_iter + 1):
        trace.append(sweep_once(state, y, hp))
        if on_sweep is not None:
            on_sweep(iteration, state)
        if len(trace) >= 2 and _relative_gain(trace[-1], trace[-2]) < cfg.eta:
            converged = True
            break
    return FitResult(
        model="bnc",
        label_prob=state.label_prob,
        reliability=state.skill_a / (state.skill_a + state.skill_b),
        elbo_trace=tuple(trace),
        iterations=len(trace),
        converged=converged,
    )
