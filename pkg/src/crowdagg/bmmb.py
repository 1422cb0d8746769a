"""Mean-field variational inference for the Bernoulli-mixture model (BMMB).

Ground-truth label vectors are drawn from a K-component mixture of
independent Bernoulli distributions, which lets the aggregator exploit
label dependency that the independent-label model ignores. The
variational posterior factorizes over annotator reliabilities, label
bits, component rates, component assignments, and mixing weights; a sweep
updates the blocks in the fixed order

    label_prob -> resp -> skill -> rate -> mix

each in closed form, so the ELBO is non-decreasing across sweeps. With
K = 1 every update reduces exactly to its independent-label counterpart.

Per-sweep cost is O(C (K N + M)) for M annotation records.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import bnc
from .data import (
    AnnotationSet,
    BmmbState,
    FitConfig,
    FitResult,
    Hyperparams,
    LabelSetDistribution,
    MAX_LABELSET_LABELS,
)
from .errors import CapacityError, DataError
from .special import beta_expect_log, dirichlet_expect_log, log_gamma, normalize_log_weights

_INIT_NOISE = 0.1


def init_state(y: AnnotationSet, hp: Hyperparams, rng) -> BmmbState:
    """Smoothed-vote label probabilities plus jittered uniform responsibilities."""
    num_components = hp.num_components
    resp = 1.0 / num_components + _INIT_NOISE * rng.random((y.num_instances, num_components))
    resp /= resp.sum(axis=1, keepdims=True)
    state = BmmbState(
        skill_a=np.full((y.num_annotators, y.num_labels), float(hp.a)),
        skill_b=np.full((y.num_annotators, y.num_labels), float(hp.b)),
        label_prob=bnc._smoothed_vote_frequency(y),
        rate_a=np.full((num_components, y.num_labels), float(hp.alpha)),
        rate_b=np.full((num_components, y.num_labels), float(hp.beta)),
        resp=resp,
        mix=np.full(num_components, float(hp.gamma)),
    )
    update_skill(state, y, hp)
    update_rates(state, hp)
    update_mix(state, hp)
    return state


def update_skill(state, y: AnnotationSet, hp: Hyperparams) -> None:
    """Identical to the independent-label update; depends only on label_prob."""
    bnc.update_skill(state, y, hp)


def update_labels(state: BmmbState, y: AnnotationSet, hp: Hyperparams) -> None:
    """Label posterior: responsibility-weighted component rates plus votes."""
    rate_pos, rate_neg = beta_expect_log(state.rate_a, state.rate_b)
    present, absent = bnc._annotation_log_scores(state, y)
    present = present + state.resp @ rate_pos
    absent = absent + state.resp @ rate_neg
    state.label_prob = np.exp(present - np.logaddexp(present, absent))


def update_rates(state: BmmbState, hp: Hyperparams) -> None:
    """Component rate Beta counts: responsibility-weighted label totals.

    Conservation: (rate_a - alpha) + (rate_b - beta) equals the total
    responsibility mass of the component, for every label.
    """
    lam = state.label_prob
    state.rate_a = hp.alpha + state.resp.T @ lam
    state.rate_b = hp.beta + state.resp.T @ (1.0 - lam)


def update_resp(state: BmmbState, hp: Hyperparams) -> None:
    """Responsibilities: row-wise log-sum-exp normalized component scores."""
    rate_pos, rate_neg = beta_expect_log(state.rate_a, state.rate_b)
    scores = (
        dirichlet_expect_log(state.mix)[None, :]
        + state.label_prob @ rate_pos.T
        + (1.0 - state.label_prob) @ rate_neg.T
    )
    state.resp = normalize_log_weights(scores, axis=1)


def update_mix(state: BmmbState, hp: Hyperparams) -> None:
    """Dirichlet counts over mixing weights: prior plus responsibility mass."""
    state.mix = hp.gamma + state.resp.sum(axis=0)


def elbo(state: BmmbState, y: AnnotationSet, hp: Hyperparams) -> float:
    """Evidence lower bound of the current posterior.

    Expected annotation log-likelihood, minus KL from the priors for the
    reliability and rate Beta blocks and the mixing-weight Dirichlet,
    plus the label and assignment blocks (expected log-prior minus
    entropy, with 0 log 0 = 0 enforced by clipping inside the logs).
    """
    rate_pos, rate_neg = beta_expect_log(state.rate_a, state.rate_b)
    mix_log = dirichlet_expect_log(state.mix)
    lam = state.label_prob
    resp = state.resp
    num_components = hp.num_components

    label_block = float(
        np.sum(resp * (lam @ rate_pos.T + (1.0 - lam) @ rate_neg.T))
        - np.sum(lam * bnc._clipped_log(lam) + (1.0 - lam) * bnc._clipped_log(1.0 - lam))
    )
    assign_block = float(np.sum(resp * (mix_log[None, :] - np.log(np.clip(resp, 1e-12, 1.0)))))
    mix_block = float(
        log_gamma(num_components * hp.gamma)
        - num_components * log_gamma(hp.gamma)
        + np.sum(log_gamma(state.mix))
        - log_gamma(np.sum(state.mix))
        + np.sum((hp.gamma - state.mix) * mix_log)
    )
    return (
        bnc._annotation_likelihood(state, y)
        + bnc._beta_block(state.skill_a, state.skill_b, hp.a, hp.b)
        + bnc._beta_block(state.rate_a, state.rate_b, hp.alpha, hp.beta)
        + label_block
        + assign_block
        + mix_block
    )


def sweep_once(state: BmmbState, y: AnnotationSet, hp: Hyperparams) -> float:
    """One full coordinate-ascent sweep; returns the ELBO afterwards."""
    update_labels(state, y, hp)
    update_resp(state, hp)
    update_skill(state, y, hp)
    update_rates(state, hp)
    update_mix(state, hp)
    return elbo(state, y, hp)


def fit(y: AnnotationSet, hp: Hyperparams, cfg: FitConfig | None = None,
        on_sweep=None) -> FitResult:
    """Fit with independent restarts, keeping the highest final ELBO.

    Mixture objectives are multimodal, so the default is 3 restarts, each
    seeded from (cfg.seed, restart index). ``on_sweep(iteration, state)``
    is invoked after every sweep of every restart when given.
    """
    cfg = cfg or FitConfig()
    restarts = cfg.restarts if cfg.restarts is not None else 3
    best = None
    for restart in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(restart,)))
        state = init_state(y, hp, rng)
        trace = []
        converged = False
        for iteration in range(1, cfg.max_iter + 1):
            trace.append(sweep_once(state, y, hp))
            if on_sweep is not None:
                on_sweep(iteration, state)
            if len(trace) >= 2 and bnc._relative_gain(trace[-1], trace[-2]) < cfg.eta:
                converged = True
                break
        if best is None or trace[-1] > best[1][-1]:
            best = (state, trace, converged)
    state, trace, converged = best
    return FitResult(
        model="bmmb",
        label_prob=state.label_prob,
        reliability=state.skill_a / (state.skill_a + state.skill_b),
        elbo_trace=tuple(trace),
        iterations=len(trace),
        converged=converged,
        mix_mean=state.mix / state.mix.sum(),
        rate_mean=state.rate_a / (state.rate_a + state.rate_b),
    )


def distribution_from_mixture(mix_mean, rate_mean) -> LabelSetDistribution:
    """Label-set distribution implied by mixture posterior means.

    The probability of subset S sums, over components, the mixing weight
    times the product of rates for labels in S and complements outside S.
    Subsets are indexed by reading the label vector as a binary numeral
    (label 0 most significant).
    """
    mix_mean = np.asarray(mix_mean, dtype=float)
    rate_mean = np.asarray(rate_mean, dtype=float)
    if rate_mean.ndim != 2 or rate_mean.shape[0] != mix_mean.size:
        raise DataError("rate_mean must be (num_components, num_labels)")
    num_labels = rate_mean.shape[1]
    if num_labels > MAX_LABELSET_LABELS:
        raise CapacityError(
            f"label-set distributions support at most {MAX_LABELSET_LABELS} labels,"
            f" got {num_labels}"
        )
    probs = np.zeros(2 ** num_labels)
    for k in range(mix_mean.size):
        subset = np.array([1.0])
        for j in reversed(range(num_labels)):
            rate = rate_mean[k, j]
            subset = np.concatenate([subset * (1.0 - rate), subset * rate])
        probs += mix_mean[k] * subset
    return LabelSetDistribution(num_labels, probs / probs.sum())


def label_set_distribution(result: FitResult) -> LabelSetDistribution:
    """Label-set distribution of a mixture fit (mixture models only)."""
    if result.mix_mean is None or result.rate_mean is None:
        raise DataError("label-set distribution requires a mixture-model fit")
    return distribution_from_mixture(result.mix_mean, result.rate_mean)


def best_component_permutation(rate_est, rate_ref):
    """Permutation p minimizing sum_k |rate_est[p[k]] - rate_ref[k]|.

    Exhaustive over component permutations; intended for aligning a
    fitted mixture with a planted one at small K.
    """
    rate_est = np.asarray(rate_est, dtype=float)
    rate_ref = np.asarray(rate_ref, dtype=float)
    if rate_est.shape != rate_ref.shape:
        raise DataError("component rate matrices must have equal shapes")
    num_components = rate_est.shape[0]
    dist = np.abs(rate_est[:, None, :] - rate_ref[None, :, :]).sum(axis=2)
    best_perm = None
    best_cost = np.inf
    for perm in itertools.permutations(range(num_components)):
        cost = dist[list(perm), range(num_components)].sum()
        if cost < best_cost:
            best_cost = cost
            best_perm = perm
    return best_perm
