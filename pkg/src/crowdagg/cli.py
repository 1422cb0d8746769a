"""Command-line pipeline: simulate, fit, eval, sweep, report-components.

Exit codes: 0 on success, 2 for usage errors (argparse), 3 for data
errors (unreadable or malformed files, inconsistent dimensions, invalid
parameter combinations).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import bmmb, bnc, dataio
from .data import (
    FitConfig,
    Hyperparams,
    MAX_LABELSET_LABELS,
    annotation_stats,
    binarize,
)
from .errors import DataError
from .metrics import (
    EvalReport,
    annotator_type_recovery,
    empirical_label_distribution,
    f1_scores,
    kl_labelsets,
    majority_vote,
    report_row,
)
from .simulate import (
    SimConfig,
    generate_annotations,
    random_planted_mixture,
    read_profiles,
    sample_annotator_pool,
    write_profiles,
)
from .sweep import AXES, MODELS, SweepSpec, run_sweep, write_sweep_csv


def _parse_ratio(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"ratio must look like a:b:c, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"ratio must be integers, got {text!r}") from None


def _parse_plant(text):
    try:
        n, c, k = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"plant argument must look like N,C,K, got {text!r}"
        ) from None
    return n, c, k


def _parse_int_list(text):
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_dataset_args(parser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--dataset", help="label CSV or ARFF file with the ground truth")
    group.add_argument(
        "--plant",
        type=_parse_plant,
        metavar="N,C,K",
        help="plant a K-component Bernoulli-mixture ground truth instead",
    )
    parser.add_argument(
        "--labels-file",
        help="file with one label name per line (required for ARFF datasets)",
    )


def _load_truth(args, seed):
    if args.plant is not None:
        n, c, k = args.plant
        _, _, truth, _ = random_planted_mixture(n, c, k, seed)
        names = [f"label_{j}" for j in range(c)]
        return names, truth
    if args.dataset.lower().endswith(".arff"):
        if not args.labels_file:
            raise DataError("--labels-file is required with an ARFF dataset")
        names = dataio.read_label_names(args.labels_file)
        descriptor, truth = dataio.load_mulan_arff(args.dataset, names)
    else:
        descriptor, truth = dataio.load_label_matrix_csv(args.dataset)
    return descriptor.label_names, truth


def _default_profiles_path(out):
    return (out[: -len(".csv")] if out.endswith(".csv") else out) + ".profiles.csv"


def _cmd_simulate(args):
    names, truth = _load_truth(args, args.seed)
    cfg = SimConfig(
        ratio=args.ratio,
        annotations_each=args.annotations_each,
        num_annotators=args.num_annotators,
        seed=args.seed,
    )
    profiles = sample_annotator_pool(cfg, truth.shape[1])
    annotations = generate_annotations(truth, profiles, args.annotations_each, args.seed)
    dataio.write_annotations(annotations, args.out)
    write_profiles(profiles, args.profiles_out or _default_profiles_path(args.out))
    if args.truth_out:
        dataio.write_label_matrix_csv(args.truth_out, names, truth)
    print(f"wrote {annotations.num_records} annotations to {args.out}")
    return 0


def _cmd_fit(args):
    annotations = dataio.read_annotations(
        args.annotations,
        num_instances=args.num_instances,
        num_labels=args.num_labels,
        num_annotators=args.num_annotators,
    )
    if args.model == "mv":
        payload = {
            "model": "mv",
            "num_instances": annotations.num_instances,
            "num_labels": annotations.num_labels,
            "num_annotators": annotations.num_annotators,
            "predictions": majority_vote(annotations).tolist(),
        }
        dataio.write_result(args.out, payload)
        print(f"wrote majority-vote result to {args.out}")
        return 0

    overrides = {}
    for name in ("a", "b", "alpha", "beta", "gamma"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    hp = Hyperparams.for_annotations(
        annotations, num_components=args.num_components, **overrides
    )
    cfg = FitConfig(
        eta=args.eta, max_iter=args.max_iter, restarts=args.restarts, seed=args.seed
    )
    result = (
        bmmb.fit(annotations, hp, cfg) if args.model == "bmmb" else bnc.fit(annotations, hp, cfg)
    )
    avg, _ = annotation_stats(annotations)
    payload = {
        "model": result.model,
        "num_instances": annotations.num_instances,
        "num_labels": annotations.num_labels,
        "num_annotators": annotations.num_annotators,
        "avg_annotations_per_instance": avg,
        "hyperparams": {
            "a": hp.a, "b": hp.b, "alpha": hp.alpha, "beta": hp.beta,
            "gamma": hp.gamma, "K": hp.num_components,
        },
        "fit": {
            "eta": cfg.eta, "max_iter": cfg.max_iter,
            "restarts": cfg.restarts, "seed": cfg.seed,
        },
        "label_prob": result.label_prob.tolist(),
        "reliability": result.reliability.tolist(),
        "elbo_trace": list(result.elbo_trace),
        "iterations": result.iterations,
        "converged": result.converged,
    }
    if result.model == "bmmb":
        payload["mix_mean"] = result.mix_mean.tolist()
        payload["rate_mean"] = result.rate_mean.tolist()
    dataio.write_result(args.out, payload)
    print(
        f"{result.model}: {result.iterations} iterations,"
        f" converged={result.converged}, final ELBO {result.elbo_trace[-1]:.6f}"
    )
    return 0


def _predictions_from_result(payload):
    if payload["model"] == "mv":
        return np.asarray(payload["predictions"], dtype=np.uint8)
    return binarize(np.asarray(payload["label_prob"], dtype=float), 0.5)


def _cmd_eval(args):
    _, truth = dataio.load_label_matrix_csv(args.truth)
    payload = dataio.read_result(args.result)
    predictions = _predictions_from_result(payload)
    if predictions.shape != truth.shape:
        raise DataError(
            f"result shape {predictions.shape} does not match truth shape {truth.shape}"
        )
    micro, macro, example = f1_scores(truth, predictions)
    kl = None
    if payload["model"] == "bmmb" and truth.shape[1] <= MAX_LABELSET_LABELS:
        estimated = bmmb.distribution_from_mixture(
            np.asarray(payload["mix_mean"], dtype=float),
            np.asarray(payload["rate_mean"], dtype=float),
        )
        kl = kl_labelsets(empirical_label_distribution(truth), estimated)
    recovery = None
    if args.profiles and payload["model"] != "mv":
        profiles = read_profiles(args.profiles)
        reliability = np.asarray(payload["reliability"], dtype=float)
        recovery = annotator_type_recovery(profiles, reliability)
    report = EvalReport(micro, macro, example, kl_labelsets=kl, type_recovery_rate=recovery)
    row = report_row(report, model=payload["model"], seed=payload.get("fit", {}).get("seed"))
    flat = {key: value for key, value in row.items() if value != ""}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(flat, fh, indent=2)
        fh.write("\n")
    print(f"f1_micro={micro:.4f} f1_macro={macro:.4f} f1_example={example:.4f}")
    return 0


def _cmd_sweep(args):
    _, truth = _load_truth(args, args.seed)
    if args.axis == "R":
        try:
            values = tuple(_parse_ratio(v) for v in args.values.split(","))
        except argparse.ArgumentTypeError as exc:
            raise DataError(str(exc)) from None
    else:
        values = _parse_int_list(args.values)
    spec = SweepSpec(
        truth=truth,
        models=tuple(args.models.split(",")),
        axis=args.axis,
        values=values,
        seeds=args.seeds,
        ratio=args.ratio,
        annotations_each=args.annotations_each,
        num_annotators=args.num_annotators,
        num_components=args.num_components,
        eta=args.eta,
        max_iter=args.max_iter,
        restarts=args.restarts,
    )
    rows = run_sweep(spec, workers=args.workers)
    write_sweep_csv(args.out, rows, spec)
    print(f"wrote {len(rows)} rows to {args.out}")
    if args.figure:
        from .figures import render_sweep_figure

        render_sweep_figure(rows, args.axis, args.figure, metric=args.figure_metric)
        print(f"wrote figure to {args.figure}")
    return 0


def _cmd_report_components(args):
    payload = dataio.read_result(args.result)
    if payload["model"] != "bmmb" or "mix_mean" not in payload:
        raise DataError("report-components requires a mixture-model result")
    mix_mean = np.asarray(payload["mix_mean"], dtype=float)
    rate_mean = np.asarray(payload["rate_mean"], dtype=float)
    order = np.argsort(-mix_mean)
    num_labels = rate_mean.shape[1]
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["component", "share"] + [f"rate_{j}" for j in range(num_labels)])
        for k in order:
            writer.writerow([int(k), repr(float(mix_mean[k]))]
                            + [repr(float(v)) for v in rate_mean[k]])
    print(f"wrote {mix_mean.size} components to {args.out}")
    if args.figure:
        from .figures import render_component_figure

        render_component_figure(mix_mean, rate_mean, args.figure)
        print(f"wrote figure to {args.figure}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="crowdagg",
        description="Aggregate noisy multi-label crowdsourced annotations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate noisy annotations from a ground truth")
    _add_dataset_args(p_sim)
    p_sim.add_argument("-R", "--ratio", type=_parse_ratio, default=(1, 1, 1),
                       help="reliable:normal:random annotator ratio (default 1:1:1)")
    p_sim.add_argument("-T", "--annotations-each", type=int, default=5,
                       help="instances annotated by each annotator (default 5)")
    p_sim.add_argument("-L", "--num-annotators", type=int, default=100,
                       help="annotator pool size (default 100)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, help="annotation CSV output path")
    p_sim.add_argument("--profiles-out", help="profiles CSV path (default <out>.profiles.csv)")
    p_sim.add_argument("--truth-out", help="also write the (planted) ground truth CSV here")
    p_sim.set_defaults(func=_cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit an aggregation model to annotations")
    p_fit.add_argument("--model", required=True, choices=MODELS)
    p_fit.add_argument("--annotations", required=True, help="annotation CSV path")
    p_fit.add_argument("--num-instances", type=int, help="instance count (default: inferred)")
    p_fit.add_argument("--num-labels", type=int, help="label count (default: inferred)")
    p_fit.add_argument("--num-annotators", type=int, help="annotator count (default: inferred)")
    p_fit.add_argument("-K", "--num-components", type=int, default=1,
                       help="mixture components for the bmmb model (default 1)")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--eta", type=float, default=1e-4,
                       help="relative ELBO improvement threshold (default 1e-4)")
    p_fit.add_argument("--max-iter", type=int, default=500)
    p_fit.add_argument("--restarts", type=int, default=None,
                       help="independent restarts (default: 3 for bmmb, 1 for bnc)")
    p_fit.add_argument("--a", type=float, help="override the reliability prior a")
    p_fit.add_argument("--b", type=float, help="override the reliability prior b")
    p_fit.add_argument("--alpha", type=float, help="override the label-rate prior alpha")
    p_fit.add_argument("--beta", type=float, help="override the label-rate prior beta")
    p_fit.add_argument("--gamma", type=float, help="override the mixing-weight prior gamma")
    p_fit.add_argument("--out", required=True, help="result JSON output path")
    p_fit.set_defaults(func=_cmd_fit)

    p_eval = sub.add_parser("eval", help="score a result file against the ground truth")
    p_eval.add_argument("--truth", required=True, help="ground-truth label CSV")
    p_eval.add_argument("--result", required=True, help="result JSON from fit")
    p_eval.add_argument("--profiles", help="profiles CSV for annotator-type recovery")
    p_eval.add_argument("--out", required=True, help="evaluation report JSON path")
    p_eval.set_defaults(func=_cmd_eval)

    p_sweep = sub.add_parser("sweep", help="grid of simulate/fit/eval runs, one CSV row each")
    _add_dataset_args(p_sweep)
    p_sweep.add_argument("--models", default="mv,bnc,bmmb",
                         help="comma-separated subset of mv,bnc,bmmb")
    p_sweep.add_argument("--axis", required=True, choices=AXES)
    p_sweep.add_argument("--values", required=True,
                         help="swept values: integers '5,15,30' or ratios '7:7:0,4:4:6'")
    p_sweep.add_argument("--seeds", type=_parse_int_list, default=(0,),
                         help="comma-separated base seeds (default 0)")
    p_sweep.add_argument("-R", "--ratio", type=_parse_ratio, default=(1, 1, 1))
    p_sweep.add_argument("-T", "--annotations-each", type=int, default=5)
    p_sweep.add_argument("-L", "--num-annotators", type=int, default=100)
    p_sweep.add_argument("-K", "--num-components", type=int, default=1)
    p_sweep.add_argument("--seed", type=int, default=0,
                         help="seed for the planted ground truth (with --plant)")
    p_sweep.add_argument("--eta", type=float, default=1e-4)
    p_sweep.add_argument("--max-iter", type=int, default=500)
    p_sweep.add_argument("--restarts", type=int, default=None)
    p_sweep.add_argument("--workers", type=int, default=1,
                         help="parallel worker processes (default 1)")
    p_sweep.add_argument("--out", required=True, help="sweep CSV output path")
    p_sweep.add_argument("--figure", help="also render the sweep to this figure file")
    p_sweep.add_argument("--figure-metric", default="f1_micro",
                         choices=("f1_micro", "f1_macro", "f1_example", "kl", "recovery"))
    p_sweep.set_defaults(func=_cmd_sweep)

    p_rep = sub.add_parser("report-components",
                           help="dump mixture components sorted by mixing weight")
    p_rep.add_argument("--result", required=True, help="bmmb result JSON from fit")
    p_rep.add_argument("--out", required=True, help="component CSV output path")
    p_rep.add_argument("--figure", help="also render component bar charts to this file")
    p_rep.set_defaults(func=_cmd_report_components)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
