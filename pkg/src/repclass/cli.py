"""Batch CLI: ingest, train, classify, experiment, sweep, roc, bench, analyze.

Configs are JSON files; any field can be overridden with --set key=value
(dotted keys reach nested sections). Errors exit nonzero with a
machine-readable JSON object on stderr.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, harness, io
from .classifiers import classify_crc_rls, classify_nn, classify_ns, classify_rcrc, classify_src
from .dictionary import build_dictionary, build_projector, default_lambda
from .errors import RepclassError
from .harness import ExperimentConfig


def _load_config(args):
    obj = {}
    if getattr(args, "config", None):
        obj = json.loads(Path(args.config).read_text())
    for item in getattr(args, "set", None) or []:
        key, _, val = item.partition("=")
        try:
            val = json.loads(val)
        except json.JSONDecodeError:
            pass
        node = obj
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = val
    if getattr(args, "seed", None) is not None:
        obj["seed"] = args.seed
    return obj


def _write_json(path, obj):
    text = json.dumps(obj, indent=2)
    if path:
        Path(path).write_text(text)
    else:
        print(text)


def cmd_ingest(args):
    cfg = _load_config(args)
    if args.synthetic:
        if args.seed is None:
            raise RepclassError("--seed is required for synthetic generation")
        params = {k: cfg[k] for k in cfg if k in (
            "n_classes", "subspace_dim", "ambient_dim", "n_train", "n_test",
            "noise_sigma", "shared_fraction", "seed",
        )}
        data = harness.synthetic_dataset(**params)
    else:
        data = harness.ingest_dataset(
            args.path, layout=args.layout, train_per_class=args.train_per_class
        )
    harness.save_dataset(data, args.out)
    print(json.dumps({"columns": data.n_columns, "classes": len(set(data.labels))}))


def cmd_train(args):
    data = harness.load_dataset(args.data)
    feats, labels = data.columns("train")
    dictionary = build_dictionary([(feats[:, i], labels[i]) for i in range(feats.shape[1])])
    lam = default_lambda(dictionary.n) if args.lam == "auto" else float(args.lam)
    projector = build_projector(dictionary, lam)
    io.save_dictionary(dictionary, args.out)
    io.save_projector(projector, args.out + ".proj")
    print(json.dumps({"columns": dictionary.n, "classes": dictionary.k, "lambda": lam}))


def cmd_classify(args):
    dictionary = io.load_dictionary(args.dict)
    y = io.read_matrix(args.query).ravel()
    lam = default_lambda(dictionary.n) if args.lam == "auto" else float(args.lam)
    if args.classifier == "crc_rls":
        projector = io.load_projector(args.dict + ".proj", dictionary)
        decision = classify_crc_rls(projector, dictionary, y)
    elif args.classifier == "src":
        decision = classify_src(dictionary, y, lam)
    elif args.classifier == "rcrc":
        decision = classify_rcrc(dictionary, y, lam)
    elif args.classifier == "nn":
        decision = classify_nn(dictionary, y)
    else:
        decision = classify_ns(dictionary, y)
    residuals = {
        str(k): (v if np.isfinite(v) else "inf")
        for k, v in decision.per_class_residuals.items()
    }
    print(json.dumps({"predicted": str(decision.predicted), "residuals": residuals}))


def cmd_experiment(args):
    config = ExperimentConfig.from_json(_load_config(args))
    data = harness.load_dataset(args.data)
    report = harness.run_experiment(config, data)
    _write_json(args.out, report.to_json())
    if args.log:
        report.write_query_log(args.log)


def cmd_sweep(args):
    config = ExperimentConfig.from_json(_load_config(args))
    data = harness.load_dataset(args.data)
    lambdas = sorted(float(x) for x in args.lambdas.split(","))
    reports = harness.lambda_sweep(config, data, lambdas)
    rows = ["lambda,recognition_rate"]
    rows += [f"{lam},{r.recognition_rate}" for lam, r in zip(lambdas, reports)]
    text = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")


def cmd_roc(args):
    config = ExperimentConfig.from_json(_load_config(args))
    gallery = harness.load_dataset(args.gallery)
    customers = harness.load_dataset(args.customers)
    imposters = harness.load_dataset(args.imposters)
    thresholds = [float(x) for x in args.thresholds.split(",")]
    points = harness.run_roc(config, gallery, customers, imposters, thresholds)
    _write_json(args.out, {"points": points, "auc": harness.roc_auc(points)})


def cmd_bench(args):
    data = harness.load_dataset(args.data)
    configs = []
    for path in args.configs.split(","):
        obj = json.loads(Path(path).read_text())
        if args.seed is not None:
            obj["seed"] = args.seed
        configs.append(ExperimentConfig.from_json(obj))
    table = harness.bench(configs, data, repetitions=args.repetitions)
    _write_json(args.out, table)


def cmd_analyze(args):
    if args.mode == "coef_fit":
        coefs = io.read_matrix(args.input).ravel()
        rep = analysis.coef_distribution_fit(coefs, bins=args.bins)
        _write_json(
            args.out,
            {
                "kl_gaussian": rep.kl_gaussian,
                "kl_laplacian": rep.kl_laplacian,
                "gaussian_params": list(rep.gaussian_params),
                "laplacian_params": list(rep.laplacian_params),
            },
        )
    elif args.mode == "residual_curve":
        Phi = io.read_matrix(args.input)
        y = io.read_matrix(args.query).ravel()
        grid = [float(x) for x in args.grid.split(",")]
        curves = analysis.residual_eps_study(Phi, y, args.p, grid)
        rows = ["epsilon,residual"] + [f"{e},{r}" for e, r in curves[0]]
        text = "\n".join(rows) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            print(text, end="")
    elif args.mode == "geometry":
        dictionary = io.load_dictionary(args.input)
        y = io.read_matrix(args.query).ravel()
        rep = analysis.geometry_check(dictionary, y, args.label)
        _write_json(
            args.out,
            {
                "r_total_sq": rep.r_total_sq,
                "r_perp_sq": rep.r_perp_sq,
                "r_star_sq": rep.r_star_sq,
                "sin_identity_lhs": rep.sin_identity_lhs,
                "sin_identity_rhs": rep.sin_identity_rhs,
            },
        )
    else:  # perturbation
        X = io.read_matrix(args.input)
        delta = io.read_matrix(args.delta)
        y = io.read_matrix(args.query).ravel()
        _write_json(args.out, analysis.perturbation_demo(X, delta, y))


def build_parser():
    parser = argparse.ArgumentParser(prog="repclass")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE")
        p.add_argument("--seed", type=int)

    p = sub.add_parser("ingest", help="load or generate a dataset")
    common(p)
    p.add_argument("--path", help="source directory or matrix file")
    p.add_argument("--layout", choices=("class_dirs", "matrix_file"), default="class_dirs")
    p.add_argument("--synthetic", action="store_true")
    p.add_argument("--train-per-class", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="build dictionary and projector")
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", default="auto")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify one query vector")
    p.add_argument("--dict", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--classifier", default="crc_rls",
                   choices=("crc_rls", "src", "rcrc", "nn", "ns"))
    p.add_argument("--lambda", dest="lam", default="auto")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("experiment", help="run one batch experiment")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.add_argument("--log", help="per-query JSON-lines log path")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("sweep", help="lambda sweep")
    common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--lambdas", required=True, help="comma-separated positive values")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("roc", help="SCI-threshold ROC over customer/imposter sets")
    common(p)
    p.add_argument("--gallery", required=True)
    p.add_argument("--customers", required=True)
    p.add_argument("--imposters", required=True)
    p.add_argument("--thresholds", default=",".join(str(t / 20) for t in range(21)))
    p.add_argument("--out")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("bench", help="timing comparison across configs")
    p.add_argument("--configs", required=True, help="comma-separated config paths")
    p.add_argument("--data", required=True)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("analyze", help="diagnostic studies")
    p.add_argument("--mode", required=True,
                   choices=("coef_fit", "residual_curve", "geometry", "perturbation"))
    p.add_argument("--input", required=True)
    p.add_argument("--query")
    p.add_argument("--delta")
    p.add_argument("--label")
    p.add_argument("--bins", type=int, default=101)
    p.add_argument("--p", type=int, default=2, choices=(0, 1, 2))
    p.add_argument("--grid")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except RepclassError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
