"""Command-line entry point for reproducible runs.

Subcommands: generate, train, predict, compare, export-dot. Seeds are
mandatory wherever randomness is involved; there is no wall-clock seeding.
Diagnostics go to stderr, data to files or stdout, and exit code 0 means
the requested computation fully succeeded.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, jsonio
from .baselines import LpConfig
from .datasets import (
    GenSpec,
    binary_spec,
    generate_dataset,
    load_dataset,
    multi_spec,
    save_dataset,
    spec_from_payload,
    spec_payload,
)
from .evaluate import ALL_METHODS, render_markdown, run_experiment, write_metrics_csv, write_report_json
from .gcn import TrainConfig, load_model, predict, save_model, train
from .graph import normalize, to_dot
from .plots import save_loss_curves, save_metric_bars


def _parse_seeds(text: str) -> list[int]:
    """Seed lists accept '1,2,3' and inclusive ranges '1..5', mixed freely."""
    seeds: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            lo, hi = token.split("..", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(token))
    if not seeds:
        raise ValueError(f"no seeds in {text!r}")
    return seeds


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    payload = jsonio.load(path)
    if not isinstance(payload, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return payload


def _genspec_with_overrides(base: GenSpec, overrides: dict) -> GenSpec:
    if not overrides:
        return base
    payload = spec_payload(base)
    for key, value in overrides.items():
        if key not in payload:
            raise ValueError(f"unknown genspec field {key!r}")
        payload[key] = value
    return spec_from_payload(payload)


def _train_config(args, num_classes: int, overrides: dict) -> TrainConfig:
    cfg = TrainConfig(num_classes=num_classes)
    if overrides:
        fields = dict(overrides)
        if "hidden_dims" in fields:
            fields["hidden_dims"] = tuple(fields["hidden_dims"])
        cfg = replace(cfg, **fields)
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "max_epochs", None) is not None:
        updates["max_epochs"] = args.max_epochs
    if getattr(args, "learning_rate", None) is not None:
        updates["learning_rate"] = args.learning_rate
    if getattr(args, "hidden", None) is not None:
        h1, h2 = (int(v) for v in args.hidden.split(","))
        updates["hidden_dims"] = (h1, h2)
    if getattr(args, "optimizer", None) is not None:
        updates["optimizer"] = args.optimizer
    if getattr(args, "patience", None) is not None:
        updates["early_stop_patience"] = args.patience
    if getattr(args, "no_bias", False):
        updates["use_bias"] = False
    return replace(cfg, num_classes=num_classes, **updates)


def cmd_generate(args) -> int:
    config = _load_config_file(args.config)
    base = binary_spec(args.seed) if args.dataset == "binary" else multi_spec(args.seed)
    spec = _genspec_with_overrides(base, config.get("genspec", {}))
    spec = replace(spec, seed=args.seed)
    per_class = args.per_class if args.per_class is not None else (
        1 if args.dataset == "binary" else 50
    )
    dataset = generate_dataset(spec, per_class)
    manifest = {
        "tool": "fraudring",
        "version": __version__,
        "dataset": args.dataset,
        "seed": args.seed,
        "per_class": per_class,
        "nodes": dataset.graph.num_nodes,
        "edges": dataset.graph.num_edges,
        "num_classes": dataset.num_classes,
        "genspec": spec_payload(spec),
    }
    written = save_dataset(dataset, args.out, manifest)
    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    config = _load_config_file(args.config)
    dataset = load_dataset(args.dataset_dir)
    cfg = _train_config(args, dataset.num_classes, config.get("train", {}))
    model, history = train(dataset.graph, dataset.features, dataset.train_mask, cfg)
    for value in history:
        print(format(value, ".17g"))
    out = Path(args.model_out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, cfg, out)
    print(f"wrote {out}", file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    dataset = load_dataset(args.dataset_dir)
    model, _ = load_model(args.model)
    classes, probs = predict(model, normalize(dataset.graph), dataset.features)
    lines = ["node_id,class_id," + ",".join(f"p{c}" for c in range(probs.shape[1]))]
    for node, cls in enumerate(classes):
        lines.append(
            f"{node},{int(cls)}," + ",".join(format(v, ".17g") for v in probs[node])
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def cmd_compare(args) -> int:
    config = _load_config_file(args.config)
    genspec = None
    if config.get("genspec"):
        base = binary_spec(0) if args.dataset == "binary" else multi_spec(0)
        genspec = _genspec_with_overrides(base, config["genspec"])
    seeds = _parse_seeds(args.seeds)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = [m for m in methods if m not in ALL_METHODS]
    if unknown:
        raise ValueError(f"unknown methods: {', '.join(unknown)}")
    train_cfg = None
    if config.get("train") or any(
        getattr(args, name, None) is not None
        for name in ("max_epochs", "learning_rate", "hidden", "optimizer", "patience")
    ):
        k = 2 if args.dataset == "binary" else 4
        train_cfg = _train_config(args, k, config.get("train", {}))
    report = run_experiment(
        args.dataset,
        methods,
        seeds,
        train_config=train_cfg,
        lp_config=LpConfig(max_iters=args.lp_max_iters),
        genspec=genspec,
        per_class=args.per_class,
        average=args.average,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report_json(report, out / "report.json")
    (out / "report.md").write_text(render_markdown(report), encoding="utf-8")
    write_metrics_csv(report, out / "metrics.csv")
    artifacts = [out / "report.json", out / "report.md", out / "metrics.csv"]
    curve_path = save_loss_curves(report, out / "loss_curves.png")
    if curve_path is not None:
        artifacts.append(curve_path)
    artifacts.append(save_metric_bars(report, out / "metrics.png"))
    for path in artifacts:
        print(f"wrote {path}", file=sys.stderr)
    sys.stdout.write(render_markdown(report))
    return 0


def cmd_export_dot(args) -> int:
    dataset = load_dataset(args.dataset_dir)
    if args.labels == "true":
        labels = dict(dataset.true_labels.entries)
    elif args.labels == "mask":
        labels = dict(dataset.train_mask.entries)
    else:
        labels = {}
    text = to_dot(dataset.graph, labels)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraudring",
        description="Fraud-ring detection benchmarks: synthetic graphs, a spectral "
        "graph convolution classifier, and baselines.",
    )
    parser.add_argument("--version", action="version", version=f"fraudring {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset to a directory")
    p.add_argument("dataset", choices=("binary", "multi"))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=int, default=None, dest="per_class",
                   help="labelled nodes per class in the train mask")
    p.add_argument("--config", default=None, help="JSON file with genspec overrides")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train the graph classifier on a dataset directory")
    p.add_argument("dataset_dir")
    p.add_argument("--model-out", required=True, dest="model_out")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-epochs", type=int, default=None, dest="max_epochs")
    p.add_argument("--learning-rate", type=float, default=None, dest="learning_rate")
    p.add_argument("--hidden", default=None, help="hidden widths, e.g. 16,16")
    p.add_argument("--optimizer", choices=("adam", "sgd"), default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--no-bias", action="store_true", dest="no_bias")
    p.add_argument("--config", default=None, help="JSON file with train overrides")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify every node with a trained checkpoint")
    p.add_argument("dataset_dir")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare", help="run all methods over seeds and write reports")
    p.add_argument("dataset", choices=("binary", "multi"))
    p.add_argument("--seeds", required=True, help="e.g. 1,2,3 or 1..5")
    p.add_argument("--out", required=True)
    p.add_argument("--methods", default=",".join(ALL_METHODS))
    p.add_argument("--per-class", type=int, default=None, dest="per_class")
    p.add_argument("--average", choices=("micro", "macro"), default="micro")
    p.add_argument("--lp-max-iters", type=int, default=100, dest="lp_max_iters")
    p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--max-epochs", type=int, default=None, dest="max_epochs")
    p.add_argument("--learning-rate", type=float, default=None, dest="learning_rate")
    p.add_argument("--hidden", default=None)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON with genspec/train overrides")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export-dot", help="render a dataset graph as DOT text")
    p.add_argument("dataset_dir")
    p.add_argument("--out", default=None)
    p.add_argument("--labels", choices=("true", "mask", "none"), default="true")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
