"""Metrics and experiment orchestration for the method comparison.

Precision/recall are micro-averaged over fraud nodes: every node whose true
class is a fraud ring counts toward recall, every node predicted into a
fraud ring counts toward precision, across all rings at once. A metric
whose denominator is zero is reported as absent rather than zero. Timing
wraps the core compute of each method only, never dataset generation or
serialization, and medians (robust to one bad initialisation at desk
scale) aggregate the per-seed runs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import __version__, jsonio
from .baselines import (
    LpConfig,
    feature_classifier_predict,
    feature_classifier_train,
    label_propagation,
)
from .datasets import Dataset, GenSpec, binary_spec, generate_dataset, multi_spec, spec_payload
from .gcn import TrainConfig, _config_payload, predict as gcn_predict, train as gcn_train
from .graph import normalize
from .labeling import CommunityAssignment, LabelAssignment
from .rng import derive_seed

ALL_METHODS = ("gcn", "lp", "featclf")

_STREAM_GCN = 11
_STREAM_LP = 13
_STREAM_FEATCLF = 17


@dataclass
class Metrics:
    precision: float | None
    recall: float | None
    elapsed_seconds: float
    epochs_or_iters: int
    num_communities_found: int


@dataclass
class SeedResult:
    seed: int
    metrics: Metrics | None = None
    error: str | None = None
    loss_history: list[float] | None = None


@dataclass
class ExperimentReport:
    experiment: str
    seeds: list[int]
    methods: list[str]
    per_class: int
    averaging: str
    genspec: dict
    train_config: dict
    lp_config: dict
    results: dict[str, list[SeedResult]]
    medians: dict[str, dict]


def precision_recall(
    pred: Sequence[int],
    truth: Sequence[int],
    fraud_classes: Iterable[int],
    average: str = "micro",
) -> tuple[float | None, float | None]:
    """Fraud-node precision and recall; None where a denominator is zero."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape:
        raise ValueError(
            f"prediction and truth lengths differ: {pred.shape} vs {truth.shape}"
        )
    fraud = sorted(set(int(c) for c in fraud_classes))
    if average == "micro":
        truth_fraud = np.isin(truth, fraud)
        pred_fraud = np.isin(pred, fraud)
        tp = int(np.sum(truth_fraud & (pred == truth)))
        fp = int(np.sum(pred_fraud & (pred != truth)))
        fn = int(np.sum(truth_fraud & (pred != truth)))
        precision = tp / (tp + fp) if tp + fp > 0 else None
        recall = tp / (tp + fn) if tp + fn > 0 else None
        return precision, recall
    if average == "macro":
        precisions, recalls = [], []
        for c in fraud:
            predicted_c = int(np.sum(pred == c))
            actual_c = int(np.sum(truth == c))
            tp_c = int(np.sum((pred == c) & (truth == c)))
            if predicted_c > 0:
                precisions.append(tp_c / predicted_c)
            if actual_c > 0:
                recalls.append(tp_c / actual_c)
        precision = float(np.mean(precisions)) if precisions else None
        recall = float(np.mean(recalls)) if recalls else None
        return precision, recall
    raise ValueError(f"unknown averaging scheme {average!r}")


def match_communities(
    pred: CommunityAssignment, truth: LabelAssignment
) -> dict[int, int]:
    """Map each predicted community to the true class holding the plurality
    of its members; communities are processed largest first, plurality ties
    resolve to the lower class id."""
    if pred.num_nodes != len(truth):
        raise ValueError(
            f"community assignment covers {pred.num_nodes} nodes, truth covers {len(truth)}"
        )
    truth_arr = np.array([truth.entries[n] for n in range(pred.num_nodes)], dtype=np.int64)
    sizes = np.bincount(pred.labels, minlength=pred.num_communities)
    order = sorted(range(pred.num_communities), key=lambda c: (-int(sizes[c]), c))
    mapping: dict[int, int] = {}
    for comm in order:
        member_classes = truth_arr[pred.labels == comm]
        counts = np.bincount(member_classes, minlength=truth.num_classes)
        mapping[comm] = int(counts.argmax())  # argmax ties to the lowest class id
    return mapping


def _fraud_classes(num_classes: int) -> set[int]:
    return set(range(1, num_classes))


def _median(values: list[float]) -> float | None:
    return float(np.median(values)) if values else None


def _aggregate(results: list[SeedResult]) -> dict:
    ok = [r.metrics for r in results if r.metrics is not None]
    return {
        "precision": _median([m.precision for m in ok if m.precision is not None]),
        "recall": _median([m.recall for m in ok if m.recall is not None]),
        "elapsed_seconds": _median([m.elapsed_seconds for m in ok]),
        "epochs_or_iters": _median([float(m.epochs_or_iters) for m in ok]),
        "num_communities_found": _median([float(m.num_communities_found) for m in ok]),
        "seeds_failed": len(results) - len(ok),
    }


def run_experiment(
    name: str,
    methods: Iterable[str] = ALL_METHODS,
    seeds: Iterable[int] = (1,),
    *,
    train_config: TrainConfig | None = None,
    lp_config: LpConfig | None = None,
    genspec: GenSpec | None = None,
    per_class: int | None = None,
    average: str = "micro",
) -> ExperimentReport:
    """Generate each seed's dataset, run every requested method on identical
    inputs, and aggregate per-seed metrics into medians."""
    if name not in ("binary", "multi"):
        raise ValueError(f"unknown experiment {name!r} (expected 'binary' or 'multi')")
    methods = [m for m in ALL_METHODS if m in set(methods)]
    if not methods:
        raise ValueError("at least one method is required")
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("at least one seed is required")

    template = genspec if genspec is not None else (
        binary_spec(0) if name == "binary" else multi_spec(0)
    )
    if per_class is None:
        per_class = 1 if name == "binary" else 50
    k = template.num_classes
    fraud = _fraud_classes(k)
    base_train = train_config if train_config is not None else TrainConfig(num_classes=k)
    base_train = replace(base_train, num_classes=k)
    base_lp = lp_config if lp_config is not None else LpConfig()

    results: dict[str, list[SeedResult]] = {m: [] for m in methods}
    for seed in seeds:
        dataset = generate_dataset(replace(template, seed=seed), per_class)
        truth = np.array(
            [dataset.true_labels.entries[n] for n in range(dataset.graph.num_nodes)],
            dtype=np.int64,
        )
        for method in methods:
            try:
                results[method].append(
                    _run_method(method, dataset, truth, fraud, seed, base_train, base_lp, average)
                )
            except Exception as exc:  # a failing method must not sink the report
                results[method].append(SeedResult(seed=seed, error=str(exc)))

    genspec_info = spec_payload(template)
    genspec_info.pop("seed")
    return ExperimentReport(
        experiment=name,
        seeds=seeds,
        methods=methods,
        per_class=per_class,
        averaging=average,
        genspec=genspec_info,
        train_config=_config_payload(base_train),
        lp_config={"max_iters": base_lp.max_iters},
        results=results,
        medians={m: _aggregate(results[m]) for m in methods},
    )


def _run_method(
    method: str,
    dataset: Dataset,
    truth: np.ndarray,
    fraud: set[int],
    seed: int,
    base_train: TrainConfig,
    base_lp: LpConfig,
    average: str,
) -> SeedResult:
    k = dataset.num_classes
    if method == "gcn":
        cfg = replace(base_train, seed=derive_seed(seed, _STREAM_GCN))
        start = time.perf_counter()
        model, history = gcn_train(dataset.graph, dataset.features, dataset.train_mask, cfg)
        classes, _ = gcn_predict(model, normalize(dataset.graph), dataset.features)
        elapsed = time.perf_counter() - start
        p, r = precision_recall(classes, truth, fraud, average)
        return SeedResult(
            seed=seed,
            metrics=Metrics(p, r, elapsed, len(history), k),
            loss_history=history,
        )
    if method == "lp":
        cfg = LpConfig(seed=derive_seed(seed, _STREAM_LP), max_iters=base_lp.max_iters)
        start = time.perf_counter()
        communities, iters = label_propagation(dataset.graph, cfg)
        elapsed = time.perf_counter() - start
        mapping = match_communities(communities, dataset.true_labels)
        mapped = np.array([mapping[int(c)] for c in communities.labels], dtype=np.int64)
        p, r = precision_recall(mapped, truth, fraud, average)
        return SeedResult(
            seed=seed,
            metrics=Metrics(p, r, elapsed, iters, communities.num_communities),
        )
    if method == "featclf":
        cfg = replace(base_train, seed=derive_seed(seed, _STREAM_FEATCLF))
        start = time.perf_counter()
        params, history = feature_classifier_train(
            dataset.features, dataset.train_mask, k, cfg
        )
        classes = feature_classifier_predict(params, dataset.features)
        elapsed = time.perf_counter() - start
        p, r = precision_recall(classes, truth, fraud, average)
        return SeedResult(
            seed=seed,
            metrics=Metrics(p, r, elapsed, len(history), k),
            loss_history=history,
        )
    raise ValueError(f"unknown method {method!r}")


def report_payload(report: ExperimentReport) -> dict:
    """JSON-ready view of the report with stable key order."""
    per_seed: dict[str, list[dict]] = {}
    for method in report.methods:
        rows = []
        for r in report.results[method]:
            row: dict = {"seed": r.seed}
            if r.error is not None:
                row["error"] = r.error
            if r.metrics is not None:
                row.update(
                    precision=r.metrics.precision,
                    recall=r.metrics.recall,
                    elapsed_seconds=r.metrics.elapsed_seconds,
                    epochs_or_iters=r.metrics.epochs_or_iters,
                    num_communities_found=r.metrics.num_communities_found,
                )
            if r.loss_history is not None:
                row["loss_history"] = r.loss_history
            rows.append(row)
        per_seed[method] = rows
    return {
        "tool": "fraudring",
        "version": __version__,
        "experiment": report.experiment,
        "seeds": report.seeds,
        "methods": report.methods,
        "per_class": report.per_class,
        "averaging": report.averaging,
        "genspec": report.genspec,
        "train_config": report.train_config,
        "lp_config": report.lp_config,
        "medians": report.medians,
        "per_seed": per_seed,
    }


def _fmt(value: float | None, pattern: str = "{:.4f}") -> str:
    return "-" if value is None else pattern.format(value)


def render_markdown(report: ExperimentReport) -> str:
    """Median metrics as a Markdown table, one row per method."""
    lines = [
        f"# {report.experiment} experiment",
        "",
        f"Seeds: {', '.join(str(s) for s in report.seeds)}. "
        f"Labelled nodes per class: {report.per_class}. "
        f"Averaging: {report.averaging} over fraud nodes. Medians across seeds.",
        "",
        "| Model | Communities | Recall | Precision | Time (s) |",
        "| --- | --- | --- | --- | --- |",
    ]
    for method in report.methods:
        agg = report.medians[method]
        communities = agg["num_communities_found"]
        lines.append(
            "| {} | {} | {} | {} | {} |".format(
                method,
                "-" if communities is None else f"{communities:.0f}",
                _fmt(agg["recall"]),
                _fmt(agg["precision"]),
                _fmt(agg["elapsed_seconds"], "{:.3f}"),
            )
        )
    lines.append("")
    return "\n".join(lines)


def write_report_json(report: ExperimentReport, path) -> None:
    jsonio.dump(report_payload(report), path)


def write_metrics_csv(report: ExperimentReport, path) -> None:
    """Per-seed raw metrics, one delimited row per (method, seed)."""
    cols = (
        "experiment,method,seed,recall,precision,elapsed_seconds,"
        "epochs_or_iters,num_communities_found,error"
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cols + "\n")
        for method in report.methods:
            for r in report.results[method]:
                m = r.metrics
                fh.write(
                    ",".join(
                        [
                            report.experiment,
                            method,
                            str(r.seed),
                            "" if m is None or m.recall is None else format(m.recall, ".17g"),
                            "" if m is None or m.precision is None else format(m.precision, ".17g"),
                            "" if m is None else format(m.elapsed_seconds, ".6f"),
                            "" if m is None else str(m.epochs_or_iters),
                            "" if m is None else str(m.num_communities_found),
                            "" if r.error is None else r.error.replace(",", ";"),
                        ]
                    )
                    + "\n"
                )
