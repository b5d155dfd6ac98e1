"""Comparison methods for the benchmark.

Label propagation sees only the graph (unsupervised community detection);
the feature classifier sees only node features and the labelled subset
(multinomial logistic regression, sharing the optimizer machinery of the
graph model). Neither touches the other's signal, which is the point of
the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .gcn import MIN_IMPROVEMENT, PROB_FLOOR, TrainConfig
from .graph import Graph, as_matrix
from .labeling import CommunityAssignment, LabelAssignment, labeled_arrays
from .optim import make_optimizer
from .rng import Rng


@dataclass
class LpConfig:
    seed: int = 0
    max_iters: int = 100

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


def label_propagation(g: Graph, config: LpConfig) -> tuple[CommunityAssignment, int]:
    """Asynchronous label propagation over seeded random node orders.

    Every node starts in its own community; each sweep visits nodes in a
    fresh seeded order and adopts the most frequent neighbour label, ties
    broken uniformly at random. Stops on the first sweep with no change,
    or after max_iters sweeps. Final ids are renumbered densely by first
    appearance in node order.
    """
    rng = Rng(config.seed)
    labels, iters = _propagate(
        g,
        config.max_iters,
        next_order=lambda: rng.permutation(g.num_nodes),
        pick=lambda tied: tied[rng.below(len(tied))],
    )
    return CommunityAssignment(_renumber(labels)), iters


def _propagate(
    g: Graph,
    max_iters: int,
    next_order: Callable[[], Iterable[int]],
    pick: Callable[[list[int]], int],
) -> tuple[list[int], int]:
    """Sweep engine with injectable visit order and tie-break, so equivariance
    tests can pin both."""
    labels = list(range(g.num_nodes))
    iters = 0
    for _ in range(max_iters):
        iters += 1
        changed = False
        for u in next_order():
            neighbors = g.neighbors(u)
            if len(neighbors) == 0:
                continue
            counts: dict[int, int] = {}
            for v in neighbors:
                lab = labels[v]
                counts[lab] = counts.get(lab, 0) + 1
            top = max(counts.values())
            tied = sorted(lab for lab, c in counts.items() if c == top)
            new = tied[0] if len(tied) == 1 else pick(tied)
            if new != labels[u]:
                labels[u] = new
                changed = True
        if not changed:
            break
    return labels, iters


def _renumber(labels: list[int]) -> np.ndarray:
    mapping: dict[int, int] = {}
    out = np.empty(len(labels), dtype=np.int64)
    for u, lab in enumerate(labels):
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[u] = mapping[lab]
    return out


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def feature_classifier_train(
    x, labels: LabelAssignment, k: int, config: TrainConfig
) -> tuple[np.ndarray, list[float]]:
    """Multinomial logistic regression on the labelled rows only.

    Returns a k x (D+1) parameter matrix (last column is the bias) and the
    per-epoch loss history. The graph is never consulted.
    """
    x = as_matrix(x, "features")
    idx, classes = labeled_arrays(labels, k, x.shape[0])
    xl = x[idx]
    n, d = xl.shape
    onehot = np.zeros((n, k), dtype=np.float64)
    onehot[np.arange(n), classes] = 1.0

    params = np.zeros((k, d + 1), dtype=np.float64)
    optimizer = make_optimizer(
        config.optimizer, config.learning_rate, config.beta1, config.beta2, config.eps
    )
    history: list[float] = []
    best = np.inf
    stale_epochs = 0
    for _ in range(config.max_epochs):
        scores = xl @ params[:, :d].T + params[:, d]
        probs = _softmax_rows(scores)
        value = float(
            np.mean(-np.log(np.maximum(probs[np.arange(n), classes], PROB_FLOOR)))
        )
        history.append(value)
        if value > best - MIN_IMPROVEMENT:
            stale_epochs += 1
        else:
            stale_epochs = 0
        best = min(best, value)
        if stale_epochs >= config.early_stop_patience:
            break
        delta = (probs - onehot) / n
        grad = np.hstack([delta.T @ xl, delta.sum(axis=0)[:, None]])
        optimizer.step([params], [grad])
    return params, history


def feature_classifier_predict(params: np.ndarray, x) -> np.ndarray:
    """Argmax class per row of the logistic scores, ties to the lowest id."""
    x = as_matrix(x, "features")
    d = params.shape[1] - 1
    if x.shape[1] != d:
        raise ValueError(
            f"features have {x.shape[1]} columns but the classifier expects {d}"
        )
    scores = x @ params[:, :d].T + params[:, d]
    return scores.argmax(axis=1).astype(np.int64)
