"""Three-layer spectral graph convolution classifier.

Each layer computes relu(A_norm @ H @ W + b) where A_norm is the
degree-normalised adjacency with self-loops; the output layer swaps relu
for a row-wise softmax so every node gets k class probabilities. Training
is full batch on a masked mean cross-entropy over the labelled nodes, with
an exact hand-derived backward pass (A_norm is symmetric, so transposing
the propagation step is free).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import jsonio
from .graph import Graph, NormalizedAdjacency, as_matrix, normalize, spmm
from .labeling import LabelAssignment, labeled_arrays
from .optim import make_optimizer
from .rng import Rng

# Loss improvements smaller than this count toward early stopping.
MIN_IMPROVEMENT = 1e-6

# Probabilities are clamped here before the log, so a confidently wrong
# prediction cannot produce an infinite loss.
PROB_FLOOR = 1e-12

CHECKPOINT_FORMAT = "fraudring-gcn-checkpoint"


@dataclass
class TrainConfig:
    num_classes: int = 2
    hidden_dims: tuple[int, int] = (16, 16)
    learning_rate: float = 0.01
    max_epochs: int = 200
    seed: int = 0
    optimizer: str = "adam"  # "adam" (adaptive moments) or "sgd" (plain descent)
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    early_stop_patience: int = 10
    use_bias: bool = True

    def __post_init__(self):
        self.hidden_dims = tuple(int(h) for h in self.hidden_dims)
        if self.num_classes < 2:
            raise ValueError("num_classes must be at least 2")
        if len(self.hidden_dims) != 2 or any(h < 1 for h in self.hidden_dims):
            raise ValueError("hidden_dims must be two counts >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.early_stop_patience < 1:
            raise ValueError("early_stop_patience must be at least 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass(eq=False)
class LayerParams:
    weight: np.ndarray  # (d_in, d_out)
    bias: np.ndarray  # (d_out,)


@dataclass(eq=False)
class GcnModel:
    layers: list[LayerParams]

    def __post_init__(self):
        if len(self.layers) != 3:
            raise ValueError("model must have exactly 3 layers")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.weight.shape[1] != b.weight.shape[0]:
                raise ValueError("layer dimensions do not chain")
        for layer in self.layers:
            if layer.bias.shape != (layer.weight.shape[1],):
                raise ValueError("bias length must match layer output width")
            if not (np.isfinite(layer.weight).all() and np.isfinite(layer.bias).all()):
                raise ValueError("parameters contain non-finite entries")
        if self.num_classes < 2:
            raise ValueError("output width (num_classes) must be at least 2")

    @property
    def dims(self) -> list[int]:
        return [self.layers[0].weight.shape[0]] + [l.weight.shape[1] for l in self.layers]

    @property
    def feature_dim(self) -> int:
        return self.layers[0].weight.shape[0]

    @property
    def num_classes(self) -> int:
        return self.layers[-1].weight.shape[1]


@dataclass(eq=False)
class ForwardTrace:
    """All intermediates of one forward pass, kept for the backward pass."""

    x: np.ndarray
    aggregated: list[np.ndarray]  # A_norm @ H_l for each layer input
    pre: list[np.ndarray]  # A_norm @ H_l @ W_l + b_l
    hidden: list[np.ndarray]  # H_1, H_2 (post-relu)
    probs: np.ndarray  # N x k, rows sum to 1


def init_model(feature_dim: int, config: TrainConfig) -> GcnModel:
    """Seeded uniform(-s, s) weights with s = sqrt(6 / (d_in + d_out)); zero biases."""
    if feature_dim < 1:
        raise ValueError("feature_dim must be at least 1")
    rng = Rng(config.seed)
    dims = [feature_dim, *config.hidden_dims, config.num_classes]
    layers = []
    for d_in, d_out in zip(dims, dims[1:]):
        scale = np.sqrt(6.0 / (d_in + d_out))
        weight = (rng.uniform(d_in * d_out) * 2.0 - 1.0) * scale
        layers.append(
            LayerParams(weight.reshape(d_in, d_out), np.zeros(d_out, dtype=np.float64))
        )
    return GcnModel(layers)


def _softmax_rows(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: GcnModel, a: NormalizedAdjacency, x) -> ForwardTrace:
    x = as_matrix(x, "features")
    if x.shape[0] != a.num_nodes:
        raise ValueError(f"features have {x.shape[0]} rows for {a.num_nodes} nodes")
    if x.shape[1] != model.feature_dim:
        raise ValueError(
            f"features have {x.shape[1]} columns but the model expects {model.feature_dim}"
        )
    aggregated, pre, hidden = [], [], []
    h = x
    for l, layer in enumerate(model.layers):
        agg = spmm(a, h)
        z = agg @ layer.weight + layer.bias
        aggregated.append(agg)
        pre.append(z)
        if l < 2:
            h = np.maximum(z, 0.0)
            hidden.append(h)
    probs = _softmax_rows(pre[-1])
    return ForwardTrace(x, aggregated, pre, hidden, probs)


def loss(trace: ForwardTrace, labels: LabelAssignment) -> float:
    """Mean negative log-probability of the true class over labelled nodes."""
    idx, classes = labeled_arrays(labels, trace.probs.shape[1], trace.probs.shape[0])
    p = np.maximum(trace.probs[idx, classes], PROB_FLOOR)
    return float(np.mean(-np.log(p)))


def backward(
    model: GcnModel,
    a: NormalizedAdjacency,
    trace: ForwardTrace,
    labels: LabelAssignment,
) -> list[LayerParams]:
    """Exact gradients of `loss` w.r.t. every weight and bias."""
    if trace.probs.shape != (a.num_nodes, model.num_classes):
        raise ValueError("trace does not match this model and adjacency")
    if trace.x.shape[1] != model.feature_dim:
        raise ValueError("trace features do not match the model input width")
    idx, classes = labeled_arrays(labels, model.num_classes, a.num_nodes)

    # Softmax and cross-entropy combine to (p - onehot) / n over labelled rows.
    delta = np.zeros_like(trace.probs)
    delta[idx] = trace.probs[idx]
    delta[idx, classes] -= 1.0
    delta /= len(idx)

    grads: list[LayerParams] = [None] * 3  # type: ignore[list-item]
    for l in (2, 1, 0):
        g_w = trace.aggregated[l].T @ delta
        g_b = delta.sum(axis=0)
        grads[l] = LayerParams(g_w, g_b)
        if l > 0:
            # A_norm is symmetric, so its transpose-product is another spmm.
            upstream = spmm(a, delta @ model.layers[l].weight.T)
            delta = upstream * (trace.pre[l - 1] > 0.0)
    return grads


def train(
    g: Graph, x, labels: LabelAssignment, config: TrainConfig
) -> tuple[GcnModel, list[float]]:
    """Full-batch training; stops once the loss fails to improve by
    MIN_IMPROVEMENT for early_stop_patience consecutive epochs."""
    x = as_matrix(x, "features")
    a = normalize(g)
    model = init_model(x.shape[1], config)
    params, grad_of = [], []
    for l, layer in enumerate(model.layers):
        params.append(layer.weight)
        grad_of.append(lambda grads, l=l: grads[l].weight)
        if config.use_bias:
            params.append(layer.bias)
            grad_of.append(lambda grads, l=l: grads[l].bias)
    optimizer = make_optimizer(
        config.optimizer, config.learning_rate, config.beta1, config.beta2, config.eps
    )

    history: list[float] = []
    best = np.inf
    stale_epochs = 0
    for _ in range(config.max_epochs):
        trace = forward(model, a, x)
        value = loss(trace, labels)
        history.append(value)
        if value > best - MIN_IMPROVEMENT:
            stale_epochs += 1
        else:
            stale_epochs = 0
        best = min(best, value)
        if stale_epochs >= config.early_stop_patience:
            break
        grads = backward(model, a, trace, labels)
        optimizer.step(params, [pick(grads) for pick in grad_of])
    return model, history


def predict(model: GcnModel, a: NormalizedAdjacency, x) -> tuple[np.ndarray, np.ndarray]:
    """Per-node class ids (argmax, ties to the lowest id) and the probability matrix."""
    trace = forward(model, a, x)
    return trace.probs.argmax(axis=1).astype(np.int64), trace.probs


def embeddings(model: GcnModel, a: NormalizedAdjacency, x, layer: int) -> np.ndarray:
    """Post-activation node representation after the given layer (1, 2 or 3)."""
    if layer not in (1, 2, 3):
        raise ValueError(f"layer must be 1, 2 or 3, got {layer}")
    trace = forward(model, a, x)
    if layer == 3:
        return trace.probs
    return trace.hidden[layer - 1]


def save_model(model: GcnModel, config: TrainConfig, path) -> None:
    """JSON checkpoint; reals carry 17 significant digits and round-trip bit-exactly."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "layer_dims": model.dims,
        "layers": [
            {
                "weight": [float(v) for v in layer.weight.ravel()],
                "bias": [float(v) for v in layer.bias],
            }
            for layer in model.layers
        ],
        "config": _config_payload(config),
    }
    jsonio.dump(payload, path)


def _config_payload(config: TrainConfig) -> dict:
    payload = asdict(config)
    payload["hidden_dims"] = list(config.hidden_dims)
    return payload


def load_model(path) -> tuple[GcnModel, TrainConfig]:
    payload = jsonio.load(path)
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a model checkpoint")
    dims = payload["layer_dims"]
    layers = []
    for (d_in, d_out), stored in zip(zip(dims, dims[1:]), payload["layers"]):
        weight = np.array(stored["weight"], dtype=np.float64).reshape(d_in, d_out)
        bias = np.array(stored["bias"], dtype=np.float64)
        layers.append(LayerParams(weight, bias))
    raw = dict(payload["config"])
    raw["hidden_dims"] = tuple(raw["hidden_dims"])
    return GcnModel(layers), TrainConfig(**raw)
