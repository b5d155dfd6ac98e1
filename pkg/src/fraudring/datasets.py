"""Deterministic regeneration of the two synthetic benchmark datasets.

The desk-scale dataset has 34 account nodes, 78 links and 11 compromised
accounts whose 5 behavioural features sit around a shifted mean. The larger
dataset has 2356 nodes in four communities (1800 legitimate, plus rings of
219, 196 and 141), 3560 links, and 50-dimensional features built by seeding
each community from a distinct anchor, expanding with SMOTE interpolation
and adding Gaussian noise.

Edges come from a planted partition (denser inside communities than
between) followed by seeded add/remove adjustment so the edge counts are
hit exactly, not in expectation. Everything is a pure function of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .graph import Graph, as_matrix, build_graph, read_graph_tsv, write_graph_tsv
from .labeling import (
    LabelAssignment,
    read_labels_csv,
    write_labels_csv,
)
from .rng import Rng

_SMOTE_SEED_ROWS = 25
_SMOTE_NEIGHBORS = 5
_ANCHOR_SPREAD = 1.0


@dataclass(frozen=True)
class GenSpec:
    """Knobs for one synthetic dataset. Community 0 is the non-fraud block."""

    community_sizes: tuple[int, ...]
    feature_dim: int
    intra_edge_prob: float
    inter_edge_prob: float
    class_mean_separation: float
    noise_sigma: float
    seed: int = 0
    # When set, community c uses intra probability min(1, target/(size_c - 1))
    # so small fraud rings keep internal structure next to the large
    # non-fraud block; intra_edge_prob is then the nominal (largest-block) value.
    intra_degree_target: float | None = None
    exact_edges: int | None = None
    feature_model: str = "shifted_mean"  # or "smote_anchors"

    def __post_init__(self):
        object.__setattr__(self, "community_sizes", tuple(int(s) for s in self.community_sizes))
        if not self.community_sizes or any(s < 1 for s in self.community_sizes):
            raise ValueError("community sizes must be positive")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be at least 1")
        for name in ("intra_edge_prob", "inter_edge_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if min(self.intra_probs()) <= self.inter_edge_prob:
            raise ValueError("communities must be denser inside than between")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if self.feature_model not in ("shifted_mean", "smote_anchors"):
            raise ValueError(f"unknown feature model {self.feature_model!r}")
        n = self.num_nodes
        if self.exact_edges is not None and self.exact_edges > n * (n - 1) // 2:
            raise ValueError("exact_edges exceeds the number of node pairs")

    @property
    def num_nodes(self) -> int:
        return sum(self.community_sizes)

    @property
    def num_classes(self) -> int:
        return len(self.community_sizes)

    def intra_probs(self) -> list[float]:
        if self.intra_degree_target is None:
            return [self.intra_edge_prob] * len(self.community_sizes)
        return [
            min(1.0, self.intra_degree_target / (s - 1)) if s > 1 else 1.0
            for s in self.community_sizes
        ]


@dataclass(eq=False)
class Dataset:
    graph: Graph
    features: np.ndarray
    true_labels: LabelAssignment
    train_mask: LabelAssignment

    def __post_init__(self):
        self.features = as_matrix(self.features, "features")
        if self.features.shape[0] != self.graph.num_nodes:
            raise ValueError("feature rows must match graph nodes")
        if len(self.true_labels) != self.graph.num_nodes:
            raise ValueError("true labels must cover every node")
        if not self.train_mask.is_subset_of(self.true_labels):
            raise ValueError("train mask must be a subset of the true labels")

    @property
    def num_classes(self) -> int:
        return self.true_labels.num_classes


def binary_spec(seed: int) -> GenSpec:
    return GenSpec(
        community_sizes=(23, 11),
        feature_dim=5,
        intra_edge_prob=0.35,
        inter_edge_prob=0.05,
        class_mean_separation=2.0,
        noise_sigma=1.0,
        seed=seed,
        exact_edges=78,
        feature_model="shifted_mean",
    )


def multi_spec(seed: int) -> GenSpec:
    return GenSpec(
        community_sizes=(1800, 219, 196, 141),
        feature_dim=50,
        intra_edge_prob=2.8 / 1799,
        inter_edge_prob=2.6e-4,
        class_mean_separation=0.55,
        noise_sigma=3.0,
        seed=seed,
        intra_degree_target=2.8,
        exact_edges=3560,
        feature_model="smote_anchors",
    )


def generate_binary(seed: int, per_class: int = 1, spec: GenSpec | None = None) -> Dataset:
    """34 accounts, exactly 78 links, 11 fraud nodes, 5 features per node."""
    spec = replace(spec, seed=seed) if spec is not None else binary_spec(seed)
    return generate_dataset(spec, per_class)


def generate_multi(seed: int, per_class: int = 50, spec: GenSpec | None = None) -> Dataset:
    """2356 accounts in four communities, exactly 3560 links, 50 features."""
    spec = replace(spec, seed=seed) if spec is not None else multi_spec(seed)
    return generate_dataset(spec, per_class)


def generate_dataset(spec: GenSpec, per_class: int) -> Dataset:
    root = Rng(spec.seed)
    edge_seed = root.next_u64()
    feature_seed = root.next_u64()
    noise_seed = root.next_u64()
    mask_seed = root.next_u64()

    graph = _generate_graph(spec, edge_seed)
    if spec.feature_model == "shifted_mean":
        # sigma is baked into the draw, no separate noise pass
        features = _shifted_mean_features(spec, feature_seed)
    else:
        features = _smote_anchor_features(spec, feature_seed)
        features = add_noise(features, spec.noise_sigma, noise_seed)

    entries = {}
    node = 0
    for cls, size in enumerate(spec.community_sizes):
        for _ in range(size):
            entries[node] = cls
            node += 1
    true_labels = LabelAssignment(entries, spec.num_classes)
    mask = mask_labels(true_labels, per_class, mask_seed)
    return Dataset(graph, features, true_labels, mask)


def _community_bounds(sizes: tuple[int, ...]) -> list[tuple[int, int]]:
    bounds, start = [], 0
    for s in sizes:
        bounds.append((start, start + s))
        start += s
    return bounds


def _generate_graph(spec: GenSpec, seed: int) -> Graph:
    rng = Rng(seed)
    n = spec.num_nodes
    bounds = _community_bounds(spec.community_sizes)
    community_of = np.empty(n, dtype=np.int64)
    for c, (lo, hi) in enumerate(bounds):
        community_of[lo:hi] = c
    probs = spec.intra_probs()

    edges: list[tuple[int, int]] = []
    for u in range(n - 1):
        c = community_of[u]
        _, hi = bounds[c]
        span = hi - u - 1
        if span > 0:
            hits = np.flatnonzero(rng.uniform(span) < probs[c])
            edges.extend((u, u + 1 + int(t)) for t in hits)
        span = n - hi
        if span > 0:
            hits = np.flatnonzero(rng.uniform(span) < spec.inter_edge_prob)
            edges.extend((u, hi + int(t)) for t in hits)

    if spec.exact_edges is not None:
        edges = _adjust_edge_count(edges, spec.exact_edges, community_of, bounds, rng)
    return build_graph(n, edges)


def _adjust_edge_count(
    edges: list[tuple[int, int]],
    target: int,
    community_of: np.ndarray,
    bounds: list[tuple[int, int]],
    rng: Rng,
) -> list[tuple[int, int]]:
    """Seeded add/remove of lowest-impact edges until exactly `target` remain.

    Removals take an edge whose endpoints have the highest degrees (so no
    node is stranded before it must be); additions go inside communities,
    weighted by remaining pair capacity, keeping the planted structure.
    """
    edge_set = set(edges)
    degree: dict[int, int] = {}
    for u, v in edge_set:
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1

    while len(edge_set) > target:
        best_key, best_edges = None, []
        for e in edge_set:
            du, dv = degree[e[0]], degree[e[1]]
            key = (min(du, dv), du + dv)
            if best_key is None or key > best_key:
                best_key, best_edges = key, [e]
            elif key == best_key:
                best_edges.append(e)
        victim = rng.choice(sorted(best_edges))
        edge_set.remove(victim)
        degree[victim[0]] -= 1
        degree[victim[1]] -= 1

    if len(edge_set) < target:
        intra_count = [0] * len(bounds)
        for u, v in edge_set:
            if community_of[u] == community_of[v]:
                intra_count[community_of[u]] += 1
        capacity = [
            (hi - lo) * (hi - lo - 1) // 2 - intra_count[c]
            for c, (lo, hi) in enumerate(bounds)
        ]
        while len(edge_set) < target:
            open_pairs = sum(capacity)
            if open_pairs > 0:
                pick = rng.below(open_pairs)
                c = 0
                while pick >= capacity[c]:
                    pick -= capacity[c]
                    c += 1
                lo, hi = bounds[c]
                while True:
                    u = lo + rng.below(hi - lo)
                    v = lo + rng.below(hi - lo)
                    if u == v:
                        continue
                    e = (u, v) if u < v else (v, u)
                    if e not in edge_set:
                        break
                capacity[c] -= 1
            else:
                # all communities are complete; fall back to any open pair
                n = len(community_of)
                while True:
                    u = rng.below(n)
                    v = rng.below(n)
                    if u == v:
                        continue
                    e = (u, v) if u < v else (v, u)
                    if e not in edge_set:
                        break
            edge_set.add(e)
            degree[e[0]] = degree.get(e[0], 0) + 1
            degree[e[1]] = degree.get(e[1], 0) + 1
    return sorted(edge_set)


def _shifted_mean_features(spec: GenSpec, seed: int) -> np.ndarray:
    """Community c sits at mean c * separation (per dimension), sigma-noise around it."""
    rng = Rng(seed)
    n, d = spec.num_nodes, spec.feature_dim
    x = rng.normal(n * d).reshape(n, d) * spec.noise_sigma
    for c, (lo, hi) in enumerate(_community_bounds(spec.community_sizes)):
        if c > 0:
            x[lo:hi] += c * spec.class_mean_separation
    return x


def _smote_anchor_features(spec: GenSpec, seed: int) -> np.ndarray:
    """Seed rows around one anchor per community, SMOTE-expanded to size.

    Noise is added afterwards by the caller, so the interpolation convexity
    is exercised on clean anchors.
    """
    rng = Rng(seed)
    d = spec.feature_dim
    blocks: list[np.ndarray] = []
    for size in spec.community_sizes:
        anchor = rng.normal(d) * spec.class_mean_separation
        n_seed = min(_SMOTE_SEED_ROWS, size)
        seeds = anchor + rng.normal(n_seed * d).reshape(n_seed, d) * _ANCHOR_SPREAD
        smote_seed = rng.next_u64()
        if size > n_seed:
            k = min(_SMOTE_NEIGHBORS, n_seed - 1)
            extra = smote(seeds, k, size - n_seed, smote_seed)
            blocks.append(np.vstack([seeds, extra]))
        else:
            blocks.append(seeds)
    return np.vstack(blocks)


def smote(samples, k_neighbors: int, n_new: int, seed: int) -> np.ndarray:
    """Synthetic rows interpolated between samples and their near neighbours.

    Each output is s + lam * (nn - s) for a seeded-random sample row s, one
    of its k nearest Euclidean neighbours nn, and lam uniform in [0, 1).
    """
    out, _ = _smote_with_pairs(samples, k_neighbors, n_new, seed)
    return out


def _smote_with_pairs(
    samples, k_neighbors: int, n_new: int, seed: int
) -> tuple[np.ndarray, list[tuple[int, int, float]]]:
    samples = as_matrix(samples, "samples")
    n = samples.shape[0]
    if n < 2:
        raise ValueError("SMOTE needs at least 2 sample rows")
    if not 1 <= k_neighbors < n:
        raise ValueError(f"k_neighbors must lie in 1..{n - 1}, got {k_neighbors}")
    diffs = samples[:, None, :] - samples[None, :, :]
    dist = np.sqrt((diffs * diffs).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    # stable sort keeps neighbour choice deterministic under distance ties
    neighbor_ids = np.argsort(dist, axis=1, kind="stable")[:, :k_neighbors]

    rng = Rng(seed)
    out = np.empty((n_new, samples.shape[1]), dtype=np.float64)
    pairs: list[tuple[int, int, float]] = []
    for row in range(n_new):
        i = rng.below(n)
        j = int(neighbor_ids[i][rng.below(k_neighbors)])
        lam = rng.uniform()
        out[row] = samples[i] + lam * (samples[j] - samples[i])
        pairs.append((i, j, lam))
    return out, pairs


def add_noise(x, sigma: float, seed: int) -> np.ndarray:
    """Elementwise Gaussian(0, sigma^2) perturbation; sigma 0 returns x unchanged."""
    x = as_matrix(x, "features")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0.0:
        return x.copy()
    rng = Rng(seed)
    return x + sigma * rng.normal(x.size).reshape(x.shape)


def mask_labels(true_labels: LabelAssignment, per_class: int, seed: int) -> LabelAssignment:
    """Seeded choice of exactly per_class labelled nodes from every class."""
    if per_class < 1:
        raise ValueError("per_class must be at least 1")
    rng = Rng(seed)
    entries: dict[int, int] = {}
    for cls in range(true_labels.num_classes):
        members = true_labels.class_members(cls)
        if len(members) < per_class:
            raise ValueError(
                f"class {cls} has only {len(members)} members, cannot mask {per_class}"
            )
        for i in rng.sample(len(members), per_class):
            entries[members[i]] = cls
    return LabelAssignment(entries, true_labels.num_classes)


# ---------------------------------------------------------------------------
# dataset directory layout

GRAPH_FILE = "graph.tsv"
FEATURES_FILE = "features.csv"
LABELS_FILE = "labels.csv"
MASK_FILE = "mask.csv"
MANIFEST_FILE = "manifest.json"


def spec_payload(spec: GenSpec) -> dict:
    return {
        "community_sizes": list(spec.community_sizes),
        "feature_dim": spec.feature_dim,
        "intra_edge_prob": float(spec.intra_edge_prob),
        "inter_edge_prob": float(spec.inter_edge_prob),
        "class_mean_separation": float(spec.class_mean_separation),
        "noise_sigma": float(spec.noise_sigma),
        "seed": spec.seed,
        "intra_degree_target": (
            None if spec.intra_degree_target is None else float(spec.intra_degree_target)
        ),
        "exact_edges": spec.exact_edges,
        "feature_model": spec.feature_model,
    }


def spec_from_payload(payload: dict) -> GenSpec:
    return GenSpec(
        community_sizes=tuple(payload["community_sizes"]),
        feature_dim=payload["feature_dim"],
        intra_edge_prob=payload["intra_edge_prob"],
        inter_edge_prob=payload["inter_edge_prob"],
        class_mean_separation=payload["class_mean_separation"],
        noise_sigma=payload["noise_sigma"],
        seed=payload["seed"],
        intra_degree_target=payload.get("intra_degree_target"),
        exact_edges=payload.get("exact_edges"),
        feature_model=payload.get("feature_model", "shifted_mean"),
    )


def write_features_csv(features: np.ndarray, path) -> None:
    d = features.shape[1]
    header = "node_id," + ",".join(f"f{i}" for i in range(d))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for node, row in enumerate(features):
            fh.write(str(node) + "," + ",".join(format(v, ".17g") for v in row) + "\n")


def read_features_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if not header or header[0] != "node_id":
            raise ValueError(f"{path}:1: expected header 'node_id,f0,...'")
        d = len(header) - 1
        rows: list[list[float]] = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != d + 1:
                raise ValueError(f"{path}:{lineno}: expected {d + 1} fields")
            try:
                node = int(parts[0])
                values = [float(v) for v in parts[1:]]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed numeric field")
            if node != len(rows):
                raise ValueError(f"{path}:{lineno}: node ids must be 0,1,2,... in order")
            rows.append(values)
    return np.array(rows, dtype=np.float64).reshape(len(rows), d)


def save_dataset(dataset: Dataset, out_dir, manifest: dict | None = None) -> list[Path]:
    from . import jsonio

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_graph_tsv(dataset.graph, out / GRAPH_FILE)
    write_features_csv(dataset.features, out / FEATURES_FILE)
    write_labels_csv(dataset.true_labels, out / LABELS_FILE)
    write_labels_csv(dataset.train_mask, out / MASK_FILE)
    written = [out / GRAPH_FILE, out / FEATURES_FILE, out / LABELS_FILE, out / MASK_FILE]
    if manifest is not None:
        jsonio.dump(manifest, out / MANIFEST_FILE)
        written.append(out / MANIFEST_FILE)
    return written


def load_dataset(in_dir) -> Dataset:
    src = Path(in_dir)
    for name in (GRAPH_FILE, FEATURES_FILE, LABELS_FILE, MASK_FILE):
        if not (src / name).is_file():
            raise ValueError(f"missing dataset file: {src / name}")
    graph = read_graph_tsv(src / GRAPH_FILE)
    features = read_features_csv(src / FEATURES_FILE)
    true_labels = read_labels_csv(src / LABELS_FILE)
    mask = read_labels_csv(src / MASK_FILE, num_classes=true_labels.num_classes)
    return Dataset(graph, features, true_labels, mask)
