"""Sparse account graphs in compressed row form.

Nodes are accounts, edges are shared-attribute links. The graph itself never
stores self-loops; `normalize` adds one per node and produces the symmetric
degree-normalised matrix whose entry (u, v) is 1/sqrt((deg(u)+1)(deg(v)+1)).
That constant matrix drives every propagation step, via `spmm`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Validate and return a 2-D float64 array with finite entries."""
    m = np.asarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph, neighbours sorted ascending within each row."""

    num_nodes: int
    row_offsets: np.ndarray  # int64, length num_nodes + 1
    neighbor_ids: np.ndarray  # int64, length 2 * num_edges

    @property
    def num_edges(self) -> int:
        return len(self.neighbor_ids) // 2

    def degree(self, u: int) -> int:
        return int(self.row_offsets[u + 1] - self.row_offsets[u])

    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def neighbors(self, u: int) -> np.ndarray:
        return self.neighbor_ids[self.row_offsets[u] : self.row_offsets[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return i < len(row) and row[i] == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once, as (u, v) with u < v, in sorted order."""
        for u in range(self.num_nodes):
            for v in self.neighbors(u):
                if u < v:
                    yield (u, int(v))


@dataclass(frozen=True, eq=False)
class NormalizedAdjacency:
    """Graph structure plus one diagonal entry per row, with values
    1/sqrt(dhat_u * dhat_v) where dhat = degree + 1."""

    num_nodes: int
    row_offsets: np.ndarray  # int64, length num_nodes + 1
    col_ids: np.ndarray  # int64
    values: np.ndarray  # float64, aligned with col_ids


def build_graph(num_nodes: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Construct a symmetric simple Graph from undirected edge pairs.

    Duplicate pairs (either orientation) are dropped; self-loops and
    out-of-range endpoints are rejected.
    """
    if num_nodes < 0:
        raise ValueError("num_nodes must be nonnegative")
    seen: set[tuple[int, int]] = set()
    adjacency: list[list[int]] = [[] for _ in range(num_nodes)]
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise ValueError(f"self-loop edge ({u}, {v}) is not allowed")
        if not (0 <= u < num_nodes and 0 <= v < num_nodes):
            raise ValueError(
                f"edge ({u}, {v}) out of range for graph with {num_nodes} nodes"
            )
        key = (u, v) if u < v else (v, u)
        if key in seen:
            continue
        seen.add(key)
        adjacency[u].append(v)
        adjacency[v].append(u)

    offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    for u in range(num_nodes):
        adjacency[u].sort()
        offsets[u + 1] = offsets[u] + len(adjacency[u])
    flat = np.fromiter(
        (v for row in adjacency for v in row), dtype=np.int64, count=int(offsets[-1])
    )
    return Graph(num_nodes, _frozen(offsets), _frozen(flat))


def normalize(g: Graph) -> NormalizedAdjacency:
    """Degree-normalised adjacency with self-loops: value(u,v) = 1/sqrt(dhat_u dhat_v)."""
    n = g.num_nodes
    dhat = g.degrees().astype(np.float64) + 1.0
    inv_sqrt = 1.0 / np.sqrt(dhat)

    offsets = np.zeros(n + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(g.degrees() + 1)
    cols = np.empty(int(offsets[-1]), dtype=np.int64)
    for u in range(n):
        row = g.neighbors(u)
        pos = int(np.searchsorted(row, u))
        start = int(offsets[u])
        cols[start : start + pos] = row[:pos]
        cols[start + pos] = u
        cols[start + pos + 1 : start + len(row) + 1] = row[pos:]
    values = inv_sqrt[np.repeat(np.arange(n), np.diff(offsets))] * inv_sqrt[cols]
    return NormalizedAdjacency(n, _frozen(offsets), _frozen(cols), _frozen(values))


def spmm(a: NormalizedAdjacency, h) -> np.ndarray:
    """Sparse-dense product: row u of the result is sum_v value(u,v) * h[v, :].

    Summation runs in stored column order within each row, so results are
    reproducible run to run.
    """
    h = as_matrix(h, "dense operand")
    if h.shape[0] != a.num_nodes:
        raise ValueError(
            f"adjacency has {a.num_nodes} nodes but dense operand has {h.shape[0]} rows"
        )
    if a.num_nodes == 0:
        return np.zeros((0, h.shape[1]), dtype=np.float64)
    contrib = a.values[:, None] * h[a.col_ids]
    # every row holds its diagonal entry, so no reduceat segment is empty
    return np.add.reduceat(contrib, a.row_offsets[:-1], axis=0)


_DOT_PALETTE = (
    "#a6cee3",
    "#1f78b4",
    "#b2df8a",
    "#33a02c",
    "#fb9a99",
    "#e31a1c",
    "#fdbf6f",
    "#ff7f00",
    "#cab2d6",
    "#6a3d9a",
    "#ffff99",
    "#b15928",
)


def to_dot(g: Graph, labels: Mapping[int, int] | None = None) -> str:
    """Render the graph as DOT text, colouring labelled nodes by class id."""
    labels = labels or {}
    lines = ["graph g {"]
    for u in range(g.num_nodes):
        if u in labels:
            color = _DOT_PALETTE[labels[u] % len(_DOT_PALETTE)]
            lines.append(f'  {u} [style=filled fillcolor="{color}" class={labels[u]}];')
        else:
            lines.append(f"  {u};")
    for u, v in g.edges():
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_graph_tsv(g: Graph, path) -> None:
    """Graph file format: first line 'nodes<TAB>N', then one 'u<TAB>v' per edge, u < v."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"nodes\t{g.num_nodes}\n")
        for u, v in g.edges():
            fh.write(f"{u}\t{v}\n")


def read_graph_tsv(path) -> Graph:
    """Parse the TSV graph format, reporting the file and line of any violation."""
    edges: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.rstrip("\n").split("\t")
        if len(parts) != 2 or parts[0] != "nodes":
            raise ValueError(f"{path}:1: expected header 'nodes<TAB>N'")
        try:
            num_nodes = int(parts[1])
        except ValueError:
            raise ValueError(f"{path}:1: node count {parts[1]!r} is not an integer")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u<TAB>v'")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer node id")
            if not u < v:
                raise ValueError(f"{path}:{lineno}: edges must satisfy u < v")
            edges.append((u, v))
    try:
        return build_graph(num_nodes, edges)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}")
