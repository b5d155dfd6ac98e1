"""Class labels for nodes: partial assignments and community partitions.

Class 0 is reserved for the non-fraud cluster; ids 1..k-1 are fraud rings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np


@dataclass(frozen=True)
class LabelAssignment:
    """Partial map node id -> class id, over k classes."""

    entries: Mapping[int, int]
    num_classes: int

    def __post_init__(self):
        if self.num_classes < 1:
            raise ValueError("num_classes must be at least 1")
        for node, cls in self.entries.items():
            if not 0 <= cls < self.num_classes:
                raise ValueError(
                    f"node {node} has class {cls}, outside 0..{self.num_classes - 1}"
                )

    def __len__(self) -> int:
        return len(self.entries)

    def nodes(self) -> list[int]:
        """Labelled node ids in ascending order."""
        return sorted(self.entries)

    def class_members(self, cls: int) -> list[int]:
        return sorted(n for n, c in self.entries.items() if c == cls)

    def is_subset_of(self, other: "LabelAssignment") -> bool:
        return all(other.entries.get(n) == c for n, c in self.entries.items())


@dataclass(frozen=True, eq=False)
class CommunityAssignment:
    """Total partition of nodes into dense community ids 0..num_communities-1."""

    labels: np.ndarray  # int64, one community id per node
    num_communities: int = field(default=0)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        m = self.num_communities or (int(labels.max()) + 1 if len(labels) else 0)
        object.__setattr__(self, "num_communities", m)
        if len(labels):
            present = np.unique(labels)
            if present[0] < 0 or present[-1] >= m:
                raise ValueError(f"community ids must lie in 0..{m - 1}")
            if len(present) != m:
                raise ValueError("community ids must be dense (every id occurring)")

    @property
    def num_nodes(self) -> int:
        return len(self.labels)

    def members(self, community: int) -> np.ndarray:
        return np.flatnonzero(self.labels == community)


def labeled_arrays(
    labels: LabelAssignment, num_classes: int, num_nodes: int
) -> tuple[np.ndarray, np.ndarray]:
    """Labelled node ids (ascending) and their classes, validated against
    the node and class ranges of the consumer."""
    if len(labels) == 0:
        raise ValueError("at least one labelled node is required")
    nodes = labels.nodes()
    if nodes[0] < 0 or nodes[-1] >= num_nodes:
        raise ValueError("labelled node id out of range")
    classes = np.array([labels.entries[n] for n in nodes], dtype=np.int64)
    if classes.max() >= num_classes:
        raise ValueError(
            f"label class {int(classes.max())} out of range for {num_classes} classes"
        )
    return np.array(nodes, dtype=np.int64), classes


def write_labels_csv(labels: LabelAssignment, path) -> None:
    """One 'node_id,class_id' row per labelled node, ascending by node."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("node_id,class_id\n")
        for node in labels.nodes():
            fh.write(f"{node},{labels.entries[node]}\n")


def read_labels_csv(path, num_classes: int | None = None) -> LabelAssignment:
    entries: dict[int, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "node_id,class_id":
            raise ValueError(f"{path}:1: expected header 'node_id,class_id'")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'node_id,class_id'")
            try:
                node, cls = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer field")
            if node in entries:
                raise ValueError(f"{path}:{lineno}: duplicate node id {node}")
            entries[node] = cls
    k = num_classes if num_classes is not None else (max(entries.values()) + 1 if entries else 1)
    return LabelAssignment(entries, k)


def write_communities_csv(communities: CommunityAssignment, path) -> None:
    """One 'node_id,community_id' row per node."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("node_id,community_id\n")
        for node, comm in enumerate(communities.labels):
            fh.write(f"{node},{int(comm)}\n")
