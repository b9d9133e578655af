"""Microgrid graph structure: incidence matrix and coupling operators.

Buses are graph nodes, power lines are directed edges (orientation is
arbitrary and results are orientation-invariant).  The coupling operators
are the edge-selector stack used by the bus-with-lines network split:
``selector(j)`` masks the edges incident to bus j, ``stacked`` is the
vertical stack of all selectors and ``gram = stacked @ stacked.T`` is the
integer coupling Gram matrix whose induced infinity norm is exactly 2 on any
graph in which every edge has two distinct endpoints.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import BadEdge, DisconnectedGraph


@dataclass(frozen=True)
class NetworkGraph:
    """Directed multigraph of a microgrid. Edges are 0-based (tail, head) pairs."""

    n_buses: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n_buses < 1:
            raise BadEdge(f"need at least one bus, got {self.n_buses}")
        edges = tuple((int(t), int(h)) for t, h in self.edges)
        object.__setattr__(self, "edges", edges)
        for k, (tail, head) in enumerate(edges):
            if not (0 <= tail < self.n_buses and 0 <= head < self.n_buses):
                raise BadEdge(f"edge {k} endpoint out of range: ({tail}, {head})")
            if tail == head:
                raise BadEdge(f"edge {k} is a self-loop at bus {tail}")
        if not _connected(self.n_buses, edges):
            raise DisconnectedGraph(
                f"graph with {self.n_buses} buses and {len(edges)} edges is not connected"
            )

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def _connected(n_buses: int, edges: tuple[tuple[int, int], ...]) -> bool:
    """Breadth-first search over the undirected skeleton."""
    if n_buses == 1:
        return True
    adj: list[list[int]] = [[] for _ in range(n_buses)]
    for tail, head in edges:
        adj[tail].append(head)
        adj[head].append(tail)
    seen = [False] * n_buses
    seen[0] = True
    queue = deque([0])
    while queue:
        node = queue.popleft()
        for other in adj[node]:
            if not seen[other]:
                seen[other] = True
                queue.append(other)
    return all(seen)


def build_incidence(graph: NetworkGraph) -> np.ndarray:
    """Node-edge incidence matrix: +1 where the edge leaves the bus, -1 where it enters.

    Shape (n_buses, n_edges), integer entries in {-1, 0, +1}; every column has
    exactly one +1 and one -1.
    """
    inc = np.zeros((graph.n_buses, graph.n_edges), dtype=np.int64)
    for k, (tail, head) in enumerate(graph.edges):
        inc[tail, k] = 1
        inc[head, k] = -1
    return inc


def neighbor_edges(incidence: np.ndarray, j: int) -> np.ndarray:
    """Indices of the edges incident to bus j (nonzero entries of row j)."""
    return np.flatnonzero(incidence[j, :] != 0)


@dataclass(frozen=True)
class CouplingOperators:
    """Edge-selector operators of the bus-with-lines split.

    ``selector_masks[j, k]`` is 1 iff edge k touches bus j; ``selector(j)`` is
    the corresponding diagonal matrix, ``stacked`` the (n_buses*n_edges, n_edges)
    vertical stack, and ``gram`` its integer Gram matrix.
    """

    selector_masks: np.ndarray
    stacked: np.ndarray = field(init=False)
    gram: np.ndarray = field(init=False)

    def __post_init__(self):
        masks = np.asarray(self.selector_masks, dtype=np.int64)
        object.__setattr__(self, "selector_masks", masks)
        n_buses, n_edges = masks.shape
        stacked = np.zeros((n_buses * n_edges, n_edges), dtype=np.int64)
        for j in range(n_buses):
            stacked[j * n_edges:(j + 1) * n_edges, :] = np.diag(masks[j])
        object.__setattr__(self, "stacked", stacked)
        object.__setattr__(self, "gram", stacked @ stacked.T)

    @property
    def n_buses(self) -> int:
        return self.selector_masks.shape[0]

    @property
    def n_edges(self) -> int:
        return self.selector_masks.shape[1]

    def selector(self, j: int) -> np.ndarray:
        """Diagonal 0/1 selector matrix of the edges incident to bus j."""
        return np.diag(self.selector_masks[j])


def build_coupling(incidence: np.ndarray) -> CouplingOperators:
    """Coupling operators from an incidence matrix (selector masks = its sparsity)."""
    masks = (np.asarray(incidence) != 0).astype(np.int64)
    return CouplingOperators(selector_masks=masks)
