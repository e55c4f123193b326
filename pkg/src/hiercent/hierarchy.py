"""Node hierarchy measures: k-core, k-truss, local reaching centrality, triangle participation.

Every measure yields a raw importance score (higher means more important) and
a hierarchy level, where level 1 is the top of the hierarchy for the discrete
measures.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .graph import Graph, GraphError, bfs_distances, edge_support, triangle_count_per_node

HIERARCHY_KINDS = ("core", "truss", "lrc", "tp")


@dataclass
class HierarchyScores:
    kind: str
    raw: np.ndarray
    level: np.ndarray
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class EdgeTrussMap:
    """Per-edge trussness keyed by ``(u, v)`` with ``u < v``.

    ``shifted`` holds ``trussness - k_min``, the labels used for node levels.
    """

    trussness: dict[tuple[int, int], int]
    k_min: int
    k_max: int

    @property
    def shifted(self) -> dict[tuple[int, int], int]:
        return {e: t - self.k_min for e, t in self.trussness.items()}


def core_numbers(g: Graph) -> np.ndarray:
    """Core number of every node (Batagelj-Zaversnik bucket peeling)."""
    n = g.n_nodes
    deg = [len(a) for a in g.adjacency]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    max_deg = max(deg)
    # bin sort by degree
    bin_start = [0] * (max_deg + 2)
    for d in deg:
        bin_start[d + 1] += 1
    for d in range(1, max_deg + 2):
        bin_start[d] += bin_start[d - 1]
    pos = [0] * n
    order = [0] * n
    fill = bin_start[:]
    for v in range(n):
        pos[v] = fill[deg[v]]
        order[pos[v]] = v
        fill[deg[v]] += 1

    for i in range(n):
        v = order[i]
        for u in g.adjacency[v]:
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bin_start[du]
                w = order[pw]
                if u != w:
                    order[pu], order[pw] = w, u
                    pos[u], pos[w] = pw, pu
                bin_start[du] += 1
                deg[u] -= 1
    return np.asarray(deg, dtype=np.int64)


def core_decompose(g: Graph) -> HierarchyScores:
    core = core_numbers(g)
    k_max = int(core.max()) if core.size else 0
    k_min = int(core.min()) if core.size else 0
    level = k_max - (core - 1)
    return HierarchyScores("core", core, level, {"k_min": k_min, "k_max": k_max})


def edge_trussness(g: Graph) -> dict[tuple[int, int], int]:
    """Standard trussness of each edge: the largest k whose k-truss holds it.

    Edges are peeled in order of current support using bucket queues; an edge
    removed while the threshold is ``k`` closes fewer than ``k - 1`` triangles
    in the remaining graph and so gets trussness ``k``.
    """
    support = edge_support(g)
    if not support:
        return {}
    max_sup = max(support.values())
    buckets: list[set] = [set() for _ in range(max_sup + 1)]
    for e, s in support.items():
        buckets[s].add(e)

    nbrs = [set(a) for a in g.adjacency]
    truss: dict[tuple[int, int], int] = {}
    k = 2
    low = 0
    remaining = len(support)
    while remaining:
        while not buckets[low]:
            low += 1
        if low > k - 2:
            k = low + 2
        e = buckets[low].pop()
        remaining -= 1
        truss[e] = k
        u, v = e
        for w in nbrs[u] & nbrs[v]:
            for f in ((u, w) if u < w else (w, u), (v, w) if v < w else (w, v)):
                s = support[f]
                buckets[s].remove(f)
                support[f] = s - 1
                buckets[s - 1].add(f)
                if s - 1 < low:
                    low = s - 1
        nbrs[u].discard(v)
        nbrs[v].discard(u)
    return truss


def truss_decompose(g: Graph) -> tuple[EdgeTrussMap, HierarchyScores]:
    """Edge trussness plus node scores.

    A node's raw score is the largest shifted label among its incident edges,
    i.e. the peeling stage at which it becomes isolated. ``k_min`` is the
    smallest edge trussness (2 whenever some edge closes no triangle).
    """
    truss = edge_trussness(g)
    k_min = min(truss.values(), default=2)
    k_max = max(truss.values(), default=2)
    tmap = EdgeTrussMap(truss, k_min, k_max)
    node_t = np.zeros(g.n_nodes, dtype=np.int64)
    for (u, v), t in truss.items():
        s = t - k_min
        if s > node_t[u]:
            node_t[u] = s
        if s > node_t[v]:
            node_t[v] = s
    level = k_max - k_min - (node_t - 1)
    return tmap, HierarchyScores("truss", node_t, level, {"k_min": k_min, "k_max": k_max})


def local_reaching_centrality(g: Graph) -> HierarchyScores:
    """Mean reciprocal hop distance to every other reachable node."""
    n = g.n_nodes
    if n < 2:
        raise GraphError("local reaching centrality needs at least two nodes")
    lrc = np.empty(n)
    for v in range(n):
        d = bfs_distances(g, v)
        d = d[np.isfinite(d) & (d > 0)]
        lrc[v] = (1.0 / d).sum() / (n - 1)
    return HierarchyScores("lrc", lrc, lrc.copy(), {"n": n})


def triangle_participation(g: Graph) -> HierarchyScores:
    tp = triangle_count_per_node(g)
    k_max = int(tp.max()) if tp.size else 0
    level = k_max + 1 - tp
    return HierarchyScores("tp", tp, level, {"k_min": int(tp.min()) if tp.size else 0, "k_max": k_max})


def all_hierarchies(g: Graph) -> dict[str, HierarchyScores]:
    return {
        "core": core_decompose(g),
        "truss": truss_decompose(g)[1],
        "lrc": local_reaching_centrality(g),
        "tp": triangle_participation(g),
    }
