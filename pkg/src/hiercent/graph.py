"""Simple undirected graphs: loading, components, distances, triangles, stats."""
from __future__ import annotations

import io
import math
import os
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

COMMENT_PREFIXES = ("#", "%")
_SPLIT = re.compile(r"\s*,\s*|\s+")

STATS_HEADER = (
    "n", "m", "k_min", "k_max", "avg_k", "avg_d", "density",
    "transitivity", "assortativity", "gamma_max", "phi_max",
)


class GraphError(ValueError):
    """Invalid or degenerate graph input."""


class ParseError(GraphError):
    def __init__(self, message: str, lineno: int | None = None, source: str | None = None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph over dense indices ``0..n-1``.

    ``adjacency[v]`` is the ascending tuple of neighbours of ``v`` and
    ``labels[v]`` the original node token.
    """

    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...]
    _nbr_sets: tuple[frozenset, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.adjacency) != len(self.labels):
            raise GraphError("adjacency and labels differ in length")
        object.__setattr__(self, "_nbr_sets", tuple(frozenset(a) for a in self.adjacency))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n: int | None = None,
                   labels: Sequence[str] | None = None) -> "Graph":
        """Build from index pairs; self-loops and duplicates are dropped."""
        edges = list(edges)
        if n is None:
            n = 1 + max((max(u, v) for u, v in edges), default=-1)
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            if u != v:
                nbrs[u].add(v)
                nbrs[v].add(u)
        if labels is None:
            labels = [str(i) for i in range(n)]
        return cls(tuple(tuple(sorted(s)) for s in nbrs), tuple(str(x) for x in labels))

    @property
    def n_nodes(self) -> int:
        return len(self.adjacency)

    @property
    def n_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def neighbor_set(self, v: int) -> frozenset:
        return self._nbr_sets[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._nbr_sets[u]

    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=self.n_nodes)

    def edges(self) -> list[tuple[int, int]]:
        """Each edge once as ``(u, v)`` with ``u < v``, in lexicographic order."""
        return [(u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v]

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n_nodes, self.n_nodes))
        for u, nb in enumerate(self.adjacency):
            a[u, list(nb)] = 1.0
        return a

    def subgraph(self, nodes: Iterable[int]) -> "Graph":
        """Induced subgraph; kept nodes are re-indexed in ascending original order."""
        keep = sorted(set(nodes))
        remap = {old: new for new, old in enumerate(keep)}
        adj = tuple(
            tuple(remap[w] for w in self.adjacency[old] if w in remap) for old in keep
        )
        return Graph(adj, tuple(self.labels[old] for old in keep))

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with node ``v`` moved to index ``perm[v]``."""
        n = self.n_nodes
        edges = [(perm[u], perm[v]) for u, v in self.edges()]
        labels = [""] * n
        for v in range(n):
            labels[perm[v]] = self.labels[v]
        return Graph.from_edges(edges, n=n, labels=labels)


@dataclass(frozen=True)
class ParseOptions:
    """Edge-list parsing knobs.

    ``extra_columns`` controls lines with more than two tokens: ``"error"``
    rejects them, ``"ignore"`` keeps the first two (weights, timestamps).
    """

    comment_prefixes: tuple[str, ...] = COMMENT_PREFIXES
    extra_columns: str = "error"


def _tokenize(line: str) -> list[str]:
    return _SPLIT.split(line)


def load_edge_list(source, options: ParseOptions | None = None, name: str | None = None) -> Graph:
    """Parse an edge list from a path, a byte stream or a text stream.

    Nodes get indices in order of first appearance. Self-loops are dropped,
    parallel and reversed edges collapse to a single undirected edge.
    """
    options = options or ParseOptions()
    if isinstance(source, (str, os.PathLike)):
        name = name or os.fspath(source)
        with open(source, "rb") as fh:
            return load_edge_list(fh, options, name)
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    stream = source
    if not isinstance(stream, io.TextIOBase):
        stream = io.TextIOWrapper(stream, encoding="utf-8")

    index: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    try:
        for lineno, raw in enumerate(stream, start=1):
            line = raw.strip()
            if not line or line.startswith(options.comment_prefixes):
                continue
            tokens = _tokenize(line)
            if len(tokens) > 2 and options.extra_columns == "ignore":
                tokens = tokens[:2]
            if len(tokens) != 2 or not all(tokens):
                raise ParseError(f"expected two node tokens, got {line!r}", lineno, name)
            ids = []
            for tok in tokens:
                if tok not in index:
                    index[tok] = len(index)
                ids.append(index[tok])
            edges.append((ids[0], ids[1]))
    except UnicodeDecodeError as exc:
        raise ParseError(f"input is not valid UTF-8 text ({exc.reason})", None, name) from exc

    g = Graph.from_edges(edges, n=len(index), labels=list(index))
    if g.n_edges == 0:
        raise GraphError(f"{name + ': ' if name else ''}graph has no edges after normalization")
    return g


def connected_components(g: Graph) -> list[list[int]]:
    """Components as ascending index lists, ordered by their smallest node."""
    seen = np.zeros(g.n_nodes, dtype=bool)
    comps = []
    for root in range(g.n_nodes):
        if seen[root]:
            continue
        seen[root] = True
        comp = [root]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in g.adjacency[u]:
                if not seen[w]:
                    seen[w] = True
                    comp.append(w)
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


def largest_connected_component(g: Graph) -> Graph:
    comps = connected_components(g)
    # max() keeps the first maximal entry, and comps are ordered by min index
    best = max(comps, key=len)
    if len(best) == g.n_nodes:
        return g
    return g.subgraph(best)


def is_connected(g: Graph) -> bool:
    return g.n_nodes > 0 and len(connected_components(g)) == 1


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes get ``inf``."""
    if not 0 <= source < g.n_nodes:
        raise IndexError(f"source {source} out of range")
    dist = np.full(g.n_nodes, np.inf)
    dist[source] = 0
    queue = deque([source])
    adj = g.adjacency
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for w in adj[u]:
            if dist[w] == np.inf:
                dist[w] = du
                queue.append(w)
    return dist


def all_pairs_distances(g: Graph) -> np.ndarray:
    return np.vstack([bfs_distances(g, s) for s in range(g.n_nodes)]) if g.n_nodes else np.zeros((0, 0))


def triangle_count_per_node(g: Graph) -> np.ndarray:
    counts = np.zeros(g.n_nodes, dtype=np.int64)
    sets = g._nbr_sets
    for u, nb in enumerate(g.adjacency):
        for v in nb:
            if v <= u:
                continue
            for w in sets[u] & sets[v]:
                if w > v:
                    counts[u] += 1
                    counts[v] += 1
                    counts[w] += 1
    return counts


def edge_support(g: Graph) -> dict[tuple[int, int], int]:
    """Number of triangles closing each edge ``(u, v)``, ``u < v``."""
    sets = g._nbr_sets
    return {(u, v): len(sets[u] & sets[v]) for u, v in g.edges()}


def degree_assortativity(g: Graph) -> float:
    """Newman degree correlation over edges counted in both directions.

    Returns ``nan`` when every edge joins equal degrees (the coefficient is
    undefined, e.g. on regular graphs).
    """
    deg = g.degrees().astype(float)
    edges = np.array(g.edges(), dtype=np.int64).reshape(-1, 2)
    if len(edges) == 0:
        return math.nan
    x = np.concatenate([deg[edges[:, 0]], deg[edges[:, 1]]])
    y = np.concatenate([deg[edges[:, 1]], deg[edges[:, 0]]])
    xc = x - x.mean()
    yc = y - y.mean()
    den = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if den == 0:
        return math.nan
    return float(np.clip((xc @ yc) / den, -1.0, 1.0))


def transitivity(g: Graph) -> float:
    deg = g.degrees()
    triples = int((deg * (deg - 1) // 2).sum())
    if triples == 0:
        return 0.0
    closed = int(triangle_count_per_node(g).sum())  # = 3 * triangles
    return closed / triples


def average_shortest_path(g: Graph) -> float:
    """Mean hop distance over unordered reachable pairs of distinct nodes."""
    total = 0.0
    pairs = 0
    for s in range(g.n_nodes):
        d = bfs_distances(g, s)[s + 1:]
        finite = d[np.isfinite(d)]
        total += finite.sum()
        pairs += finite.size
    return float(total / pairs) if pairs else math.nan


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    k_min: int
    k_max: int
    avg_k: float
    avg_d: float
    density: float
    transitivity: float
    assortativity: float
    gamma_max: int
    phi_max: int

    def as_row(self) -> tuple:
        return tuple(getattr(self, f) for f in STATS_HEADER)


def graph_stats(g: Graph) -> GraphStats:
    from .hierarchy import core_numbers, edge_trussness

    n, m = g.n_nodes, g.n_edges
    if n < 2:
        raise GraphError("statistics need at least two nodes")
    deg = g.degrees()
    truss = edge_trussness(g)
    return GraphStats(
        n=n,
        m=m,
        k_min=int(deg.min()),
        k_max=int(deg.max()),
        avg_k=2.0 * m / n,
        avg_d=average_shortest_path(g),
        density=2.0 * m / (n * (n - 1)),
        transitivity=transitivity(g),
        assortativity=degree_assortativity(g),
        gamma_max=int(core_numbers(g).max()),
        phi_max=max(truss.values(), default=0),
    )
