"""Node centrality measures for undirected, unweighted graphs."""
from __future__ import annotations

import logging
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.linalg

from .graph import Graph, GraphError

log = logging.getLogger(__name__)

CENTRALITY_KINDS = ("degree", "local", "betweenness", "cf_closeness", "katz", "pagerank")

DEFAULT_KATZ_FRACTION = 0.9
PAGERANK_DAMPING = 0.85
PAGERANK_TOL = 1e-10
PAGERANK_MAX_ITERS = 1000
CF_CLOSENESS_WARN_NODES = 5000


class ParameterError(ValueError):
    pass


class NumericalError(ArithmeticError):
    pass


@dataclass
class CentralityScores:
    kind: str
    values: np.ndarray
    params: dict[str, Any] = field(default_factory=dict)


def _need_nodes(g: Graph, k: int, what: str):
    if g.n_nodes < k:
        raise GraphError(f"{what} needs at least {k} nodes, got {g.n_nodes}")


def degree_centrality(g: Graph) -> CentralityScores:
    _need_nodes(g, 2, "degree centrality")
    return CentralityScores("degree", g.degrees() / (g.n_nodes - 1))


def local_centrality(g: Graph, distinct: bool = False) -> CentralityScores:
    """Row sums of the squared adjacency matrix over ``N - 1``.

    By default the diagonal of A² (the node's own degree) is included, so the
    value is the summed degree of the neighbours. With ``distinct=True`` the
    score instead counts distinct other nodes within two hops.
    """
    _need_nodes(g, 2, "local centrality")
    n = g.n_nodes
    if distinct:
        vals = np.empty(n)
        for v, nb in enumerate(g.adjacency):
            reach = set(nb)
            for u in nb:
                reach.update(g.adjacency[u])
            reach.discard(v)
            vals[v] = len(reach)
    else:
        deg = g.degrees()
        vals = np.array([deg[list(nb)].sum() for nb in g.adjacency], dtype=float)
    return CentralityScores("local", vals / (n - 1), {"distinct": distinct})


def _brandes_raw(g: Graph) -> np.ndarray:
    """Unnormalized betweenness summed over ordered (source, target) pairs."""
    n = g.n_nodes
    adj = g.adjacency
    bc = np.zeros(n)
    for s in range(n):
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = [0] * n
        sigma[s] = 1
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            dv = dist[v] + 1
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return bc


def betweenness_centrality(g: Graph) -> CentralityScores:
    _need_nodes(g, 3, "betweenness centrality")
    n = g.n_nodes
    # every unordered pair is visited from both ends
    pair_sums = _brandes_raw(g) / 2.0
    return CentralityScores("betweenness", pair_sums * 2.0 / ((n - 1) * (n - 2)))


def current_flow_closeness(g: Graph) -> CentralityScores:
    """Information centrality from ``R = (D - A + J)^-1``.

    ``r_vv + r_jj - 2 r_vj`` is the effective resistance between v and j.
    Dense O(n³).
    """
    n = g.n_nodes
    _need_nodes(g, 2, "current-flow closeness")
    if n > CF_CLOSENESS_WARN_NODES:
        log.warning("current-flow closeness on %d nodes uses a dense %dx%d inverse", n, n, n)
    a = g.adjacency_matrix()
    m = np.diag(a.sum(axis=1)) - a + 1.0
    try:
        with warnings.catch_warnings():
            # singularity is detected from the pivots below
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu = scipy.linalg.lu_factor(m, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"current-flow system could not be factored: {exc}") from exc
    if np.min(np.abs(np.diag(lu[0]))) < 1e-12 * n:
        raise NumericalError("current-flow system is singular (graph disconnected?)")
    r = scipy.linalg.lu_solve(lu, np.eye(n), check_finite=False)
    diag = np.diag(r)
    resist_sums = n * diag + diag.sum() - 2.0 * r.sum(axis=1)
    if np.any(resist_sums <= 0):
        raise NumericalError("non-positive resistance sum")
    return CentralityScores("cf_closeness", n / resist_sums)


def spectral_radius(g: Graph, rtol: float = 1e-10, max_iters: int = 100000) -> float:
    """Largest adjacency eigenvalue by power iteration on ``A + I``.

    The shift keeps the iteration from oscillating on bipartite graphs.
    """
    n = g.n_nodes
    if g.n_edges == 0:
        return 0.0
    a = g.adjacency_matrix()
    x = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(max_iters):
        y = a @ x + x
        norm = np.linalg.norm(y)
        y /= norm
        new = float(y @ (a @ y))
        if abs(new - lam) <= rtol * abs(new) and np.linalg.norm(y - x) < 1e-6:
            return new
        x, lam = y, new
    raise NumericalError("power iteration for the spectral radius did not converge")


def katz_centrality(g: Graph, s: float | None = None) -> CentralityScores:
    """Sum of attenuated walk counts ``sum_p s^p (A^p 1)`` via a direct solve.

    ``s`` defaults to ``0.9 / lambda_max``. The solution of ``(I - sA) x = sA 1``
    is refined once against its own residual.
    """
    n = g.n_nodes
    lam = spectral_radius(g)
    if s is None:
        s = DEFAULT_KATZ_FRACTION / lam if lam > 0 else DEFAULT_KATZ_FRACTION
    if s < 0 or s * lam >= 1.0:
        raise ParameterError(f"attenuation s={s} must satisfy 0 <= s < 1/lambda_max = {1 / lam if lam else float('inf')}")
    params = {"s": float(s), "lambda_max": lam}
    if g.n_edges == 0:
        return CentralityScores("katz", np.zeros(n), params)
    a = g.adjacency_matrix()
    m = np.eye(n) - s * a
    b = s * a.sum(axis=1)
    lu = scipy.linalg.lu_factor(m, check_finite=False)
    x = scipy.linalg.lu_solve(lu, b, check_finite=False)
    x += scipy.linalg.lu_solve(lu, b - m @ x, check_finite=False)
    return CentralityScores("katz", x, params)


def pagerank_centrality(g: Graph, d: float = PAGERANK_DAMPING, tol: float = PAGERANK_TOL,
                        max_iters: int = PAGERANK_MAX_ITERS) -> CentralityScores:
    """Undirected PageRank by power iteration, stopping on L1 change ``< tol``.

    Each node splits its score evenly over its neighbours; an isolated node
    spreads it over the whole graph.
    """
    if not 0 <= d <= 1:
        raise ParameterError(f"damping d={d} outside [0, 1]")
    n = g.n_nodes
    _need_nodes(g, 1, "pagerank")
    deg = g.degrees().astype(float)
    dangling = deg == 0
    inv_deg = np.where(dangling, 0.0, 1.0 / np.where(dangling, 1.0, deg))
    src = np.repeat(np.arange(n), deg.astype(np.int64))
    dst = np.fromiter((w for nb in g.adjacency for w in nb), dtype=np.int64, count=int(deg.sum()))
    x = np.full(n, 1.0 / n)
    for it in range(1, max_iters + 1):
        spread = np.bincount(dst, weights=(x * inv_deg)[src], minlength=n)
        new = (1.0 - d) / n + d * (spread + x[dangling].sum() / n)
        new /= new.sum()
        change = np.abs(new - x).sum()
        x = new
        if change < tol:
            return CentralityScores("pagerank", x, {"d": d, "tol": tol, "max_iters": max_iters, "iterations": it})
    raise NumericalError(f"pagerank did not converge in {max_iters} iterations")


def all_centralities(g: Graph, katz_s: float | None = None, pagerank_d: float = PAGERANK_DAMPING,
                     pagerank_tol: float = PAGERANK_TOL, pagerank_max_iters: int = PAGERANK_MAX_ITERS,
                     local_distinct: bool = False) -> dict[str, CentralityScores]:
    return {
        "degree": degree_centrality(g),
        "local": local_centrality(g, distinct=local_distinct),
        "betweenness": betweenness_centrality(g),
        "cf_closeness": current_flow_closeness(g),
        "katz": katz_centrality(g, katz_s),
        "pagerank": pagerank_centrality(g, pagerank_d, pagerank_tol, pagerank_max_iters),
    }
