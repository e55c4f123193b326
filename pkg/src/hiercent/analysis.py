"""Cross-measure and cross-network analysis.

A network is summarised, for one evaluation measure, by the 4x6 grid of
evaluation values between each hierarchy and centrality measure. Grids are
then compared across networks, thresholded, clustered, and aggregated by a
Schulze vote in which networks are voters and the 24 pairs are candidates.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import centrality as cen
from . import hierarchy as hier
from .evaluation import CORRELATIONS, EvalParams, UndefinedCorrelationError, evaluate, pearson
from .graph import Graph, GraphError, is_connected

log = logging.getLogger(__name__)

HIERARCHY_KINDS = hier.HIERARCHY_KINDS
CENTRALITY_KINDS = cen.CENTRALITY_KINDS
CANDIDATES = tuple(f"{h}:{c}" for h in HIERARCHY_KINDS for c in CENTRALITY_KINDS)
THRESHOLD = 0.7
SNAP_DIGITS = 12

# evaluation families whose meaningful counts are pooled
EVAL_GROUPS = {
    "correlation": ("pearson", "spearman", "kendall_b"),
    "jaccard": ("jaccard",),
    "rbo_topk": ("rbo_topk_p0.5", "rbo_topk_p0.9"),
}


def snap(values, digits: int = SNAP_DIGITS) -> np.ndarray:
    """Round to ``digits`` significant digits relative to the largest magnitude.

    Symmetric nodes can come out of sums and solves a few ulps apart; snapping
    turns those into exact ties before any ranking.
    """
    x = np.asarray(values, dtype=float)
    finite = np.abs(x[np.isfinite(x)])
    top = float(finite.max()) if finite.size else 0.0
    if top == 0:
        return x.copy()
    quantum = 10.0 ** (math.floor(math.log10(top)) - digits + 1)
    return np.round(x / quantum) * quantum


@dataclass(frozen=True)
class MeasureParams:
    katz_s: float | None = None
    pagerank_d: float = cen.PAGERANK_DAMPING
    pagerank_tol: float = cen.PAGERANK_TOL
    pagerank_max_iters: int = cen.PAGERANK_MAX_ITERS
    local_distinct: bool = False


@dataclass
class NetworkMeasures:
    name: str
    graph: Graph
    hierarchy: dict[str, hier.HierarchyScores]
    centrality: dict[str, cen.CentralityScores]

    def hierarchy_vector(self, kind: str) -> np.ndarray:
        # importance-oriented raw scores, not inverted levels
        return snap(self.hierarchy[kind].raw)

    def centrality_vector(self, kind: str) -> np.ndarray:
        return snap(self.centrality[kind].values)


def compute_measures(g: Graph, name: str = "network", params: MeasureParams | None = None) -> NetworkMeasures:
    params = params or MeasureParams()
    if not is_connected(g):
        raise GraphError(f"{name}: measures need a connected graph (extract the largest component first)")
    return NetworkMeasures(
        name,
        g,
        hier.all_hierarchies(g),
        cen.all_centralities(
            g,
            katz_s=params.katz_s,
            pagerank_d=params.pagerank_d,
            pagerank_tol=params.pagerank_tol,
            pagerank_max_iters=params.pagerank_max_iters,
            local_distinct=params.local_distinct,
        ),
    )


@dataclass
class CombinationMatrix:
    """Evaluation values, rows = hierarchy kinds, columns = centrality kinds.

    Undefined cells hold ``nan``.
    """

    network: str
    eval_id: str
    values: np.ndarray

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def cell(self, hierarchy_kind: str, centrality_kind: str) -> float:
        return float(self.values[HIERARCHY_KINDS.index(hierarchy_kind), CENTRALITY_KINDS.index(centrality_kind)])

    def to_dict(self) -> dict:
        return {
            "network": self.network,
            "eval": self.eval_id,
            "values": {
                h: {c: _json_num(self.values[i, j]) for j, c in enumerate(CENTRALITY_KINDS)}
                for i, h in enumerate(HIERARCHY_KINDS)
            },
        }


def _json_num(v: float):
    return None if v is None or not math.isfinite(v) else float(v)


def combination_matrix(source: Graph | NetworkMeasures, params: EvalParams,
                       measure_params: MeasureParams | None = None, name: str = "network") -> CombinationMatrix:
    measures = source if isinstance(source, NetworkMeasures) else compute_measures(source, name, measure_params)
    values = np.full((len(HIERARCHY_KINDS), len(CENTRALITY_KINDS)), np.nan)
    for i, h in enumerate(HIERARCHY_KINDS):
        x = measures.hierarchy_vector(h)
        for j, c in enumerate(CENTRALITY_KINDS):
            try:
                values[i, j] = evaluate(x, measures.centrality_vector(c), params)
            except UndefinedCorrelationError:
                log.debug("%s: %s(%s, %s) undefined", measures.name, params.id, h, c)
    return CombinationMatrix(measures.name, params.id, values)


def standard_eval_params(rbo_ps: Sequence[float] = (0.5, 0.9), topk: int | None = None,
                         measures: Iterable[str] = ("pearson", "spearman", "kendall_b", "jaccard", "rbo"),
                         rbo_ties: str = "index") -> list[EvalParams]:
    """The full evaluation set: 3 correlations, Jaccard,
    and RBO at each ``p`` on both the top-k prefix and the entire set."""
    out = []
    for m in measures:
        if m == "rbo":
            for scope in ("top_k", "entire_set"):
                for p in rbo_ps:
                    out.append(EvalParams("rbo", rbo_p=p, rbo_scope=scope, topk=topk, rbo_ties=rbo_ties))
        else:
            out.append(EvalParams(m, topk=topk))
    return out


def all_combination_matrices(measures: NetworkMeasures, evals: Sequence[EvalParams]) -> dict[str, CombinationMatrix]:
    return {e.id: combination_matrix(measures, e) for e in evals}


@dataclass
class NetworkCorrelation:
    names: list[str]
    values: np.ndarray
    eval_id: str


def network_correlation_matrix(matrices: Sequence[CombinationMatrix], min_shared: int = 3) -> NetworkCorrelation:
    """Pearson correlation between the flattened 24-cell profiles of every pair.

    Cells missing in either network are dropped for that pair; a pair with
    fewer than ``min_shared`` common cells (or a constant profile) gets ``nan``.
    """
    if len(matrices) < 2:
        raise ValueError("network comparison needs at least two networks")
    eval_ids = {m.eval_id for m in matrices}
    if len(eval_ids) != 1:
        raise ValueError(f"matrices mix evaluation measures: {sorted(eval_ids)}")
    k = len(matrices)
    out = np.eye(k)
    for a in range(k):
        for b in range(a + 1, k):
            x, y = matrices[a].flat(), matrices[b].flat()
            ok = ~(np.isnan(x) | np.isnan(y))
            r = math.nan
            if ok.sum() >= min_shared:
                try:
                    r = pearson(x[ok], y[ok])
                except UndefinedCorrelationError:
                    pass
            out[a, b] = out[b, a] = r
    return NetworkCorrelation([m.network for m in matrices], out, eval_ids.pop())


@dataclass
class NetworkRanking:
    """Meaningful-cell counts per network, sorted by descending count."""

    threshold: float
    eval_ids: tuple[str, ...]
    names: list[str]
    counts: dict[str, int]
    denominator: int
    masks: dict[str, np.ndarray] = field(repr=False)

    def rows(self) -> list[tuple[str, int, int]]:
        return [(n, self.counts[n], self.denominator) for n in self.names]


def binarize(matrix: CombinationMatrix, mu: float = THRESHOLD) -> np.ndarray:
    v = matrix.values
    return np.where(np.isnan(v), False, np.abs(np.nan_to_num(v)) >= mu)


def binarize_and_rank(matrices: Mapping[str, Sequence[CombinationMatrix]], mu: float = THRESHOLD) -> NetworkRanking:
    """Count cells with ``|value| >= mu`` per network over the given evaluations.

    ``matrices`` maps network name to its combination matrices, one per
    evaluation measure; every network must supply the same evaluation set.
    Missing cells are never meaningful.
    """
    if not 0 < mu <= 1:
        raise ValueError(f"threshold mu={mu} outside (0, 1]")
    eval_sets = {tuple(m.eval_id for m in ms) for ms in matrices.values()}
    if len(eval_sets) > 1:
        raise ValueError("networks were evaluated with different measure sets")
    eval_ids = eval_sets.pop() if eval_sets else ()
    masks = {name: np.stack([binarize(m, mu) for m in ms]) if ms else np.zeros((0, 4, 6), bool)
             for name, ms in matrices.items()}
    counts = {name: int(mask.sum()) for name, mask in masks.items()}
    names = sorted(counts, key=lambda n: (-counts[n], n))
    return NetworkRanking(mu, eval_ids, names, counts, len(eval_ids) * len(CANDIDATES), masks)


@dataclass
class ClusterAssignment:
    k: int
    labels: np.ndarray
    centroids: np.ndarray
    sse: float
    seed: int
    n_iter: int
    sse_history: list[float]
    names: list[str] | None = None

    def to_dict(self) -> dict:
        out = {
            "k": self.k,
            "seed": self.seed,
            "iterations": self.n_iter,
            "sse": self.sse,
            "labels": [int(x) for x in self.labels],
            "centroids": [[float(v) for v in row] for row in self.centroids],
        }
        if self.names is not None:
            out["members"] = {str(c): [n for n, lab in zip(self.names, self.labels) if lab == c]
                              for c in range(self.k)}
        return out


def _assign(x: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(len(x)), labels]


def kmeans(features, k: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-9,
           names: list[str] | None = None) -> ClusterAssignment:
    """Lloyd's algorithm from a seeded farthest-point start.

    The first centre is drawn with ``seed``; each further centre is the point
    farthest from those already chosen (lowest index on ties). An emptied
    cluster is re-seeded at the point farthest from its current centre.
    """
    x = np.asarray(features, dtype=float)
    if x.ndim != 2:
        raise ValueError("features must be a 2-d array")
    m = len(x)
    if not 1 <= k <= m:
        raise ValueError(f"k={k} must lie in [1, {m}]")
    if np.isnan(x).any():
        log.warning("k-means: imputing %d missing feature values as 0", int(np.isnan(x).sum()))
        x = np.nan_to_num(x, nan=0.0)

    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(m))]
    nearest = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(nearest.argmax())
        chosen.append(nxt)
        nearest = np.minimum(nearest, ((x - x[nxt]) ** 2).sum(axis=1))
    centroids = x[chosen].copy()

    history = []
    it = 0
    for it in range(1, max_iter + 1):
        labels, d2 = _assign(x, centroids)
        history.append(float(d2.sum()))
        new = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new[c] = x[members].mean(axis=0)
            else:
                far = int(d2.argmax())
                log.warning("k-means: cluster %d emptied, re-seeding at point %d", c, far)
                new[c] = x[far]
                d2[far] = 0.0
        shift = float(np.sqrt(((new - centroids) ** 2).sum(axis=1)).max())
        centroids = new
        if shift < tol:
            break
    labels, d2 = _assign(x, centroids)
    return ClusterAssignment(k, labels, centroids, float(d2.sum()), seed, it, history, names)


@dataclass
class SchulzeTally:
    """Schulze vote record.

    ``omega[i, j]`` counts ballots strictly preferring candidate i over j and
    ``upsilon`` holds strongest-path strengths. ``ranking`` lists candidate
    indices by descending win count (ties by index); ``ranks`` gives each
    candidate's shared 1-based position so ties stay visible.
    """

    candidates: list[str]
    ballots: np.ndarray
    omega: np.ndarray
    upsilon: np.ndarray
    wins: np.ndarray
    ranking: list[int]
    ranks: np.ndarray
    voters: list[str] | None = None

    def winner(self) -> str:
        return self.candidates[self.ranking[0]]

    def to_dict(self) -> dict:
        return {
            "candidates": self.candidates,
            "voters": self.voters,
            "ranking": [
                {"candidate": self.candidates[i], "wins": int(self.wins[i]), "rank": int(self.ranks[i])}
                for i in self.ranking
            ],
            "omega": self.omega.astype(int).tolist(),
            "upsilon": self.upsilon.astype(int).tolist(),
        }


def pairwise_preferences(ballots: np.ndarray) -> np.ndarray:
    """Count, per candidate pair, ballots scoring i strictly above j.

    Higher score means more preferred; ``nan`` ranks below every number.
    """
    b = np.where(np.isnan(ballots), -np.inf, ballots)
    return (b[:, :, None] > b[:, None, :]).sum(axis=0)


def schulze(ballots, candidates: Sequence[str] | None = None, voters: list[str] | None = None) -> SchulzeTally:
    """Schulze method over score ballots (rows = voters, columns = candidates)."""
    b = np.atleast_2d(np.asarray(ballots, dtype=float))
    nc = b.shape[1]
    candidates = list(candidates) if candidates is not None else [str(i) for i in range(nc)]
    if len(candidates) != nc:
        raise ValueError("candidate names do not match ballot width")
    omega = pairwise_preferences(b)

    ups = np.where(omega > omega.T, omega, 0)
    np.fill_diagonal(ups, 0)
    for i in range(nc):
        for j in range(nc):
            if j == i:
                continue
            via = np.minimum(ups[j, i], ups[i, :])
            via[[i, j]] = ups[j, [i, j]]
            np.maximum(ups[j], via, out=ups[j])

    beats = ups > ups.T
    wins = beats.sum(axis=1)
    ranking = sorted(range(nc), key=lambda c: (-wins[c], c))
    ranks = np.empty(nc, dtype=np.int64)
    pos = 0
    for idx, c in enumerate(ranking):
        if idx == 0 or wins[c] != wins[ranking[idx - 1]]:
            pos = idx + 1
        ranks[c] = pos
    return SchulzeTally(candidates, b, omega, ups, wins, ranking, ranks, voters)


def schulze_rank(matrices: Sequence[CombinationMatrix], use_abs: bool = False) -> SchulzeTally:
    """Rank the 24 hierarchy/centrality pairs with networks as voters.

    Each ballot orders the pairs by descending evaluation value (or its
    magnitude with ``use_abs``); missing cells rank last.
    """
    if not matrices:
        raise ValueError("schulze ranking needs at least one ballot")
    ballots = np.stack([snap(m.flat()) for m in matrices])
    if use_abs:
        ballots = np.abs(ballots)
    if np.isnan(ballots).any():
        log.info("schulze: %d missing cells ranked last on their ballots", int(np.isnan(ballots).sum()))
    return schulze(ballots, CANDIDATES, [m.network for m in matrices])
