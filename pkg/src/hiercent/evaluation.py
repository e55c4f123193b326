"""Comparing two per-node score vectors: correlations and top-k similarities."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

EVAL_MEASURES = ("pearson", "spearman", "kendall_b", "jaccard", "rbo")
CORRELATIONS = ("pearson", "spearman", "kendall_b")


class UndefinedCorrelationError(ValueError):
    """The coefficient has a zero denominator (constant or fully tied input)."""


class ParameterError(ValueError):
    pass


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"score vectors must be 1-d and equal length, got {x.shape} and {y.shape}")
    if x.size < 2:
        raise ValueError("need at least two observations")
    return x, y


def pearson(x, y) -> float:
    x, y = _pair(x, y)
    if is_constant(x) or is_constant(y):
        raise UndefinedCorrelationError("pearson correlation of a constant vector")
    xc = x - x.mean()
    yc = y - y.mean()
    return float(np.clip((xc @ yc) / math.sqrt(float(xc @ xc) * float(yc @ yc)), -1.0, 1.0))


def is_constant(x, rtol: float = 1e-13) -> bool:
    """True when the spread of ``x`` is within rounding of its magnitude."""
    x = np.asarray(x, dtype=float)
    return bool(np.ptp(x) <= rtol * max(1.0, float(np.abs(x).max())))


def midranks(x) -> np.ndarray:
    """1-based ranks with tied values sharing the mean of their positions."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ranks = np.empty(x.size)
    start = 0
    n = x.size
    while start < n:
        stop = start + 1
        while stop < n and xs[stop] == xs[start]:
            stop += 1
        ranks[order[start:stop]] = (start + stop + 1) / 2.0
        start = stop
    return ranks


def spearman(x, y) -> float:
    x, y = _pair(x, y)
    return pearson(midranks(x), midranks(y))


def _tie_pairs(sorted_vals: np.ndarray) -> int:
    if sorted_vals.size == 0:
        return 0
    change = np.flatnonzero(sorted_vals[1:] != sorted_vals[:-1]) + 1
    runs = np.diff(np.concatenate(([0], change, [sorted_vals.size])))
    return int((runs * (runs - 1) // 2).sum())


def _count_inversions(a: list) -> int:
    """Strict inversions (i < j, a[i] > a[j]) by bottom-up merge sort."""
    n = len(a)
    src = list(a)
    buf = [0.0] * n
    inv = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if src[j] < src[i]:
                    buf[k] = src[j]
                    inv += mid - i
                    j += 1
                else:
                    buf[k] = src[i]
                    i += 1
                k += 1
            buf[k:hi] = src[i:mid] if i < mid else src[j:hi]
        src, buf = buf, src
        width *= 2
    return inv


def kendall_tau_b(x, y) -> float:
    """Tau-b in O(n log n).

    Pairs tied on both variables are dropped from every count; pairs tied on
    one variable only enter that variable's side of the denominator.
    """
    x, y = _pair(x, y)
    n = x.size
    n0 = n * (n - 1) // 2
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]
    tx = _tie_pairs(xs)
    # joint ties: runs equal on both coordinates
    joint_key = np.flatnonzero((xs[1:] != xs[:-1]) | (ys[1:] != ys[:-1])) + 1
    runs = np.diff(np.concatenate(([0], joint_key, [n])))
    txy = int((runs * (runs - 1) // 2).sum())
    ty = _tie_pairs(np.sort(y))
    discordant = _count_inversions(ys.tolist())
    concordant = n0 - tx - ty + txy - discordant
    den = (n0 - tx) * (n0 - ty)
    if den == 0:
        raise UndefinedCorrelationError("kendall tau-b with every pair tied on a variable")
    return float(np.clip((concordant - discordant) / math.sqrt(den), -1.0, 1.0))


@dataclass(frozen=True)
class RankedList:
    """Node indices by descending score, ties ordered by ascending index.

    ``group_start[i]`` is the position where the tie group holding position
    ``i`` begins; ``group_end[i]`` is one past its last position.
    """

    order: np.ndarray
    group_start: np.ndarray
    group_end: np.ndarray

    @classmethod
    def from_scores(cls, scores) -> "RankedList":
        s = np.asarray(scores, dtype=float)
        n = s.size
        order = np.lexsort((np.arange(n), -s))
        ss = s[order]
        breaks = np.concatenate(([True], ss[1:] != ss[:-1])) if n else np.zeros(0, bool)
        start_idx = np.flatnonzero(breaks)
        group_id = np.cumsum(breaks) - 1
        ends = np.concatenate((start_idx[1:], [n]))
        return cls(order, start_idx[group_id], ends[group_id])

    def __len__(self) -> int:
        return self.order.size

    def top(self, k: int) -> np.ndarray:
        return self.order[:k]


def default_topk(n: int) -> int:
    """10 nodes for networks under 150 nodes, otherwise the top 10%."""
    return 10 if n < 150 else -(-n // 10)


@dataclass(frozen=True)
class EvalParams:
    """One evaluation measure configuration.

    ``topk`` is an explicit cutoff or ``None`` for the size-dependent default;
    ``rbo_scope`` is ``"top_k"`` or ``"entire_set"``; ``rbo_ties`` is
    ``"index"`` (deterministic break) or ``"group"`` (tie-aware prefixes).
    """

    measure: str
    rbo_p: float = 0.9
    rbo_scope: str = "top_k"
    topk: int | None = None
    rbo_ties: str = "index"

    def __post_init__(self):
        if self.measure not in EVAL_MEASURES:
            raise ParameterError(f"unknown evaluation measure {self.measure!r}")
        if self.rbo_scope not in ("top_k", "entire_set"):
            raise ParameterError(f"unknown RBO scope {self.rbo_scope!r}")
        if self.rbo_ties not in ("index", "group"):
            raise ParameterError(f"unknown RBO tie mode {self.rbo_ties!r}")

    @property
    def id(self) -> str:
        if self.measure != "rbo":
            return self.measure
        scope = "topk" if self.rbo_scope == "top_k" else "all"
        return f"rbo_{scope}_p{self.rbo_p:g}"

    def k_for(self, n: int) -> int:
        k = default_topk(n) if self.topk is None else self.topk
        if k < 1 or k > n:
            raise ParameterError(f"top-k cutoff {k} outside [1, {n}]")
        return k


def jaccard_topk(x, y, k: int) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("score vectors differ in length")
    if k < 1 or k > x.size:
        raise ParameterError(f"top-k cutoff {k} outside [1, {x.size}]")
    a = set(RankedList.from_scores(x).top(k).tolist())
    b = set(RankedList.from_scores(y).top(k).tolist())
    return len(a & b) / len(a | b)


@dataclass(frozen=True)
class RBOResult:
    base: float
    extrapolated: float
    depth: int

    @property
    def value(self) -> float:
        return self.extrapolated


def _agreements_index(a: Sequence, b: Sequence, depth: int) -> np.ndarray:
    seen_a: set = set()
    seen_b: set = set()
    overlap = 0
    out = np.empty(depth)
    for d in range(depth):
        u = a[d]
        v = b[d]
        if u == v:
            overlap += 1
        else:
            overlap += (u in seen_b) + (v in seen_a)
        seen_a.add(u)
        seen_b.add(v)
        out[d] = overlap / (d + 1)
    return out


def _agreements_group(ra: RankedList, rb: RankedList, depth: int) -> np.ndarray:
    # once any member of a tie group is reached the whole group is in the prefix
    out = np.empty(depth)
    for d in range(depth):
        pa = set(ra.order[: ra.group_end[d]].tolist())
        pb = set(rb.order[: rb.group_end[d]].tolist())
        out[d] = len(pa & pb) / max(d + 1, len(pa), len(pb))
    return out


def rbo(x, y, p: float, depth: int, ties: str = "index") -> RBOResult:
    """Rank-biased overlap of the descending rankings of two score vectors.

    Returns the truncated sum to ``depth`` and the extrapolated value that
    assumes the agreement at ``depth`` persists for all deeper ranks.
    """
    if not 0 < p < 1:
        raise ParameterError(f"RBO persistence p={p} must lie in (0, 1)")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("score vectors differ in length")
    if depth < 1 or depth > x.size:
        raise ParameterError(f"RBO depth {depth} outside [1, {x.size}]")
    ra, rb = RankedList.from_scores(x), RankedList.from_scores(y)
    if ties == "index":
        return _rbo_from(_agreements_index(ra.order.tolist(), rb.order.tolist(), depth), p)
    if ties == "group":
        return _rbo_from(_agreements_group(ra, rb, depth), p)
    raise ParameterError(f"unknown RBO tie mode {ties!r}")


def rbo_ranked(a: Sequence, b: Sequence, p: float, depth: int | None = None) -> RBOResult:
    """RBO of two explicit rankings (sequences of distinct items)."""
    if not 0 < p < 1:
        raise ParameterError(f"RBO persistence p={p} must lie in (0, 1)")
    depth = min(len(a), len(b)) if depth is None else depth
    if depth < 1 or depth > min(len(a), len(b)):
        raise ParameterError(f"RBO depth {depth} exceeds the shorter ranking")
    return _rbo_from(_agreements_index(list(a), list(b), depth), p)


def _rbo_from(agree: np.ndarray, p: float) -> RBOResult:
    k = agree.size
    weights = (1.0 - p) * p ** np.arange(k)
    base = float(weights @ agree)
    ext = base + float(agree[-1]) * p ** k
    return RBOResult(base, min(ext, 1.0), k)


def evaluate(x, y, params: EvalParams) -> float:
    """Apply one configured evaluation measure to a pair of score vectors."""
    m = params.measure
    if m == "pearson":
        return pearson(x, y)
    if m == "spearman":
        return spearman(x, y)
    if m == "kendall_b":
        return kendall_tau_b(x, y)
    n = len(x)
    if m == "jaccard":
        return jaccard_topk(x, y, params.k_for(n))
    depth = params.k_for(n) if params.rbo_scope == "top_k" else n
    return rbo(x, y, params.rbo_p, depth, params.rbo_ties).value
