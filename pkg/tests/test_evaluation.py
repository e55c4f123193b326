import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from hiercent.evaluation import (
    EvalParams,
    ParameterError,
    RankedList,
    UndefinedCorrelationError,
    evaluate,
    jaccard_topk,
    kendall_tau_b,
    midranks,
    default_topk,
    pearson,
    rbo,
    rbo_ranked,
    spearman,
)
from oracles import tau_b_pairs

vectors = st.integers(2, 40).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(-5, 5), min_size=n, max_size=n),
        st.lists(st.integers(-5, 5), min_size=n, max_size=n),
    )
)


def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)
    with pytest.raises(UndefinedCorrelationError):
        pearson([1, 1, 1], [1, 2, 3])


def test_pearson_constant_with_rounding_noise():
    x = np.full(5, 0.1) + np.array([0, 1, 0, 1, 0]) * 1e-17
    with pytest.raises(UndefinedCorrelationError):
        pearson(x, [1, 2, 3, 4, 5])


def test_spearman_examples():
    x = np.arange(1.0, 9.0)
    assert spearman(x, x ** 2) == pytest.approx(1.0)
    assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert midranks([1, 1, 2]).tolist() == [1.5, 1.5, 3.0]
    assert spearman([1, 1, 2], [1, 2, 3]) == pytest.approx(pearson([1.5, 1.5, 3], [1, 2, 3]))


def test_kendall_examples():
    p = [3, 1, 4, 2, 5]
    assert kendall_tau_b(p, p) == pytest.approx(1.0)
    assert kendall_tau_b(p, [-v for v in p]) == pytest.approx(-1.0)
    assert kendall_tau_b([1, 1, 2], [1, 2, 2]) == pytest.approx(0.5)
    with pytest.raises(UndefinedCorrelationError):
        kendall_tau_b([1, 1, 1], [1, 2, 3])


@settings(max_examples=300, deadline=None)
@given(vectors)
def test_kendall_matches_pair_classification(xy):
    x, y = xy
    try:
        expected = tau_b_pairs(x, y)
    except ZeroDivisionError:
        with pytest.raises(UndefinedCorrelationError):
            kendall_tau_b(x, y)
        return
    assert kendall_tau_b(x, y) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.permutations(list(range(12))), st.permutations(list(range(12))))
def test_kendall_tau_a_agreement_without_ties(x, y):
    nc = sum((x[i] - x[j]) * (y[i] - y[j]) > 0 for i, j in itertools.combinations(range(12), 2))
    nd = 66 - nc
    assert kendall_tau_b(x, y) == pytest.approx((nc - nd) / 66, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(vectors)
def test_correlation_range_and_symmetry(xy):
    x, y = xy
    for f in (pearson, spearman, kendall_tau_b):
        try:
            v = f(x, y)
        except UndefinedCorrelationError:
            continue
        assert -1 <= v <= 1
        assert f(y, x) == pytest.approx(v, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(vectors, st.floats(0.1, 10), st.floats(-10, 10))
def test_transform_invariance(xy, a, b):
    x, y = (np.asarray(v, dtype=float) for v in xy)
    assume(np.ptp(x) > 0 and np.ptp(y) > 0)
    assert pearson(a * x + b, y) == pytest.approx(pearson(x, y), abs=1e-12)
    assert spearman(np.exp(x), y) == pytest.approx(spearman(x, y), abs=1e-12)
    assert kendall_tau_b(x ** 3 + x, y) == pytest.approx(kendall_tau_b(x, y), abs=1e-12)


def test_ranked_list_ties_by_index():
    r = RankedList.from_scores([1, 3, 3, 2])
    assert r.order.tolist() == [1, 2, 3, 0]
    assert r.group_start.tolist() == [0, 0, 2, 3]
    assert r.group_end.tolist() == [2, 2, 3, 4]


def test_topk_rule():
    assert default_topk(34) == 10 and default_topk(149) == 10
    assert default_topk(150) == 15 and default_topk(151) == 16


def test_jaccard_examples():
    x = [5, 4, 3, 2, 1]
    assert jaccard_topk(x, x, 3) == 1.0
    assert jaccard_topk([2, 1, 0, 0], [0, 0, 1, 2], 2) == 0.0
    assert jaccard_topk([4, 3, 2, 1], [1, 4, 3, 2], 3) == 0.5
    with pytest.raises(ParameterError):
        jaccard_topk(x, x, 6)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30), st.data())
def test_jaccard_self_is_one(x, data):
    k = data.draw(st.integers(1, len(x)))
    assert jaccard_topk(x, x, k) == 1.0


def test_rbo_examples():
    r = rbo_ranked(["a", "b"], ["b", "a"], 0.5)
    assert (r.base, r.extrapolated) == (0.25, 0.5)
    x = np.arange(10.0)
    for p in (0.1, 0.5, 0.9):
        assert rbo(x, x, p, 10).value == pytest.approx(1.0)
    assert rbo_ranked(list("abc"), list("xyz"), 0.9).value == 0.0
    with pytest.raises(ParameterError):
        rbo(x, x, 1.0, 5)


def test_rbo_group_ties():
    # all tied on one side: every prefix holds the whole set
    r = rbo([1, 1, 1, 1], [4, 3, 2, 1], 0.5, 2, ties="group")
    assert r.base == pytest.approx(0.5 * 0.25 + 0.25 * 0.5)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 25).flatmap(lambda n: st.tuples(st.permutations(list(range(n))),
                                                      st.permutations(list(range(n))),
                                                      st.integers(1, n))),
       st.floats(0.01, 0.99))
def test_rbo_bounds(abk, p):
    a, b, k = abk
    r = rbo_ranked(a, b, p, k)
    assert 0 <= r.base <= r.extrapolated <= r.base + p ** k + 1e-12
    assert r.extrapolated <= 1.0


def test_rbo_monotone_in_agreement():
    # swapping a disagreeing element into agreement never lowers RBO
    a = list(range(10))
    b = [0, 5, 2, 7, 4, 1, 6, 3, 8, 9]
    prev = rbo_ranked(a, b, 0.9, 10).value
    for i in range(10):
        j = b.index(a[i])
        b[i], b[j] = b[j], b[i]
        cur = rbo_ranked(a, b, 0.9, 10).value
        assert cur >= prev - 1e-12
        prev = cur
    assert prev == pytest.approx(1.0)


def test_eval_params_ids_and_dispatch():
    assert EvalParams("rbo", 0.5).id == "rbo_topk_p0.5"
    assert EvalParams("rbo", 0.9, "entire_set").id == "rbo_all_p0.9"
    x = np.arange(20.0)
    y = x[::-1]
    assert evaluate(x, y, EvalParams("pearson")) == pytest.approx(-1)
    assert evaluate(x, y, EvalParams("jaccard")) == 0.0
    assert evaluate(x, x, EvalParams("rbo", 0.9, "entire_set")) == pytest.approx(1.0)
    with pytest.raises(ParameterError):
        EvalParams("nope")
