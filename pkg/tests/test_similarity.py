import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from narrative_arcs.arcs import Arc
from narrative_arcs.errors import EmptyArc, TooFewArcs, ValidationError
from narrative_arcs.similarity import (
    Dendrogram,
    DistanceMatrix,
    distance_matrix,
    dtw_distance,
    hcluster,
)

from oracles import dtw_recursive

short = st.lists(st.floats(-10, 10), min_size=1, max_size=8)


def arc(values, model="a"):
    from narrative_arcs.scorers import ModelDescriptor

    return Arc.from_values(values, ModelDescriptor(model, "lexical"), "c", "downsampled")


def test_dtw_examples():
    a = [0.3, -1.2, 2.0]
    assert dtw_distance(a, a) == 0.0
    assert dtw_distance([1], [2]) == 1.0
    assert dtw_distance([1, 2, 3], [1, 2, 2, 3]) == 0.0
    assert dtw_recursive([1, 2, 3], [1, 2, 2, 3]) == 0.0


def test_dtw_accepts_arcs():
    assert dtw_distance(arc([0, 1]), arc([0, 2])) == 1.0


def test_dtw_empty():
    with pytest.raises(EmptyArc):
        dtw_distance([], [1.0])


def test_dtw_constant_offset():
    a = np.array([0.0, 1.0, 0.0, -1.0])
    assert dtw_distance(a, a + 0.5) == pytest.approx(math.sqrt(4) * 0.5)
    assert dtw_recursive(a, a + 0.5) == pytest.approx(1.0)


@settings(max_examples=200)
@given(short, short, st.sampled_from(["squared", "absolute"]))
def test_dtw_matches_recursive_oracle(a, b, cost):
    assert dtw_distance(a, b, cost) == pytest.approx(dtw_recursive(a, b, cost), abs=1e-9)


@given(short, short)
def test_dtw_symmetric_nonnegative(a, b):
    d = dtw_distance(a, b)
    assert d >= 0
    assert d == dtw_distance(b, a)
    assert dtw_distance(a, a) == 0.0


@given(short, short, st.integers(0, 8))
def test_dtw_window_never_below_full(a, b, w):
    # a band can only remove paths
    assert dtw_distance(a, b, window=w) >= dtw_distance(a, b) - 1e-12


def test_distance_matrix_shapes():
    m = distance_matrix([arc([1, 2], "a"), arc([1, 2], "b")])
    assert m.d.tolist() == [[0, 0], [0, 0]]
    rng = np.random.default_rng(0)
    arcs = [arc(rng.normal(size=5), f"m{i}") for i in range(3)]
    m = distance_matrix(arcs)
    assert m.d.shape == (3, 3)
    assert np.array_equal(m.d, m.d.T) and np.all(np.diag(m.d) == 0)
    assert m.labels == ("m0", "m1", "m2")


def test_distance_matrix_pair_count():
    rng = np.random.default_rng(3)
    arcs = [arc(rng.normal(size=25), f"m{i:02d}") for i in range(34)]
    calls = []

    def counting(a, b):
        calls.append((a.model.model_id, b.model.model_id))
        return dtw_distance(a, b)

    m = distance_matrix(arcs, metric=counting)
    assert len(calls) == 561 == math.comb(34, 2)
    assert len(set(calls)) == 561
    threaded = distance_matrix(arcs, threads=4)
    assert np.array_equal(threaded.d, m.d)


def test_distance_matrix_errors():
    with pytest.raises(TooFewArcs):
        distance_matrix([arc([1.0])])
    with pytest.raises(ValidationError):
        DistanceMatrix(("a", "b"), [[0, 1], [2, 0]])


def test_distance_matrix_csv_round_trip():
    rng = np.random.default_rng(4)
    m = distance_matrix([arc(rng.normal(size=6), f"m{i}") for i in range(4)])
    back = DistanceMatrix.from_csv(m.to_csv())
    assert back.labels == m.labels and np.array_equal(back.d, m.d)


def matrix(labels, pairs):
    n = len(labels)
    d = np.zeros((n, n))
    for (a, b), v in pairs.items():
        i, j = labels.index(a), labels.index(b)
        d[i, j] = d[j, i] = v
    return DistanceMatrix(tuple(labels), d)


def test_hcluster_two_leaves():
    dend = hcluster(matrix(["a", "b"], {("a", "b"): 5.0}))
    assert [(m.left, m.right, m.height) for m in dend.merges] == [(("a",), ("b",), 5.0)]


def test_hcluster_three_leaves_single():
    m = matrix(["A", "B", "C"], {("A", "B"): 1, ("A", "C"): 10, ("B", "C"): 10})
    dend = hcluster(m, "single")
    assert [(m.members, m.height) for m in dend.merges] == [(("A", "B"), 1), (("A", "B", "C"), 10)]
    assert dend.leaf_order() == ["A", "B", "C"]


def test_hcluster_linkages_differ():
    m = matrix(["a", "b", "c"], {("a", "b"): 1, ("a", "c"): 2, ("b", "c"): 4})
    heights = {lk: hcluster(m, lk).merges[-1].height for lk in ("single", "complete", "average")}
    assert heights == {"single": 2.0, "complete": 4.0, "average": 3.0}


def test_hcluster_tie_break():
    # all distances equal: merge order follows sorted labels
    m = matrix(["c", "a", "b"], {("a", "b"): 1, ("a", "c"): 1, ("b", "c"): 1})
    dend = hcluster(m)
    assert dend.merges[0].members == ("a", "b")


def random_matrix(seed, n):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    np.fill_diagonal(d, 0)
    d = (d + d.T) / 2
    return DistanceMatrix(tuple(f"m{i}" for i in range(n)), d)


@given(st.integers(0, 10**6), st.integers(2, 12), st.sampled_from(["single", "complete", "average"]))
def test_hcluster_structure(seed, n, linkage):
    dend = hcluster(random_matrix(seed, n), linkage)
    heights = [m.height for m in dend.merges]
    assert len(dend.merges) == n - 1
    assert heights == sorted(heights)
    assert sorted(dend.leaf_order()) == sorted(dend.leaves)


@given(st.integers(0, 10**6), st.integers(3, 10), st.sampled_from(["single", "complete", "average"]))
def test_hcluster_matches_scipy(seed, n, linkage):
    from scipy.cluster.hierarchy import linkage as scipy_linkage
    from scipy.spatial.distance import squareform

    m = random_matrix(seed, n)
    ref = scipy_linkage(squareform(m.d, checks=False), method=linkage)
    np.testing.assert_allclose([mg.height for mg in hcluster(m, linkage).merges], ref[:, 2], rtol=1e-12)


def partitions(dend):
    return {(m.members, m.height) for m in dend.merges}


@given(st.integers(0, 10**6), st.integers(2, 9), st.randoms())
def test_hcluster_permutation_isomorphic(seed, n, rnd):
    m = random_matrix(seed, n)
    order = list(range(n))
    rnd.shuffle(order)
    perm = DistanceMatrix(tuple(m.labels[i] for i in order), m.d[np.ix_(order, order)])
    for linkage in ("single", "complete", "average"):
        a, b = hcluster(m, linkage), hcluster(perm, linkage)
        assert [(x.members, x.height) for x in a.merges] == [(x.members, x.height) for x in b.merges]


def test_hcluster_permutation_with_ties():
    labels = ["a", "b", "c", "d"]
    m = matrix(labels, {p: 1.0 for p in itertools.combinations(labels, 2)})
    first = partitions(hcluster(m))
    for order in itertools.permutations(range(4)):
        perm = DistanceMatrix(tuple(labels[i] for i in order), m.d[np.ix_(order, order)])
        assert partitions(hcluster(perm)) == first


def test_dendrogram_serialization():
    m = matrix(["A", "B", "C"], {("A", "B"): 1, ("A", "C"): 10, ("B", "C"): 10})
    dend = hcluster(m)
    assert Dendrogram.from_json(dend.to_json()) == dend
    assert dend.to_newick() == "((A:1.0,B:1.0):9.0,C:10.0);\n"
