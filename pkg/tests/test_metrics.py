import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from narrative_arcs.arcs import Arc, build_ensemble, ensemble_median
from narrative_arcs.errors import AllExactMatch, EmptyFamily
from narrative_arcs.metrics import (
    EPS,
    MetricTable,
    compute_metrics,
    ecc,
    is_exact_match,
    mcc,
    mfc,
    rank_models,
)
from narrative_arcs.scorers import ModelDescriptor, SentimentSeries


def arc(values, model="m", family="lexical"):
    return Arc.from_values(values, ModelDescriptor(model, family), "c", "smoothed")


def test_mcc_examples():
    assert mcc([0, 0, 0], [1, 1, 1]) == pytest.approx(math.sqrt(3), abs=1e-12)
    assert mcc(arc([1, 2, 3]), arc([1, 2, 3])) == 3 / EPS
    assert is_exact_match([1, 2, 3], [1, 2, 3])
    assert not is_exact_match([1, 2, 3], [1, 2, 4])


@given(st.integers(2, 500), st.floats(0.01, 10))
def test_mcc_scales_with_sqrt_length(n, delta):
    assert mcc(np.zeros(n), np.full(n, delta)) == pytest.approx(math.sqrt(n) / delta, rel=1e-12)


def test_ecc_examples():
    med = np.zeros(4)
    # each model at normalized distance 0.5
    a, b = np.full(4, 1.0), np.full(4, -1.0)
    assert ecc([a, b], med) == pytest.approx(1.0)
    assert ecc([a / 2, b / 2], med) == pytest.approx(2.0)
    with pytest.raises(AllExactMatch):
        ecc([med, med], med)


def test_ecc_drops_when_divergent_model_added():
    med = np.zeros(10)
    coherent = [np.full(10, 0.1), np.full(10, -0.1)]
    assert ecc(coherent + [np.full(10, 3.0)], med) < ecc(coherent, med)


@given(st.integers(0, 10**6), st.integers(2, 8), st.floats(1.01, 5))
def test_ecc_monotone_in_single_model(seed, k, factor):
    rng = np.random.default_rng(seed)
    arcs = list(rng.normal(size=(k, 30)))
    med = np.median(arcs, axis=0)
    i = int(rng.integers(k))
    worse = list(arcs)
    worse[i] = med + factor * (arcs[i] - med)
    if np.linalg.norm(arcs[i] - med) < 1e-9:
        return
    assert ecc(worse, med) < ecc(arcs, med)


def test_mfc_examples():
    lit, mean = mfc({"a": 2.0, "b": 2.0}, {"a": "F", "b": "F"})
    assert lit == {"F": 0.25} and mean == {"F": 2.0}
    lit, mean = mfc({"a": 4.0}, {"a": "G"})
    assert lit == {"G": 0.25} and mean == {"G": 4.0}
    lit, mean = mfc({"a": 3.0, "b": 3.0}, {"a": "F", "b": "G"})
    assert lit["F"] == lit["G"] and mean["F"] == mean["G"]
    with pytest.raises(EmptyFamily):
        mfc({"a": 1.0}, {})


@given(
    st.dictionaries(
        st.text("abcdef", min_size=1, max_size=4),
        st.tuples(st.floats(0.01, 1e6), st.sampled_from(["x", "y", "z"])),
        min_size=1,
    )
)
def test_mfc_literal_times_sum_is_one(models):
    values = {m: v for m, (v, _) in models.items()}
    fams = {m: f for m, (_, f) in models.items()}
    lit, mean = mfc(values, fams)
    for fam in lit:
        members = [values[m] for m in values if fams[m] == fam]
        assert lit[fam] * math.fsum(members) == pytest.approx(1.0, abs=1e-9)
        assert mean[fam] == pytest.approx(math.fsum(members) / len(members))


def test_rank_models_examples():
    assert rank_models({"a": 2, "b": 1}) == ["a", "b"]
    assert rank_models({"b": 1, "a": 1}) == ["a", "b"]


@given(st.dictionaries(st.text("abc", min_size=1, max_size=3), st.floats(0, 100), min_size=1))
def test_rank_models_total_order(values):
    ranked = rank_models(values)
    assert sorted(ranked) == sorted(values)
    for p, q in zip(ranked, ranked[1:]):
        assert values[p] > values[q] or (values[p] == values[q] and p < q)


def test_closest_model_ranks_first():
    rng = np.random.default_rng(11)
    base = rng.normal(size=50)
    # two arcs strictly above and two strictly below base: base is the median everywhere
    others = [arc(base + sign * (0.5 + rng.random(50)), f"o{i}") for i, sign in enumerate((1, 1, -1, -1))]
    probe = arc(base, "probe")
    med = ensemble_median(others + [probe])
    table = {a.model.model_id: mcc(a, med) for a in others + [probe]}
    assert rank_models(table)[0] == "probe"


def ensemble_from(values, families=None):
    series = [
        SentimentSeries(ModelDescriptor(f"m{i}", (families or {}).get(i, "lexical")), "c", v)
        for i, v in enumerate(values)
    ]
    return build_ensemble(series, 0.1)


def test_compute_metrics_table():
    rng = np.random.default_rng(5)
    ens = ensemble_from(rng.normal(size=(5, 60)), {0: "heuristic", 1: "heuristic"})
    table = compute_metrics(ens)
    assert len(table.mcc) == 5
    assert set(table.mfc_literal) == {"heuristic", "lexical"}
    assert table.ranking == tuple(rank_models(table.mcc))
    back = MetricTable.from_json(table.to_json())
    assert back == table
    csv_lines = table.to_csv().splitlines()
    assert csv_lines[0] == "model_id,family,mcc,rank"
    assert csv_lines[1].startswith(table.ranking[0] + ",")
    assert any(line.startswith("__ecc__") for line in csv_lines)


@given(st.integers(0, 10**6), st.floats(0.1, 20), st.floats(-20, 20))
def test_ranking_invariant_under_affine_rescaling(seed, a, b):
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(4, 40))
    scaled = raw.copy()
    k = int(rng.integers(4))
    scaled[k] = a * raw[k] + b
    r1 = compute_metrics(ensemble_from(raw)).ranking
    r2 = compute_metrics(ensemble_from(scaled)).ranking
    assert r1 == r2
