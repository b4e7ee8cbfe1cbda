import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sybilwalk.errors import (
    DegenerateLabelsError,
    EmptyDatasetError,
    MalformedDataError,
    MalformedRecordError,
)
from sybilwalk.features import (
    FEATURE_NAMES,
    N_FEATURES,
    AccountRecord,
    FeatureVector,
    NormalizationStats,
    denormalize,
    extract_features,
    fit_normalization,
    normalize,
    rank_features_by_entropy,
)
from sybilwalk.synthgen import SynthConfig, generate


def vec(values, name="x"):
    return FeatureVector(name, tuple(float(v) for v in values))


def test_eighteen_features_in_table_order():
    assert N_FEATURES == 18
    assert FEATURE_NAMES[0] == "active_days"
    assert FEATURE_NAMES[1] == "friend_count"
    assert FEATURE_NAMES[-1] == "pages_tagged_in_comments"


def test_zero_record_gives_zero_vector():
    rec = AccountRecord("a", {name: 0 for name in FEATURE_NAMES})
    assert extract_features(rec).values == (0.0,) * 18


def test_single_field_lands_at_its_index():
    v = extract_features(AccountRecord("a", {"friend_count": 350}))
    assert v.values[1] == 350.0
    assert sum(v.values) == 350.0


def test_missing_and_hidden_fields_impute_zero():
    v = extract_features(AccountRecord("a", {"post_count": None, "group_count": 4}))
    assert v.values[2] == 4.0
    assert v.values[3] == 0.0


def test_extraction_is_reproducible_on_synthetic_corpus():
    records = generate(SynthConfig(n_benign=50, n_sybil=50, rng_seed=7)).accounts
    first = [extract_features(r) for r in records]
    second = [extract_features(r) for r in generate(SynthConfig(50, 50, rng_seed=7)).accounts]
    assert len(first) == 100
    assert all(len(v.values) == 18 for v in first)
    assert np.array([v.values for v in first]).tobytes() == np.array(
        [v.values for v in second]
    ).tobytes()


@pytest.mark.parametrize(
    "obj",
    [
        {"account_id": ""},
        {"friend_count": 3},
        {"account_id": "a", "friend_count": -1},
        {"account_id": "a", "friend_count": "many"},
        {"account_id": "a", "label": "maybe"},
        {"account_id": "a", "not_a_field": 1},
    ],
)
def test_malformed_records_rejected(obj):
    with pytest.raises(MalformedRecordError):
        AccountRecord.from_dict(obj)


def test_record_dict_round_trip():
    rec = AccountRecord.from_dict({"account_id": "u1", "friend_count": 5, "label": "sybil"})
    assert AccountRecord.from_dict(rec.to_dict()) == rec
    assert AccountRecord.from_dict({"account_id": "u2"}).label == "unknown"


def test_feature_vector_invariants():
    with pytest.raises(MalformedDataError):
        vec([0.0] * 17)
    with pytest.raises(MalformedDataError):
        vec([math.nan] + [0.0] * 17)


def test_normalization_two_point_case():
    stats = fit_normalization([vec([0.0] * 18), vec([2.0] + [0.0] * 17)])
    assert stats.means[0] == 1.0 and stats.stds[0] == 1.0
    assert stats.means[1:] == (0.0,) * 17
    assert stats.stds[1:] == (1.0,) * 17


def test_normalization_degenerate_variance():
    v = vec(range(18))
    stats = fit_normalization([v, v, v])
    assert stats.stds == (1.0,) * 18
    assert stats.means == v.values


def test_normalization_empty_raises():
    with pytest.raises(EmptyDatasetError):
        fit_normalization([])


def test_normalization_matches_two_pass_reference():
    rng = np.random.default_rng(3)
    X = rng.gamma(2.0, 50.0, size=(1000, 18))
    X[:, 5] = 7.0
    stats = fit_normalization([vec(row) for row in X])
    for j in range(18):
        col = [float(x) for x in X[:, j]]
        mean = math.fsum(col) / len(col)
        var = math.fsum((x - mean) ** 2 for x in col) / len(col)
        std = math.sqrt(var) if var > 0 else 1.0
        assert stats.means[j] == pytest.approx(mean, rel=1e-12, abs=1e-12)
        assert stats.stds[j] == pytest.approx(std, rel=1e-12)


def test_normalize_centering_and_unit_scale():
    stats = NormalizationStats(tuple(range(18)), tuple(1.0 + i for i in range(18)))
    assert normalize(vec(stats.means), stats).values == (0.0,) * 18
    shifted = vec(np.add(stats.means, stats.stds))
    assert normalize(shifted, stats).values == pytest.approx((1.0,) * 18, abs=1e-15)


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=18, max_size=18), st.lists(finite, min_size=18, max_size=18),
       st.lists(st.floats(1e-3, 1e3), min_size=18, max_size=18))
def test_normalize_round_trip(values, means, stds):
    stats = NormalizationStats(tuple(means), tuple(stds))
    v = vec(values)
    back = denormalize(normalize(v, stats), stats)
    for x, m, b in zip(values, means, back.values):
        assert abs(b - x) <= 1e-12 * max(1.0, abs(x), abs(m))


@settings(max_examples=30, deadline=None)
@given(st.lists(finite, min_size=18, max_size=18))
def test_identity_stats_are_identity(values):
    ident = NormalizationStats.identity()
    v = vec(values)
    assert normalize(normalize(v, ident), ident) == v


# --- entropy ranking ---------------------------------------------------------


def _brute_gain(column, labels):
    """Information gain by explicit counting, independent of the library path."""
    med = float(np.median(column))
    n = len(labels)

    def h(items):
        if not items:
            return 0.0
        out = 0.0
        for cls in ("benign", "sybil"):
            c = sum(1 for x in items if x == cls)
            if c:
                out -= c / len(items) * math.log2(c / len(items))
        return out

    high = [lab for x, lab in zip(column, labels) if x > med]
    low = [lab for x, lab in zip(column, labels) if not x > med]
    return h(list(labels)) - len(high) / n * h(high) - len(low) / n * h(low)


def test_perfect_feature_gets_one_bit():
    labels = ["benign"] * 10 + ["sybil"] * 10
    vectors = [vec([0.0] * 4 + [1.0 if lab == "sybil" else 0.0] + [3.0] * 13, str(i))
               for i, lab in enumerate(labels)]
    ranking = rank_features_by_entropy(vectors, labels)
    assert ranking[0] == (4, pytest.approx(1.0, abs=1e-12))
    assert dict(ranking)[0] == 0.0


def test_noisy_indicator_ranked_first_and_matches_counting():
    rng = np.random.default_rng(11)
    n = 400
    y = rng.integers(0, 2, n)
    X = rng.normal(size=(n, 18))
    X[:, 3] = y + rng.uniform(-0.3, 0.3, n)
    labels = ["sybil" if t else "benign" for t in y]
    ranking = rank_features_by_entropy([vec(r, str(i)) for i, r in enumerate(X)], labels)
    assert ranking[0][0] == 3
    for j, gain in ranking:
        assert gain == pytest.approx(_brute_gain(X[:, j].tolist(), labels), abs=1e-9)
    gains = [g for _, g in ranking]
    assert gains == sorted(gains, reverse=True)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_gain_bounded_by_label_entropy(data):
    n = data.draw(st.integers(4, 40))
    labels = data.draw(st.lists(st.sampled_from(["benign", "sybil"]), min_size=n, max_size=n))
    if len(set(labels)) < 2:
        labels[0], labels[1] = "benign", "sybil"
    rows = data.draw(st.lists(st.lists(st.integers(0, 5), min_size=18, max_size=18),
                              min_size=n, max_size=n))
    ranking = rank_features_by_entropy([vec(r, str(i)) for i, r in enumerate(rows)], labels)
    p = labels.count("sybil") / n
    base = -(p * math.log2(p) + (1 - p) * math.log2(1 - p))
    assert all(0.0 <= g <= base + 1e-12 for _, g in ranking)


def test_single_class_rejected():
    with pytest.raises(DegenerateLabelsError):
        rank_features_by_entropy([vec([0] * 18), vec([1] * 18)], ["sybil", "sybil"])
