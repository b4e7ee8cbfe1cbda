import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sybilwalk.errors import ConfigError, NoDataError
from sybilwalk.evaluation import (
    Confusion,
    EvalReport,
    evaluate,
    format_table,
    kfold_split,
    reports_to_json,
    run_experiment,
    score_to_label,
)
from sybilwalk.propagation import WalkConfig
from sybilwalk.synthgen import SynthConfig, generate


def from_counts(tp, fp, tn, fn):
    """Prediction/truth maps realizing a given confusion matrix."""
    pred, truth = {}, {}
    for name, (p, t, n) in {"tp": ("fake", "fake", tp), "fp": ("fake", "real", fp),
                            "tn": ("real", "real", tn), "fn": ("real", "fake", fn)}.items():
        for i in range(n):
            pred[f"{name}{i}"], truth[f"{name}{i}"] = p, t
    return pred, truth


# --- folds ---------------------------------------------------------------------


def test_even_folds():
    folds = kfold_split([f"x{i}" for i in range(10)], 5, 0)
    assert [len(f) for f in folds] == [2] * 5


def test_remainder_folds():
    ids = [f"x{i}" for i in range(11)]
    folds = kfold_split(ids, 5, 0)
    assert sorted(map(len, folds), reverse=True) == [3, 2, 2, 2, 2]
    assert sorted(sum(folds, [])) == sorted(ids)


def test_stratified_folds():
    labels = {f"b{i}": "benign" for i in range(80)} | {f"s{i}": "sybil" for i in range(20)}
    for seed in range(3):
        for fold in kfold_split(list(labels), 5, seed, labels=labels):
            assert sum(labels[u] == "benign" for u in fold) == 16
            assert sum(labels[u] == "sybil" for u in fold) == 4


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 60), st.integers(1, 10), st.integers(0, 1000))
def test_folds_partition(n, k, seed):
    ids = [f"i{j}" for j in range(n)]
    if k > n:
        with pytest.raises(ConfigError):
            kfold_split(ids, k, seed)
        return
    folds = kfold_split(ids, k, seed)
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    assert sorted(sum(folds, [])) == sorted(ids)
    assert folds == kfold_split(list(reversed(ids)), k, seed)


# --- thresholding ---------------------------------------------------------------------


def test_score_to_label():
    assert score_to_label(0.9, 0.5) == "fake"
    assert score_to_label(0.5, 0.5) == "fake"
    assert score_to_label(np.nextafter(0.5, 0), 0.5) == "real"
    assert score_to_label(0.1) == "real"


def test_threshold_sweep_monotone():
    rng = np.random.default_rng(0)
    scores = rng.random(500)
    counts = [sum(score_to_label(s, t) == "fake" for s in scores) for t in np.linspace(0, 1, 51)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


# --- metrics -------------------------------------------------------------------


def test_perfect_predictions():
    pred, truth = from_counts(7, 0, 13, 0)
    m = evaluate(pred, truth).metrics
    for cls in ("fake", "real"):
        assert m[cls] == {"precision": 1.0, "recall": 1.0, "f1": 1.0}


def test_combined_model_table_values():
    # precision 153/170 = 0.9, recall 153/180 = 0.85
    pred, truth = from_counts(153, 17, 1000, 27)
    m = evaluate(pred, truth).metrics["fake"]
    assert m["precision"] == pytest.approx(0.9, abs=1e-15)
    assert m["recall"] == pytest.approx(0.85, abs=1e-15)
    assert m["f1"] == pytest.approx(2 * 0.9 * 0.85 / 1.75, abs=1e-12)
    assert round(m["f1"], 2) == 0.87


def test_svm_only_table_values():
    # precision 292/365 = 0.8, recall 292/400 = 0.73
    pred, truth = from_counts(292, 73, 1000, 108)
    m = evaluate(pred, truth).metrics["fake"]
    assert m["precision"] == pytest.approx(0.8, abs=1e-15)
    assert m["recall"] == pytest.approx(0.73, abs=1e-15)
    assert round(m["f1"], 2) == 0.76


def test_real_class_f1_of_combined_table():
    p, r = 0.96, 0.97
    assert round(2 * p * r / (p + r), 2) == 0.96


def test_sybil_benign_vocabulary_accepted():
    r = evaluate({"a": "sybil", "b": "benign"}, {"a": "fake", "b": "benign"})
    assert r.confusion == Confusion(tp=1, tn=1)


def test_empty_intersection():
    with pytest.raises(NoDataError):
        evaluate({"a": "fake"}, {"b": "real"})


def test_undefined_ratios_are_zero():
    pred, truth = from_counts(0, 0, 5, 0)
    assert evaluate(pred, truth).metrics["fake"] == {"precision": 0.0, "recall": 0.0, "f1": 0.0}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 40), st.integers(0, 40), st.integers(0, 40), st.integers(0, 40))
def test_metrics_recomputable_from_counts(tp, fp, tn, fn):
    if tp + fp + tn + fn == 0:
        return
    pred, truth = from_counts(tp, fp, tn, fn)
    rep = evaluate(pred, truth)
    c = rep.confusion
    assert (c.tp, c.fp, c.tn, c.fn) == (tp, fp, tn, fn)
    assert c.total == len(truth)
    for cls, (a, b, d) in {"fake": (tp, fp, fn), "real": (tn, fn, fp)}.items():
        m = rep.metrics[cls]
        P = a / (a + b) if a + b else 0.0
        R = a / (a + d) if a + d else 0.0
        F = 2 * P * R / (P + R) if P + R else 0.0
        assert abs(m["precision"] - P) <= 1e-12
        assert abs(m["recall"] - R) <= 1e-12
        assert abs(m["f1"] - F) <= 1e-12
    # recall of fake and its miss rate cover every fake sample
    assert c.tp + c.fn == sum(v == "fake" for v in truth.values())


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(0, 30), st.integers(0, 30), st.integers(0, 30),
       st.randoms(use_true_random=False))
def test_metrics_order_invariant(tp, fp, tn, fn, rnd):
    pred, truth = from_counts(tp, fp, tn, fn)
    keys = list(pred)
    rnd.shuffle(keys)
    shuffled = {k: pred[k] for k in keys}
    assert evaluate(shuffled, truth).metrics == evaluate(pred, truth).metrics


def test_report_serialization_and_table():
    pred, truth = from_counts(9, 1, 8, 2)
    rep = evaluate(pred, truth)
    rep.folds = [Confusion(5, 0, 4, 1), Confusion(4, 1, 4, 1)]
    doc = json.loads(reports_to_json({"x": rep}))
    assert doc["x"]["pooled"]["confusion"] == {"tp": 9, "fp": 1, "tn": 8, "fn": 2}
    assert doc["x"]["best_fold"]["index"] == 0
    table = format_table(rep).splitlines()
    assert table[0].split() == ["Fake", "accounts", "Real", "accounts"]
    assert [row.split()[0] for row in table[1:]] == ["Precision", "Recall", "F1"]
    assert table[1].split()[1] == "0.90"


# --- experiments -------------------------------------------------------------------


SMALL = SynthConfig(n_benign=80, n_sybil=80, intra_edge_prob=0.1, attack_edges=8, rng_seed=7)


def test_experiment_is_deterministic_and_pools_folds():
    ds = generate(SMALL)
    a = run_experiment(ds, "hybrid", 5, 0)
    b = run_experiment(ds, "hybrid", 5, 0)
    assert a.to_dict() == b.to_dict()
    assert a.confusion.total == len(ds.ground_truth)
    assert sum((f for f in a.folds), Confusion()) == a.confusion
    assert len(a.iterations) == 5


def test_disconnected_regions_give_perfect_hybrid():
    ds = generate(SynthConfig(n_benign=60, n_sybil=60, intra_edge_prob=0.15, attack_edges=0,
                              label_fraction=1.0, rng_seed=3))
    rep = run_experiment(ds, "hybrid", 5, 0, walk_config=WalkConfig(epsilon=1e-12))
    assert rep.f1("fake") == 1.0
    assert rep.f1("real") == 1.0


def test_uniform_prior_matches_hybrid_at_tight_epsilon(default_dataset):
    # Sparse attack edges make the chain slow-mixing, so the residual stop
    # leaves an error of order sqrt(eps) / spectral gap; the default benchmark
    # stays well inside 1e-5 at eps = 1e-10.
    cfg = WalkConfig(epsilon=1e-10)
    h = run_experiment(default_dataset, "hybrid", 5, 0, walk_config=cfg)
    u = run_experiment(default_dataset, "uniform_prior_hybrid", 5, 0, walk_config=cfg)
    diffs = [abs(h.scores[k] - u.scores[k]) for k in h.scores]
    assert max(diffs) <= 1e-5


def test_hybrid_beats_svm_only_on_defaults(default_dataset):
    svm = run_experiment(default_dataset, "svm_only", 5, 0)
    hyb = run_experiment(default_dataset, "hybrid", 5, 0)
    assert hyb.f1("fake") > svm.f1("fake")


def test_unknown_variant():
    with pytest.raises(ConfigError):
        run_experiment(generate(SMALL), "magic")
