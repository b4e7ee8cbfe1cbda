import filecmp
import itertools

import numpy as np
import pytest

from sybilwalk import io as sio
from sybilwalk.errors import ConfigError
from sybilwalk.features import FEATURE_NAMES, extract_features
from sybilwalk.graph import build_graph, connected_components
from sybilwalk.propagation import exact_hitting_probabilities
from sybilwalk.synthgen import FEATURE_MEANS, SynthConfig, generate


def is_attack(e):
    return e.u[0] != e.v[0]


def test_two_disjoint_cliques():
    cfg = SynthConfig(n_benign=5, n_sybil=5, intra_edge_prob=1.0, attack_edges=0, label_fraction=0.4)
    ds = generate(cfg)
    pairs = {frozenset((e.u, e.v)) for e in ds.edges}
    benign = [a.account_id for a in ds.accounts if a.account_id.startswith("b")]
    sybil = [a.account_id for a in ds.accounts if a.account_id.startswith("s")]
    expected = {frozenset(p) for ids in (benign, sybil) for p in itertools.combinations(ids, 2)}
    assert pairs == expected
    assert sum(1 for u in ds.labels if u.startswith("b")) == 2
    assert sum(1 for u in ds.labels if u.startswith("s")) == 2
    g = build_graph(ds.edges, ds.labels)
    assert sorted(map(len, connected_components(g))) == [5, 5]


@pytest.mark.parametrize("seed", range(3))
def test_no_attack_edges_means_no_mixed_component(seed):
    ds = generate(SynthConfig(n_benign=50, n_sybil=50, attack_edges=0, rng_seed=seed))
    g = build_graph(ds.edges, ds.labels, nodes=[a.account_id for a in ds.accounts])
    for comp in connected_components(g):
        assert len({ds.ground_truth[u] for u in comp}) == 1


def test_byte_identical_output(tmp_path):
    cfg = SynthConfig(200, 200, 0.05, 20, 0.2, rng_seed=42)
    a = sio.write_dataset(generate(cfg), tmp_path / "a")
    b = sio.write_dataset(generate(cfg), tmp_path / "b")
    for key in a:
        assert filecmp.cmp(a[key], b[key], shallow=False)
    c = sio.write_dataset(generate(SynthConfig(rng_seed=43)), tmp_path / "c")
    assert not filecmp.cmp(a["edges"], c["edges"], shallow=False)


@pytest.mark.parametrize("k", [0, 1, 20, 100])
def test_attack_edge_count_and_mutual_counts(k):
    ds = generate(SynthConfig(n_benign=30, n_sybil=30, attack_edges=k, rng_seed=k))
    attacks = [e for e in ds.edges if is_attack(e)]
    assert len(attacks) == k
    assert all(e.mutual_friend_count in (0, 1) for e in attacks)
    intra = [e.mutual_friend_count for e in ds.edges if not is_attack(e)]
    assert min(intra) >= 10


def test_graph_preconditions_hold():
    ds = generate(SynthConfig())
    seen = set()
    for e in ds.edges:
        assert e.u != e.v
        key = frozenset((e.u, e.v))
        assert key not in seen
        seen.add(key)


def test_labels_subset_of_ground_truth():
    ds = generate(SynthConfig(label_fraction=0.25))
    assert all(ds.ground_truth[u] == lab for u, lab in ds.labels.items())
    assert len(ds.labels) == 100
    assert {a.account_id for a in ds.accounts} == set(ds.ground_truth)
    for a in ds.accounts:
        assert a.label == ds.labels.get(a.account_id, "unknown")


def test_feature_directions_follow_class_means():
    ds = generate(SynthConfig(n_benign=400, n_sybil=400, rng_seed=1))
    X = {"benign": [], "sybil": []}
    for a in ds.accounts:
        X[ds.ground_truth[a.account_id]].append(extract_features(a).as_array())
    mb, ms = np.mean(X["benign"], axis=0), np.mean(X["sybil"], axis=0)
    for i, name in enumerate(FEATURE_NAMES):
        b, s = FEATURE_MEANS[name]
        if abs(b - s) > 0.5 * max(b, s):
            assert np.sign(ms[i] - mb[i]) == np.sign(s - b), name


def test_zero_noise_is_poisson():
    ds = generate(SynthConfig(n_benign=2000, n_sybil=1, feature_noise=0.0, attack_edges=0, rng_seed=3))
    name = FEATURE_NAMES[0]
    vals = np.array([a.counts.get(name, 0) for a in ds.accounts if a.account_id.startswith("b")])
    mean = FEATURE_MEANS[name][0]
    assert vals.mean() == pytest.approx(mean, rel=0.1)
    assert vals.var() == pytest.approx(mean, rel=0.2)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"attack_edges": 26, "n_benign": 5, "n_sybil": 5},
        {"n_benign": 0},
        {"intra_edge_prob": 0.0},
        {"intra_edge_prob": 1.5},
        {"label_fraction": 0.0},
        {"attack_edges": -1},
        {"feature_noise": -0.1},
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        SynthConfig(**kwargs)


def test_full_labels_without_attack_edges_give_exact_zero_one():
    ds = generate(SynthConfig(n_benign=40, n_sybil=40, attack_edges=0, label_fraction=1.0, rng_seed=5))
    g = build_graph(ds.edges, ds.labels, nodes=[a.account_id for a in ds.accounts])
    exact = exact_hitting_probabilities(g)
    for u in g.users:
        target = 1.0 if ds.ground_truth[u] == "sybil" else 0.0
        assert exact[u] == pytest.approx(target, abs=1e-12)
