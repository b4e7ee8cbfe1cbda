import numpy as np
import pytest

from sybilwalk.graph import EdgeObservation, build_graph
from sybilwalk.synthgen import SynthConfig, generate


def path_graph(*names, labels=None):
    """Unit-weight path; names starting with '<' are label nodes at the ends."""
    obs = [EdgeObservation(a, b, 1) for a, b in zip(names, names[1:])]
    return build_graph(obs, labels or {})


def synthetic_graph(config: SynthConfig, labels=None):
    ds = generate(config)
    ids = [a.account_id for a in ds.accounts]
    return ds, build_graph(ds.edges, ds.labels if labels is None else labels, nodes=ids)


def random_labeled_graph(n: int, p: float, seed: int, label_prob: float = 0.2):
    """Erdos-Renyi graph with integer mutual counts and random partial labels."""
    rng = np.random.default_rng(seed)
    names = [f"n{i:03d}" for i in range(n)]
    obs = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                obs.append(EdgeObservation(names[i], names[j], int(rng.integers(0, 10))))
    labels = {}
    for u in names:
        r = rng.random()
        if r < label_prob / 2:
            labels[u] = "benign"
        elif r < label_prob:
            labels[u] = "sybil"
    return build_graph(obs, labels, nodes=names)


@pytest.fixture(scope="session")
def default_dataset():
    return generate(SynthConfig())
