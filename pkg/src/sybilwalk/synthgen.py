"""Synthetic two-region social graphs with attack edges and class-conditional features."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sybilwalk.errors import ConfigError
from sybilwalk.features import BENIGN, FEATURE_NAMES, SYBIL, UNKNOWN, AccountRecord
from sybilwalk.graph import EdgeObservation

# Mean count per feature for (benign, sybil) accounts. Sybils get fewer friends
# and more group joins and shares; magnitudes are arbitrary but fixed.
FEATURE_MEANS: dict[str, tuple[float, float]] = {
    "active_days": (700.0, 250.0),
    "friend_count": (300.0, 150.0),
    "group_count": (25.0, 45.0),
    "post_count": (60.0, 35.0),
    "wall_post_count": (45.0, 25.0),
    "tagged_in_post_count": (20.0, 9.0),
    "reaction_count": (250.0, 400.0),
    "comment_count": (150.0, 230.0),
    "likes_received": (250.0, 120.0),
    "comments_received": (90.0, 45.0),
    "shares_received": (25.0, 12.0),
    "tags_in_own_posts": (30.0, 16.0),
    "users_tagged_in_posts": (22.0, 11.0),
    "pages_tagged_in_posts": (4.0, 7.0),
    "shared_post_count": (50.0, 85.0),
    "users_tagged_in_comments": (35.0, 18.0),
    "tagged_in_comments_count": (30.0, 15.0),
    "pages_tagged_in_comments": (3.0, 5.0),
}


@dataclass(frozen=True)
class SynthConfig:
    n_benign: int = 200
    n_sybil: int = 200
    intra_edge_prob: float = 0.05
    attack_edges: int = 20
    label_fraction: float = 0.2
    mutual_friend_scale: int = 20
    # Squared coefficient of variation added on top of Poisson noise.
    feature_noise: float = 2.0
    rng_seed: int = 42

    def __post_init__(self) -> None:
        for name in ("n_benign", "n_sybil", "mutual_friend_scale"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"synth.{name} must be a positive integer")
        if not 0 < self.intra_edge_prob <= 1:
            raise ConfigError("synth.intra_edge_prob must lie in (0, 1]")
        if int(self.attack_edges) != self.attack_edges or self.attack_edges < 0:
            raise ConfigError("synth.attack_edges must be a nonnegative integer")
        if self.attack_edges > self.n_benign * self.n_sybil:
            raise ConfigError(
                f"synth.attack_edges={self.attack_edges} exceeds "
                f"n_benign * n_sybil = {self.n_benign * self.n_sybil}"
            )
        if not 0 < self.label_fraction <= 1:
            raise ConfigError("synth.label_fraction must lie in (0, 1]")
        if not (self.feature_noise >= 0 and math.isfinite(self.feature_noise)):
            raise ConfigError("synth.feature_noise must be a finite number >= 0")


@dataclass(frozen=True)
class Dataset:
    accounts: list[AccountRecord]
    edges: list[EdgeObservation]
    labels: dict[str, str]
    ground_truth: dict[str, str]

    def __iter__(self):
        return iter((self.accounts, self.edges, self.labels, self.ground_truth))


def _node_ids(prefix: str, n: int, width: int) -> list[str]:
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


def _er_region(ids: list[str], p: float, scale: int, rng: np.random.Generator):
    edges = []
    low = max(1, scale // 2)
    for i in range(len(ids) - 1):
        hit = np.flatnonzero(rng.random(len(ids) - i - 1) < p) + i + 1
        counts = rng.integers(low, scale + 1, size=len(hit))
        edges.extend(EdgeObservation(ids[i], ids[j], int(c)) for j, c in zip(hit, counts))
    return edges


def _counts(mean: float, noise: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Gamma-Poisson (negative binomial) counts with E = mean, Var = mean + noise * mean^2."""
    if noise == 0:
        return rng.poisson(mean, size)
    shape = 1.0 / noise
    return rng.poisson(rng.gamma(shape, mean / shape, size))


def generate(config: SynthConfig = SynthConfig()) -> Dataset:
    rng = np.random.default_rng(config.rng_seed)
    width = len(str(max(config.n_benign, config.n_sybil) - 1))
    benign = _node_ids("b", config.n_benign, width)
    sybil = _node_ids("s", config.n_sybil, width)

    edges = _er_region(benign, config.intra_edge_prob, config.mutual_friend_scale, rng)
    edges += _er_region(sybil, config.intra_edge_prob, config.mutual_friend_scale, rng)
    flat = rng.choice(config.n_benign * config.n_sybil, size=config.attack_edges, replace=False)
    for k in np.sort(flat):
        i, j = divmod(int(k), config.n_sybil)
        edges.append(EdgeObservation(benign[i], sybil[j], int(rng.integers(0, 2))))

    ground_truth = {u: BENIGN for u in benign}
    ground_truth.update({u: SYBIL for u in sybil})
    labels: dict[str, str] = {}
    for ids, lab in ((benign, BENIGN), (sybil, SYBIL)):
        k = max(1, round(config.label_fraction * len(ids)))
        for idx in np.sort(rng.choice(len(ids), size=k, replace=False)):
            labels[ids[idx]] = lab

    columns = {}
    for cls, ids in ((0, benign), (1, sybil)):
        columns[cls] = {
            name: _counts(FEATURE_MEANS[name][cls], config.feature_noise, len(ids), rng)
            for name in FEATURE_NAMES
        }
    accounts = []
    for cls, ids in ((0, benign), (1, sybil)):
        for r, u in enumerate(ids):
            counts = {name: int(columns[cls][name][r]) for name in FEATURE_NAMES}
            accounts.append(AccountRecord(u, counts, labels.get(u, UNKNOWN)))
    return Dataset(accounts, edges, labels, ground_truth)
