"""Account records, the 18-feature vector, z-score normalization and entropy ranking.

Feature index map (fixed, portable across models)::

     0 active_days                  9 comments_received
     1 friend_count                10 shares_received
     2 group_count                 11 tags_in_own_posts
     3 post_count                  12 users_tagged_in_posts
     4 wall_post_count             13 pages_tagged_in_posts
     5 tagged_in_post_count        14 shared_post_count
     6 reaction_count              15 users_tagged_in_comments
     7 comment_count               16 tagged_in_comments_count
     8 likes_received              17 pages_tagged_in_comments
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from sybilwalk.errors import (
    DegenerateLabelsError,
    EmptyDatasetError,
    MalformedDataError,
    MalformedRecordError,
)

BENIGN = "benign"
SYBIL = "sybil"
UNKNOWN = "unknown"
LABELS = (BENIGN, SYBIL, UNKNOWN)

FEATURE_NAMES = (
    "active_days",
    "friend_count",
    "group_count",
    "post_count",
    "wall_post_count",
    "tagged_in_post_count",
    "reaction_count",
    "comment_count",
    "likes_received",
    "comments_received",
    "shares_received",
    "tags_in_own_posts",
    "users_tagged_in_posts",
    "pages_tagged_in_posts",
    "shared_post_count",
    "users_tagged_in_comments",
    "tagged_in_comments_count",
    "pages_tagged_in_comments",
)
N_FEATURES = len(FEATURE_NAMES)


@dataclass(frozen=True)
class AccountRecord:
    """Raw activity counts for one account. ``None`` means hidden/missing."""

    account_id: str
    counts: Mapping[str, float | None] = field(default_factory=dict)
    label: str = UNKNOWN

    def __post_init__(self) -> None:
        if not isinstance(self.account_id, str) or not self.account_id:
            raise MalformedRecordError("account_id must be a nonempty string")
        if self.label not in LABELS:
            raise MalformedRecordError(
                f"{self.account_id}: label must be one of {LABELS}, got {self.label!r}"
            )
        for name, value in self.counts.items():
            if name not in FEATURE_NAMES:
                raise MalformedRecordError(f"{self.account_id}: unknown field {name!r}")
            if value is None:
                continue
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise MalformedRecordError(
                    f"{self.account_id}: field {name!r} must be numeric, got {value!r}"
                )
            if not math.isfinite(value) or value < 0:
                raise MalformedRecordError(
                    f"{self.account_id}: field {name!r} must be a finite count >= 0"
                )

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "AccountRecord":
        if not isinstance(obj, Mapping):
            raise MalformedRecordError("record must be a JSON object")
        extra = set(obj) - set(FEATURE_NAMES) - {"account_id", "label"}
        if extra:
            raise MalformedRecordError(f"unknown field(s): {', '.join(sorted(extra))}")
        account_id = obj.get("account_id")
        if not isinstance(account_id, str) or not account_id:
            raise MalformedRecordError("missing or empty account_id")
        counts = {name: obj[name] for name in FEATURE_NAMES if name in obj}
        return cls(account_id, counts, obj.get("label", UNKNOWN))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"account_id": self.account_id}
        for name in FEATURE_NAMES:
            if self.counts.get(name) is not None:
                out[name] = self.counts[name]
        out["label"] = self.label
        return out


@dataclass(frozen=True)
class FeatureVector:
    account_id: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != N_FEATURES:
            raise MalformedDataError(
                f"{self.account_id}: expected {N_FEATURES} features, got {len(self.values)}"
            )
        if not all(math.isfinite(v) for v in self.values):
            raise MalformedDataError(f"{self.account_id}: non-finite feature value")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class NormalizationStats:
    means: tuple[float, ...]
    stds: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.means) != N_FEATURES or len(self.stds) != N_FEATURES:
            raise MalformedDataError(f"normalization needs {N_FEATURES} (mean, std) pairs")
        if not all(math.isfinite(m) for m in self.means):
            raise MalformedDataError("non-finite normalization mean")
        if not all(math.isfinite(s) and s > 0 for s in self.stds):
            raise MalformedDataError("normalization stds must be finite and > 0")

    @classmethod
    def identity(cls) -> "NormalizationStats":
        return cls((0.0,) * N_FEATURES, (1.0,) * N_FEATURES)


def extract_features(record: AccountRecord) -> FeatureVector:
    """Map a record to its 18-vector in index-map order; missing counts become 0."""
    if not record.account_id:
        raise MalformedRecordError("empty account_id")
    values = []
    for name in FEATURE_NAMES:
        v = record.counts.get(name)
        values.append(0.0 if v is None else float(v))
    return FeatureVector(record.account_id, tuple(values))


def as_matrix(vectors: Sequence[FeatureVector]) -> np.ndarray:
    if not vectors:
        return np.zeros((0, N_FEATURES))
    return np.array([v.values for v in vectors], dtype=float)


def fit_normalization(vectors: Sequence[FeatureVector]) -> NormalizationStats:
    """Per-feature mean and population std; zero-variance features get std 1."""
    if len(vectors) == 0:
        raise EmptyDatasetError("cannot fit normalization on an empty dataset")
    X = as_matrix(vectors)
    means = X.mean(axis=0)
    stds = np.sqrt(((X - means) ** 2).mean(axis=0))
    stds[stds == 0.0] = 1.0
    return NormalizationStats(tuple(means.tolist()), tuple(stds.tolist()))


def normalize(vector: FeatureVector, stats: NormalizationStats) -> FeatureVector:
    x = (vector.as_array() - np.asarray(stats.means)) / np.asarray(stats.stds)
    return FeatureVector(vector.account_id, tuple(x.tolist()))


def denormalize(vector: FeatureVector, stats: NormalizationStats) -> FeatureVector:
    x = vector.as_array() * np.asarray(stats.stds) + np.asarray(stats.means)
    return FeatureVector(vector.account_id, tuple(x.tolist()))


def normalize_matrix(X: np.ndarray, stats: NormalizationStats) -> np.ndarray:
    return (np.asarray(X, dtype=float) - np.asarray(stats.means)) / np.asarray(stats.stds)


def _entropy_bits(counts: Iterable[int]) -> float:
    counts = [c for c in counts if c > 0]
    total = sum(counts)
    if total == 0:
        return 0.0
    return -sum((c / total) * math.log2(c / total) for c in counts)


def rank_features_by_entropy(
    vectors: Sequence[FeatureVector], labels: Sequence[str]
) -> list[tuple[int, float]]:
    """Information gain (bits) of the label from a median split of each feature.

    A sample goes to the high side when its value is strictly above the
    feature's median. Returns ``(feature_index, gain)`` sorted by gain
    descending, ties broken by index. Diagnostic only; nothing is dropped.
    """
    if len(vectors) != len(labels):
        raise MalformedDataError("labels must align with vectors")
    if any(lab not in (BENIGN, SYBIL) for lab in labels):
        raise MalformedDataError("entropy ranking needs benign/sybil labels only")
    y = np.array([lab == SYBIL for lab in labels])
    n_sybil = int(y.sum())
    if n_sybil == 0 or n_sybil == len(y):
        raise DegenerateLabelsError("entropy ranking needs both classes")

    X = as_matrix(vectors)
    n = len(y)
    base = _entropy_bits((n_sybil, n - n_sybil))
    gains = []
    for j in range(N_FEATURES):
        high = X[:, j] > np.median(X[:, j])
        cond = 0.0
        for side in (high, ~high):
            m = int(side.sum())
            if m:
                s = int(y[side].sum())
                cond += m / n * _entropy_bits((s, m - s))
        gains.append((j, max(0.0, base - cond)))
    gains.sort(key=lambda item: (-item[1], item[0]))
    return gains
