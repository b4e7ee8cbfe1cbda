"""Cross-validation harness and per-class precision/recall/F1."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from sybilwalk.errors import ConfigError, DegenerateLabelsError, NoDataError
from sybilwalk.features import (
    BENIGN,
    SYBIL,
    as_matrix,
    extract_features,
    fit_normalization,
    normalize_matrix,
)
from sybilwalk.graph import build_graph
from sybilwalk.propagation import WalkConfig, initialize_scores, sybilwalk
from sybilwalk.svm import TrainConfig, train
from sybilwalk.synthgen import Dataset

FAKE = "fake"
REAL = "real"
VARIANTS = ("svm_only", "hybrid", "uniform_prior_hybrid")
DEFAULT_THRESHOLD = 0.5
_CANONICAL = {FAKE: FAKE, SYBIL: FAKE, REAL: REAL, BENIGN: REAL}


def kfold_split(
    ids: Sequence[str],
    k: int,
    rng_seed: int = 0,
    labels: Mapping[str, str] | None = None,
) -> list[list[str]]:
    """Partition ``ids`` into ``k`` folds whose sizes differ by at most one.

    With ``labels`` the split is stratified: each class is shuffled on its own
    and the classes are dealt round-robin one after another.
    """
    ids = sorted(set(ids))
    if int(k) != k or k < 1:
        raise ConfigError("k must be a positive integer")
    if k > len(ids):
        raise ConfigError(f"k={k} exceeds the number of ids ({len(ids)})")
    rng = np.random.default_rng(rng_seed)
    if labels is None:
        order = [ids[i] for i in rng.permutation(len(ids))]
    else:
        order = []
        for cls in sorted({labels[u] for u in ids}):
            members = [u for u in ids if labels[u] == cls]
            order += [members[i] for i in rng.permutation(len(members))]
    folds: list[list[str]] = [[] for _ in range(k)]
    for t, u in enumerate(order):
        folds[t % k].append(u)
    return [sorted(f) for f in folds]


def score_to_label(score: float, threshold: float = DEFAULT_THRESHOLD) -> str:
    return FAKE if score >= threshold else REAL


@dataclass(frozen=True)
class Confusion:
    """Counts with the fake class as positive."""

    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def metrics(self) -> dict[str, dict[str, float]]:
        return {
            FAKE: _prf(self.tp, self.fp, self.fn),
            REAL: _prf(self.tn, self.fn, self.fp),
        }


def _ratio(a: int, b: int) -> float:
    return a / b if b > 0 else 0.0


def _prf(tp: int, fp: int, fn: int) -> dict[str, float]:
    # Undefined ratios (empty denominators) are reported as 0.
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return {"precision": p, "recall": r, "f1": f1}


@dataclass
class EvalReport:
    confusion: Confusion
    threshold: float = DEFAULT_THRESHOLD
    variant: str = ""
    folds: list[Confusion] = field(default_factory=list)
    scores: dict[str, float] = field(default_factory=dict)
    iterations: list[int] = field(default_factory=list)

    @property
    def metrics(self) -> dict[str, dict[str, float]]:
        return self.confusion.metrics()

    def f1(self, cls: str = FAKE) -> float:
        return self.metrics[cls]["f1"]

    def fold_mean(self) -> dict[str, dict[str, float]]:
        per = [c.metrics() for c in self.folds]
        return {
            cls: {m: float(np.mean([f[cls][m] for f in per])) for m in ("precision", "recall", "f1")}
            for cls in (FAKE, REAL)
        } if per else {}

    def best_fold(self) -> int | None:
        """Index of the fold with the highest fake-class F1 (first on ties)."""
        if not self.folds:
            return None
        return int(np.argmax([c.metrics()[FAKE]["f1"] for c in self.folds]))

    def to_dict(self) -> dict:
        best = self.best_fold()
        return {
            "variant": self.variant,
            "threshold": self.threshold,
            "pooled": {"confusion": vars(self.confusion), "metrics": self.metrics},
            "fold_mean": self.fold_mean(),
            "best_fold": None
            if best is None
            else {"index": best, "metrics": self.folds[best].metrics()},
            "folds": [{"confusion": vars(c), "metrics": c.metrics()} for c in self.folds],
            "iterations": self.iterations,
        }


def evaluate(
    predicted: Mapping[str, str],
    truth: Mapping[str, str],
    threshold: float = DEFAULT_THRESHOLD,
) -> EvalReport:
    """Confusion counts and per-class metrics over ids present in both maps.

    Labels may be given as fake/real or sybil/benign.
    """
    common = sorted(set(predicted) & set(truth))
    if not common:
        raise NoDataError("no ids in common between predictions and ground truth")
    tp = fp = tn = fn = 0
    for u in common:
        pred, true = _CANONICAL[predicted[u]], _CANONICAL[truth[u]]
        if pred == FAKE:
            tp += true == FAKE
            fp += true == REAL
        else:
            fn += true == FAKE
            tn += true == REAL
    return EvalReport(Confusion(tp, fp, tn, fn), threshold)


def run_experiment(
    dataset: Dataset,
    variant: str,
    k: int = 5,
    seed: int = 0,
    *,
    train_config: TrainConfig = TrainConfig(),
    walk_config: WalkConfig = WalkConfig(),
    threshold: float = DEFAULT_THRESHOLD,
    strict_weights: bool = False,
) -> EvalReport:
    """k-fold experiment over the ground-truth ids for one pipeline variant.

    Per fold the SVM is fit on the *labeled* ids outside the held-out fold.
    The hybrid variants run SybilWalk on a graph whose label edges come from
    the same training labels, so held-out ids are unlabeled there but seeded
    with the fold model's prior (or 0.5 for ``uniform_prior_hybrid``).
    """
    if variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}, got {variant!r}")
    vectors = [extract_features(r) for r in dataset.accounts]
    account_ids = [v.account_id for v in vectors]
    row = {u: i for i, u in enumerate(account_ids)}
    X_raw = as_matrix(vectors)
    eval_ids = sorted(u for u in dataset.ground_truth if u in row)
    if not eval_ids:
        raise NoDataError("no ground-truth ids have account records")
    folds = kfold_split(eval_ids, k, seed, labels=dataset.ground_truth)

    base_graph = None
    if variant != "svm_only":
        base_graph = build_graph(dataset.edges, {}, nodes=account_ids, strict=strict_weights)
    mode = "uniform" if variant == "uniform_prior_hybrid" else "svm"

    total = Confusion()
    per_fold: list[Confusion] = []
    scores: dict[str, float] = {}
    iterations: list[int] = []
    for held in folds:
        held_set = set(held)
        train_ids = sorted(u for u in dataset.labels if u in row and u not in held_set)
        train_labels = [dataset.labels[u] for u in train_ids]
        if len(set(train_labels)) < 2:
            raise DegenerateLabelsError("a training split lacks one of the classes")
        X_train = X_raw[[row[u] for u in train_ids]]
        stats = fit_normalization([vectors[row[u]] for u in train_ids])
        model = train(normalize_matrix(X_train, stats), train_labels, train_config, stats)
        priors = dict(zip(account_ids, model.sybil_probabilities(X_raw).tolist()))

        if base_graph is None:
            fold_scores = {u: priors[u] for u in held}
        else:
            graph = base_graph.with_labels({u: dataset.labels[u] for u in train_ids})
            init = initialize_scores(graph, priors, mode)
            result = sybilwalk(graph, init, walk_config)
            iterations.append(result.iteration_count)
            walked = result.as_dict()
            fold_scores = {u: walked[u] for u in held}
        scores.update(fold_scores)
        preds = {u: score_to_label(s, threshold) for u, s in fold_scores.items()}
        conf = evaluate(preds, {u: dataset.ground_truth[u] for u in held}, threshold).confusion
        per_fold.append(conf)
        total = total + conf
    return EvalReport(total, threshold, variant, per_fold, scores, iterations)


def format_table(report: EvalReport, title: str | None = None) -> str:
    """Aligned text table with Precision/Recall/F1 rows and one column per class."""
    m = report.metrics
    lines = []
    if title:
        lines.append(title)
    lines.append(f"{'':<10}{'Fake accounts':>15}{'Real accounts':>15}")
    for name in ("precision", "recall", "f1"):
        label = "F1" if name == "f1" else name.capitalize()
        lines.append(f"{label:<10}{m[FAKE][name]:>15.2f}{m[REAL][name]:>15.2f}")
    return "\n".join(lines)


def reports_to_json(reports: Mapping[str, EvalReport]) -> str:
    return json.dumps({name: r.to_dict() for name, r in reports.items()}, indent=2, sort_keys=True) + "\n"
