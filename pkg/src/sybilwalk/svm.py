"""Linear soft-margin SVM and the sigmoid Sybil-probability score.

Label convention: sybil is raw label -1, benign is +1, and the trained
hyperplane satisfies ``Y_i * (c @ X_i - b) >= 1`` for well-classified points.
Benign accounts therefore get positive decision values, and the Sybil
probability is the sigmoid of the *oriented* value ``orientation * z`` with
``orientation = -1``. The orientation is stored with the model.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from sybilwalk.errors import (
    ConfigError,
    DegenerateLabelsError,
    MalformedDataError,
    ModelFormatError,
)
from sybilwalk.features import (
    BENIGN,
    N_FEATURES,
    SYBIL,
    FeatureVector,
    NormalizationStats,
    as_matrix,
    normalize_matrix,
)

log = logging.getLogger(__name__)

MODEL_VERSION = 1
RAW_LABEL = {SYBIL: -1, BENIGN: 1}
# Larger oriented values mean more Sybil-like.
DEFAULT_ORIENTATION = -1
# Largest |z| fed to exp(); S(709) already rounds to 1.0 in double precision.
_EXP_CLAMP = 700.0
_TAU = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    max_epochs: int = 200
    tolerance: float = 1e-4
    rng_seed: int = 0
    # Per-class multipliers on C; None means no reweighting.
    class_cost: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        if not (self.C > 0 and math.isfinite(self.C)):
            raise ConfigError("train.C must be a positive finite number")
        if int(self.max_epochs) != self.max_epochs or self.max_epochs < 1:
            raise ConfigError("train.max_epochs must be a positive integer")
        if not self.tolerance > 0:
            raise ConfigError("train.tolerance must be positive")
        if self.class_cost is not None:
            for key, value in self.class_cost.items():
                if key not in RAW_LABEL or not value > 0:
                    raise ConfigError(f"bad class cost {key!r}: {value!r}")


@dataclass(frozen=True)
class LinearModel:
    weights: tuple[float, ...]
    bias: float
    normalization: NormalizationStats = field(default_factory=NormalizationStats.identity)
    label_convention: Mapping[str, int] = field(
        default_factory=lambda: {"sybil": -1, "benign": 1, "orientation": DEFAULT_ORIENTATION}
    )

    def __post_init__(self) -> None:
        if len(self.weights) != N_FEATURES:
            raise ModelFormatError(f"expected {N_FEATURES} weights, got {len(self.weights)}")
        if not all(math.isfinite(w) for w in self.weights) or not math.isfinite(self.bias):
            raise ModelFormatError("model weights and bias must be finite")
        conv = self.label_convention
        if set(conv) != {"sybil", "benign", "orientation"}:
            raise ModelFormatError(f"bad label_convention {dict(conv)!r}")
        if conv["orientation"] not in (-1, 1) or {conv["sybil"], conv["benign"]} != {-1, 1}:
            raise ModelFormatError(f"bad label_convention {dict(conv)!r}")

    @property
    def orientation(self) -> int:
        return int(self.label_convention["orientation"])

    def decision_values(self, X_normalized: np.ndarray) -> np.ndarray:
        return np.asarray(X_normalized, dtype=float) @ np.asarray(self.weights) - self.bias

    def sybil_probabilities(self, X_raw: np.ndarray) -> np.ndarray:
        """Normalize raw feature rows with the stored stats, then score them."""
        z = self.decision_values(normalize_matrix(X_raw, self.normalization))
        return sigmoid(self.orientation * z)


def sigmoid(z):
    """1/(1+e^{-z}) with the exponent clamped so extreme inputs never overflow."""
    z = np.clip(np.asarray(z, dtype=float), -_EXP_CLAMP, _EXP_CLAMP)
    out = 1.0 / (1.0 + np.exp(-z))
    return float(out) if out.ndim == 0 else out


def _vector(vector: FeatureVector | Sequence[float]) -> np.ndarray:
    if isinstance(vector, FeatureVector):
        return vector.as_array()
    return np.asarray(vector, dtype=float)


def decision_value(model: LinearModel, vector: FeatureVector | Sequence[float]) -> float:
    """z = c.x - b for an already normalized vector."""
    return float(np.dot(np.asarray(model.weights), _vector(vector)) - model.bias)


def sybil_probability(model: LinearModel, vector: FeatureVector | Sequence[float]) -> float:
    return sigmoid(model.orientation * decision_value(model, vector))


def hinge_objective(weights, bias: float, X: np.ndarray, y: np.ndarray, C) -> float:
    """(1/2)|c|^2 + sum_i C_i max(0, 1 - y_i (c.x_i - b))."""
    w = np.asarray(weights, dtype=float)
    margins = y * (X @ w - bias)
    return float(0.5 * w @ w + np.sum(C * np.maximum(0.0, 1.0 - margins)))


def _smo(X: np.ndarray, y: np.ndarray, C: np.ndarray, tol: float, max_iter: int):
    """Dual SMO with second-order working-set selection, linear kernel.

    Solves min_a 1/2 a'Qa - e'a, y'a = 0, 0 <= a_i <= C_i with
    Q_ij = y_i y_j x_i.x_j, keeping c = sum_i a_i y_i x_i explicitly.
    Returns (c, b, iterations, converged).
    """
    n = X.shape[0]
    alpha = np.zeros(n)
    w = np.zeros(X.shape[1])
    diag = np.einsum("ij,ij->i", X, X)
    grad = -np.ones(n)
    pos = y > 0
    it = 0
    converged = False
    while it < max_iter:
        v = -y * grad
        up = np.where(pos, alpha < C, alpha > 0)
        low = np.where(pos, alpha > 0, alpha < C)
        if not up.any() or not low.any():
            converged = True
            break
        up_idx = np.flatnonzero(up)
        i = up_idx[np.argmax(v[up_idx])]
        v_max = v[i]
        if v_max - v[low].min() < tol:
            converged = True
            break
        cand = np.flatnonzero(low & (v < v_max))
        k_it = X[cand] @ X[i]
        a = diag[i] + diag[cand] - 2.0 * k_it
        a = np.where(a > 0, a, _TAU)
        b = v_max - v[cand]
        j = cand[np.argmin(-(b * b) / a)]

        ai_old, aj_old = alpha[i], alpha[j]
        Ci, Cj = C[i], C[j]
        kij = X[i] @ X[j]
        if y[i] != y[j]:
            quad = max(diag[i] + diag[j] - 2.0 * kij, _TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > Ci - Cj:
                if ai > Ci:
                    ai, aj = Ci, Ci - diff
            elif aj > Cj:
                aj, ai = Cj, Cj + diff
        else:
            quad = max(diag[i] + diag[j] - 2.0 * kij, _TAU)
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > Ci:
                if ai > Ci:
                    ai, aj = Ci, total - Ci
            elif aj < 0:
                aj, ai = 0.0, total
            if total > Cj:
                if aj > Cj:
                    aj, ai = Cj, total - Cj
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        w += (ai - ai_old) * y[i] * X[i] + (aj - aj_old) * y[j] * X[j]
        grad = y * (X @ w) - 1.0
        it += 1

    # Offset from the KKT conditions: average over free vectors, else midpoint.
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yg[free].mean())
    else:
        at_upper = alpha >= C
        ub_mask = np.where(pos, ~at_upper, at_upper)
        lb_mask = ~ub_mask
        ub = yg[ub_mask].min() if ub_mask.any() else math.inf
        lb = yg[lb_mask].max() if lb_mask.any() else -math.inf
        rho = float((ub + lb) / 2) if math.isfinite(ub) and math.isfinite(lb) else 0.0
    return w, rho, it, converged


def train(
    vectors: Sequence[FeatureVector] | np.ndarray,
    labels: Sequence[str],
    config: TrainConfig = TrainConfig(),
    normalization: NormalizationStats | None = None,
) -> LinearModel:
    """Fit the soft-margin hyperplane on normalized vectors.

    ``normalization`` is only recorded in the returned model so that raw
    vectors can be scored later; the inputs here must already be normalized.
    """
    X = np.asarray(vectors, dtype=float) if isinstance(vectors, np.ndarray) else as_matrix(vectors)
    if X.ndim != 2 or X.shape[1] != N_FEATURES:
        raise MalformedDataError(f"training matrix must have {N_FEATURES} columns")
    if len(labels) != X.shape[0]:
        raise MalformedDataError("labels must align with vectors")
    if not np.all(np.isfinite(X)):
        raise MalformedDataError("non-finite value in training data")
    try:
        y = np.array([RAW_LABEL[lab] for lab in labels], dtype=float)
    except KeyError as exc:
        raise MalformedDataError(f"training label must be benign or sybil, got {exc}") from None
    if len(np.unique(y)) < 2:
        raise DegenerateLabelsError("training needs both benign and sybil samples")

    cost = np.full(len(y), float(config.C))
    if config.class_cost:
        for name, mult in config.class_cost.items():
            cost[y == RAW_LABEL[name]] *= mult

    w, b, iters, converged = _smo(X, y, cost, config.tolerance, config.max_epochs * len(y))
    if not converged:
        log.warning("SVM solver stopped at %d iterations before reaching tolerance", iters)
    log.debug("SVM trained in %d iterations", iters)
    return LinearModel(
        tuple(float(v) for v in w),
        float(b),
        normalization or NormalizationStats.identity(),
    )


def save_model(model: LinearModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model))


def model_to_json(model: LinearModel) -> str:
    doc = {
        "version": MODEL_VERSION,
        "weights": list(model.weights),
        "bias": model.bias,
        "means": list(model.normalization.means),
        "stds": list(model.normalization.stds),
        "label_convention": dict(model.label_convention),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_model(path: str | Path) -> LinearModel:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    return model_from_json(text)


def model_from_json(text: str) -> LinearModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"corrupt model file: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must hold a JSON object")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    missing = {"weights", "bias", "means", "stds", "label_convention"} - set(doc)
    if missing:
        raise ModelFormatError(f"model file missing {sorted(missing)}")
    try:
        weights = tuple(float(v) for v in doc["weights"])
        stats = NormalizationStats(
            tuple(float(v) for v in doc["means"]), tuple(float(v) for v in doc["stds"])
        )
        conv = {str(k): int(v) for k, v in dict(doc["label_convention"]).items()}
        return LinearModel(weights, float(doc["bias"]), stats, conv)
    except ModelFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc
