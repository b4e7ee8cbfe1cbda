"""SybilWalk score propagation and its two independent oracles.

Score of a user is the probability that a weighted random walk started there
hits the Sybil label node before the benign one. :func:`sybilwalk` reaches it
by synchronous neighbour averaging from a prior; :func:`exact_hitting_probabilities`
solves the absorbing-chain linear system directly; :func:`monte_carlo_scores`
simulates the walks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from sybilwalk.errors import (
    ConfigError,
    CoverageError,
    MalformedPriorError,
    NonabsorbingWalkError,
    UnreachableNodeError,
)
from sybilwalk.graph import (
    LABEL_BENIGN_NODE,
    LABEL_SYBIL_NODE,
    LabeledSocialGraph,
    label_reachable_mask,
)

log = logging.getLogger(__name__)

SEED_MODES = ("svm", "uniform")
OK = "ok"
UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class WalkConfig:
    epsilon: float = 1e-8
    max_iterations: int = 1000
    seed_mode: str = "svm"
    # "absolute" compares the raw squared residual to epsilon; "per_node"
    # divides it by the number of user nodes first.
    residual_scale: str = "absolute"

    def __post_init__(self) -> None:
        if not (self.epsilon > 0):
            raise ConfigError("walk.epsilon must be positive")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ConfigError("walk.max_iterations must be a positive integer")
        if self.seed_mode not in SEED_MODES:
            raise ConfigError(f"walk.seed_mode must be one of {SEED_MODES}")
        if self.residual_scale not in ("absolute", "per_node"):
            raise ConfigError("walk.residual_scale must be 'absolute' or 'per_node'")


@dataclass(frozen=True)
class ScoreVector:
    """Per-user Sybil scores; label nodes are implicitly fixed at 0 and 1."""

    users: tuple[str, ...]
    scores: np.ndarray
    reachable: np.ndarray
    iteration_count: int = 0
    final_residual: float = 0.0

    def __post_init__(self) -> None:
        if self.scores.shape != (len(self.users),) or self.reachable.shape != self.scores.shape:
            raise ValueError("scores and reachable mask must align with users")
        if len(self.scores) and (self.scores.min() < 0.0 or self.scores.max() > 1.0):
            raise MalformedPriorError("scores must lie in [0, 1]")

    def __getitem__(self, node: str) -> float:
        if node == LABEL_BENIGN_NODE:
            return 0.0
        if node == LABEL_SYBIL_NODE:
            return 1.0
        return float(self.scores[self.users.index(node)])

    def __len__(self) -> int:
        return len(self.users)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.users, self.scores.tolist()))

    def flag(self, i: int) -> str:
        return OK if self.reachable[i] else UNREACHABLE

    @property
    def flags(self) -> dict[str, str]:
        return {u: self.flag(i) for i, u in enumerate(self.users)}


def initialize_scores(
    graph: LabeledSocialGraph,
    priors: Mapping[str, float] | None = None,
    mode: str = "svm",
) -> ScoreVector:
    """Initial scores: the SVM priors in ``svm`` mode, 0.5 everywhere in ``uniform`` mode."""
    if mode not in SEED_MODES:
        raise ConfigError(f"seed mode must be one of {SEED_MODES}, got {mode!r}")
    n = graph.n_users
    if mode == "uniform":
        p = np.full(n, 0.5)
    else:
        priors = priors or {}
        missing = [u for u in graph.users if u not in priors]
        if missing:
            raise CoverageError(
                f"{len(missing)} user node(s) lack a prior, e.g. {sorted(missing)[:5]}"
            )
        p = np.array([float(priors[u]) for u in graph.users])
        bad = ~((p >= 0.0) & (p <= 1.0))
        if bad.any():
            u = graph.users[int(np.flatnonzero(bad)[0])]
            raise MalformedPriorError(f"prior for {u!r} is {priors[u]!r}, outside [0, 1]")
    return ScoreVector(graph.users, p, label_reachable_mask(graph))


def _walk_operator(graph: LabeledSocialGraph, active: np.ndarray):
    """Row-normalized user block and the per-user one-step probability of hitting l_s."""
    n = graph.n_users
    deg = graph.degree_weights[:n]
    inv = np.zeros(n)
    inv[active] = 1.0 / deg[active]
    W = graph.W
    P_uu = W[:n, :n].multiply(inv[:, None]).tocsr()
    to_sybil = np.asarray(W[:n, graph.ls].todense()).ravel() * inv
    return P_uu, to_sybil


def sybilwalk(
    graph: LabeledSocialGraph,
    init: ScoreVector,
    config: WalkConfig = WalkConfig(),
    on_iteration: Callable[[int, np.ndarray, float], None] | None = None,
) -> ScoreVector:
    """Synchronous neighbour-averaging iteration toward the hitting probabilities.

    Each sweep sets p_u <- sum_v (w_uv / d_u) p_v using the previous sweep's
    scores, with p(l_b) = 0 and p(l_s) = 1 held fixed. Users with no edges, or
    whose component has no labeled user, keep their initial score. Stops when
    sum_u (p_u^(t) - p_u^(t-1))^2 < epsilon or after ``max_iterations`` sweeps.
    ``on_iteration(t, scores, residual)`` is called after every sweep.
    """
    if init.users != graph.users:
        raise CoverageError("initial scores do not match the graph's user nodes")
    n = graph.n_users
    active = init.reachable & (graph.degree_weights[:n] > 0)
    P_uu, to_sybil = _walk_operator(graph, active)
    scale = max(n, 1) if config.residual_scale == "per_node" else 1

    p = init.scores.astype(float).copy()
    frozen = ~active
    t = 0
    residual = math.inf
    while t < config.max_iterations:
        new = P_uu @ p + to_sybil
        new[frozen] = p[frozen]
        np.clip(new, 0.0, 1.0, out=new)
        diff = new - p
        residual = float(diff @ diff)
        p = new
        t += 1
        if on_iteration is not None:
            on_iteration(t, p.copy(), residual)
        if residual / scale < config.epsilon:
            break
    log.debug("sybilwalk stopped after %d sweeps, residual %.3g", t, residual)
    return ScoreVector(graph.users, p, init.reachable.copy(), t, residual)


def exact_hitting_probabilities(graph: LabeledSocialGraph, *, strict: bool = True) -> ScoreVector:
    """Dense direct solve of the absorbing-chain hitting probabilities.

    Solves (D - W_uu) p = w_{u, l_s} on label-reachable users. Meant for test-size
    graphs. With ``strict=False`` unreachable users get 0.5 and are flagged
    instead of raising.
    """
    n = graph.n_users
    reach = label_reachable_mask(graph)
    if strict and not reach.all():
        bad = [graph.users[i] for i in np.flatnonzero(~reach)]
        raise UnreachableNodeError(
            f"{len(bad)} user node(s) cannot reach a label node, e.g. {bad[:5]}"
        )
    idx = np.flatnonzero(reach)
    p = np.full(n, 0.5)
    if len(idx):
        W = graph.W
        A = -W[idx][:, idx].toarray()
        A[np.diag_indices_from(A)] += graph.degree_weights[idx]
        rhs = np.asarray(W[idx, graph.ls].todense()).ravel()
        p[idx] = np.clip(np.linalg.solve(A, rhs), 0.0, 1.0)
    return ScoreVector(graph.users, p, reach)


def _alias_tables(graph: LabeledSocialGraph):
    """Walker alias tables per CSR row, for O(1) weighted neighbour draws.

    Slot ``k`` of row ``r`` keeps its own neighbour with probability
    ``accept[k]`` and otherwise jumps to slot ``alias[k]`` (a global CSR index).
    """
    W = graph.W
    indptr = W.indptr.astype(np.int64)
    accept = np.ones(len(W.data))
    alias = np.arange(len(W.data), dtype=np.int64)
    for r in range(W.shape[0]):
        lo, hi = indptr[r], indptr[r + 1]
        d = hi - lo
        if d == 0 or W.data[lo:hi].sum() <= 0:
            continue
        q = W.data[lo:hi] * (d / W.data[lo:hi].sum())
        small = [k for k in range(d) if q[k] < 1.0]
        large = [k for k in range(d) if q[k] >= 1.0]
        while small and large:
            s, g = small.pop(), large.pop()
            accept[lo + s] = q[s]
            alias[lo + s] = lo + g
            q[g] -= 1.0 - q[s]
            (small if q[g] < 1.0 else large).append(g)
        for k in small + large:
            accept[lo + k] = 1.0
    return indptr, W.indices.astype(np.int64), accept, alias


def monte_carlo_scores(
    graph: LabeledSocialGraph,
    walks_per_node: int,
    rng_seed: int = 0,
    *,
    max_steps: int = 10**6,
    chunk_size: int = 200_000,
) -> ScoreVector:
    """Fraction of simulated weighted walks from each user absorbed at l_s.

    Walks from user ``i`` draw from a generator seeded by ``(rng_seed, i)``, so
    each node's estimate does not depend on the others.
    """
    if walks_per_node < 1:
        raise ConfigError("walks_per_node must be positive")
    n = graph.n_users
    reach = label_reachable_mask(graph)
    if not reach.all():
        bad = [graph.users[i] for i in np.flatnonzero(~reach)]
        raise UnreachableNodeError(
            f"{len(bad)} user node(s) cannot reach a label node, e.g. {bad[:5]}"
        )
    indptr, indices, accept, alias = _alias_tables(graph)
    n_slots = np.diff(indptr)
    lb, ls = graph.lb, graph.ls

    def step(pos: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        x = rng.random(len(pos)) * n_slots[pos]
        slot = x.astype(np.int64)
        frac = x - slot
        k = indptr[pos] + slot
        return np.where(frac < accept[k], indices[k], indices[alias[k]])

    scores = np.empty(n)
    for i in range(n):
        rng = np.random.default_rng([rng_seed, i])
        hits = 0
        remaining = walks_per_node
        while remaining:
            m = min(remaining, chunk_size)
            remaining -= m
            pos = np.full(m, i, dtype=np.int64)
            steps = 0
            while len(pos):
                if steps >= max_steps:
                    raise NonabsorbingWalkError(
                        f"walk from {graph.users[i]!r} exceeded {max_steps} steps"
                    )
                pos = step(pos, rng)
                steps += 1
                hits += int(np.count_nonzero(pos == ls))
                pos = pos[(pos != ls) & (pos != lb)]
        scores[i] = hits / walks_per_node
    return ScoreVector(graph.users, scores, reach)
