"""Label-augmented social graph.

User nodes are indexed in sorted id order, followed by the two label nodes:
index ``n`` is the benign label node and ``n + 1`` the Sybil label node.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from sybilwalk.errors import IsolatedNodeError, MalformedEdgeError
from sybilwalk.features import BENIGN, LABELS, SYBIL, UNKNOWN

LABEL_BENIGN_NODE = "<l_b>"
LABEL_SYBIL_NODE = "<l_s>"
LABEL_NODES = (LABEL_BENIGN_NODE, LABEL_SYBIL_NODE)


@dataclass(frozen=True)
class EdgeObservation:
    u: str
    v: str
    mutual_friend_count: int

    def __post_init__(self) -> None:
        if not self.u or not self.v:
            raise MalformedEdgeError("edge endpoints must be nonempty")
        if self.u == self.v:
            raise MalformedEdgeError(f"self-loop on {self.u!r}")
        if self.u in LABEL_NODES or self.v in LABEL_NODES:
            raise MalformedEdgeError("label node ids are reserved")
        if int(self.mutual_friend_count) != self.mutual_friend_count or self.mutual_friend_count < 0:
            raise MalformedEdgeError(
                f"mutual friend count must be an integer >= 0, got {self.mutual_friend_count!r}"
            )


class LabeledSocialGraph:
    """Immutable weighted user graph plus the two label nodes.

    Use :func:`build_graph` rather than calling the constructor directly.
    """

    def __init__(
        self,
        users: Sequence[str],
        user_edges: Mapping[tuple[str, str], float],
        labels: Mapping[str, str],
    ):
        self.users: tuple[str, ...] = tuple(users)
        self.index = {u: i for i, u in enumerate(self.users)}
        self.user_edges = dict(user_edges)
        self.labels = {u: lab for u, lab in labels.items() if lab in (BENIGN, SYBIL)}
        n = len(self.users)
        self.lb = n
        self.ls = n + 1

        rows, cols, data = [], [], []
        for (u, v), w in sorted(self.user_edges.items()):
            i, j = self.index[u], self.index[v]
            rows += [i, j]
            cols += [j, i]
            data += [w, w]
        for u in sorted(self.labels):
            i = self.index[u]
            k = self.lb if self.labels[u] == BENIGN else self.ls
            rows += [i, k]
            cols += [k, i]
            data += [1.0, 1.0]
        W = sp.coo_matrix((data, (rows, cols)), shape=(n + 2, n + 2)).tocsr()
        W.sort_indices()
        self.W = W
        self.degree_weights = np.asarray(W.sum(axis=1)).ravel()
        self.degree_weights.setflags(write=False)

    @property
    def n_users(self) -> int:
        return len(self.users)

    def node_index(self, node: str) -> int:
        if node == LABEL_BENIGN_NODE:
            return self.lb
        if node == LABEL_SYBIL_NODE:
            return self.ls
        try:
            return self.index[node]
        except KeyError:
            raise KeyError(f"unknown node {node!r}") from None

    def node_name(self, idx: int) -> str:
        if idx == self.lb:
            return LABEL_BENIGN_NODE
        if idx == self.ls:
            return LABEL_SYBIL_NODE
        return self.users[idx]

    def adj(self, node: str) -> dict[str, float]:
        """Neighbors of ``node`` with edge weights (label nodes included)."""
        i = self.node_index(node)
        start, end = self.W.indptr[i], self.W.indptr[i + 1]
        return {
            self.node_name(int(j)): float(w)
            for j, w in zip(self.W.indices[start:end], self.W.data[start:end])
        }

    def degree_weight(self, node: str) -> float:
        return float(self.degree_weights[self.node_index(node)])

    def weight(self, u: str, v: str) -> float:
        return float(self.W[self.node_index(u), self.node_index(v)])

    def label_of(self, node: str) -> str:
        return self.labels.get(node, UNKNOWN)

    def with_labels(self, labels: Mapping[str, str]) -> "LabeledSocialGraph":
        """Same user graph, different ground-truth label edges."""
        _check_labels(labels, self.index)
        return LabeledSocialGraph(self.users, self.user_edges, labels)

    def user_adjacency(self) -> sp.csr_matrix:
        n = self.n_users
        return self.W[:n, :n]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledSocialGraph):
            return NotImplemented
        return (
            self.users == other.users
            and self.user_edges == other.user_edges
            and self.labels == other.labels
        )

    def __repr__(self) -> str:
        return (
            f"LabeledSocialGraph(users={self.n_users}, edges={len(self.user_edges)}, "
            f"labeled={len(self.labels)})"
        )


def _check_labels(labels: Mapping[str, str], known: Iterable[str] | None = None) -> None:
    for node, lab in labels.items():
        if lab not in LABELS:
            raise MalformedEdgeError(f"label for {node!r} must be one of {LABELS}, got {lab!r}")
        if node in LABEL_NODES or not node:
            raise MalformedEdgeError(f"invalid node id {node!r}")
    if known is not None:
        known = set(known)
        unknown_nodes = [u for u in labels if u not in known]
        if unknown_nodes:
            raise MalformedEdgeError(f"labels for nodes not in graph: {sorted(unknown_nodes)[:5]}")


def build_graph(
    observations: Iterable[EdgeObservation],
    labels: Mapping[str, str],
    *,
    nodes: Iterable[str] = (),
    strict: bool = False,
) -> LabeledSocialGraph:
    """Build the label-augmented graph from mutual-friend observations.

    Weight of a user-user edge is ``count / M`` with ``M`` the largest count in
    the dataset. If every count is 0 all edges get weight 1. Outside strict
    mode a zero count gets the floor ``1 / (M + 1)`` so the edge stays walkable.
    Duplicate pairs (in either orientation) merge by max count. ``nodes`` adds
    users that may have no edges at all.
    """
    counts: dict[tuple[str, str], int] = {}
    for obs in observations:
        if obs.u == obs.v:
            raise MalformedEdgeError(f"self-loop on {obs.u!r}")
        key = (obs.u, obs.v) if obs.u < obs.v else (obs.v, obs.u)
        counts[key] = max(counts.get(key, 0), int(obs.mutual_friend_count))
    _check_labels(labels)

    user_set = set(nodes)
    for u, v in counts:
        user_set.update((u, v))
    user_set.update(labels)
    if user_set & set(LABEL_NODES):
        raise MalformedEdgeError("label node ids are reserved")

    M = max(counts.values(), default=0)
    edges: dict[tuple[str, str], float] = {}
    for key, c in counts.items():
        if M == 0:
            w = 1.0
        elif c == 0 and not strict:
            w = 1.0 / (M + 1)
        else:
            w = c / M
        edges[key] = w
    return LabeledSocialGraph(sorted(user_set), edges, labels)


def transition_probability(graph: LabeledSocialGraph, u: str, v: str) -> float:
    """Probability that a walk at ``u`` steps to ``v``: w_uv / sum_t w_ut."""
    du = graph.degree_weight(u)
    if du <= 0:
        raise IsolatedNodeError(f"node {u!r} has no weighted edges")
    nbrs = graph.adj(u)
    if v not in nbrs:
        raise KeyError(f"{v!r} is not adjacent to {u!r}")
    return nbrs[v] / du


def connected_components(graph: LabeledSocialGraph) -> list[list[str]]:
    """Components over positive-weight user-user edges, label nodes excluded.

    Components are sorted internally and ordered by their smallest member.
    """
    A = graph.user_adjacency()
    n = graph.n_users
    seen = np.zeros(n, dtype=bool)
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        members = [start]
        while queue:
            i = queue.popleft()
            lo, hi = A.indptr[i], A.indptr[i + 1]
            for j, w in zip(A.indices[lo:hi], A.data[lo:hi]):
                if w > 0 and not seen[j]:
                    seen[j] = True
                    members.append(int(j))
                    queue.append(int(j))
        comps.append(sorted(graph.users[i] for i in members))
    return comps


def label_reachable_mask(graph: LabeledSocialGraph) -> np.ndarray:
    """Boolean mask over users: True where the user's component has a label edge."""
    mask = np.zeros(graph.n_users, dtype=bool)
    for comp in connected_components(graph):
        if any(u in graph.labels for u in comp):
            mask[[graph.index[u] for u in comp]] = True
    return mask
