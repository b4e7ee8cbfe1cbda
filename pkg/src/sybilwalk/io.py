"""Readers and writers for the on-disk formats.

accounts   JSON Lines, one AccountRecord object per line
features   CSV ``account_id,f0,...,f17``
edges      TSV ``u<TAB>v<TAB>mutual_friends``
labels     TSV ``node<TAB>label`` (benign | sybil); ground truth uses the same layout
priors     CSV ``account_id,score``
scores     CSV ``account_id,score,iterations,flag``

TSV readers skip blank lines and lines starting with ``#``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from sybilwalk.errors import (
    EmptyDatasetError,
    InputError,
    MalformedDataError,
    MalformedEdgeError,
    MalformedPriorError,
    MalformedRecordError,
)
from sybilwalk.features import BENIGN, N_FEATURES, SYBIL, AccountRecord, FeatureVector
from sybilwalk.graph import EdgeObservation
from sybilwalk.propagation import ScoreVector

FEATURE_HEADER = ["account_id"] + [f"f{i}" for i in range(N_FEATURES)]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _read_text(path: str | Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def read_accounts(path: str | Path) -> list[AccountRecord]:
    records: list[AccountRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecordError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
        try:
            rec = AccountRecord.from_dict(obj)
        except MalformedRecordError as exc:
            raise MalformedRecordError(f"{path}:{lineno}: {exc}") from None
        if rec.account_id in seen:
            raise MalformedRecordError(f"{path}:{lineno}: duplicate account_id {rec.account_id!r}")
        seen.add(rec.account_id)
        records.append(rec)
    if not records:
        raise EmptyDatasetError(f"{path}: no account records")
    return records


def write_accounts(records: Iterable[AccountRecord], path: str | Path) -> None:
    lines = [json.dumps(r.to_dict(), sort_keys=False) for r in records]
    Path(path).write_text("".join(line + "\n" for line in lines))


def features_csv(vectors: Sequence[FeatureVector]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FEATURE_HEADER)
    for v in vectors:
        w.writerow([v.account_id] + [_fmt(x) for x in v.values])
    return buf.getvalue()


def write_features(vectors: Sequence[FeatureVector], path: str | Path) -> None:
    Path(path).write_text(features_csv(vectors))


def read_features(path: str | Path) -> list[FeatureVector]:
    rows = list(csv.reader(io.StringIO(_read_text(path))))
    if not rows or rows[0] != FEATURE_HEADER:
        raise MalformedDataError(f"{path}: expected header {','.join(FEATURE_HEADER)}")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != N_FEATURES + 1 or not row[0]:
            raise MalformedDataError(f"{path}:{lineno}: expected {N_FEATURES + 1} columns")
        try:
            out.append(FeatureVector(row[0], tuple(float(x) for x in row[1:])))
        except ValueError as exc:
            raise MalformedDataError(f"{path}:{lineno}: {exc}") from None
    if not out:
        raise EmptyDatasetError(f"{path}: no feature rows")
    return out


def _tsv_rows(path: str | Path):
    for lineno, line in enumerate(_read_text(path).splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line.rstrip("\r").split("\t")


def read_edges(path: str | Path) -> list[EdgeObservation]:
    edges = []
    for lineno, cols in _tsv_rows(path):
        if len(cols) != 3:
            raise MalformedEdgeError(f"{path}:{lineno}: expected u<TAB>v<TAB>mutual_friends")
        try:
            count = int(cols[2])
            edges.append(EdgeObservation(cols[0], cols[1], count))
        except ValueError as exc:
            raise MalformedEdgeError(f"{path}:{lineno}: {exc}") from None
    return edges


def write_edges(edges: Iterable[EdgeObservation], path: str | Path) -> None:
    Path(path).write_text("".join(f"{e.u}\t{e.v}\t{e.mutual_friend_count}\n" for e in edges))


def read_labels(path: str | Path) -> dict[str, str]:
    labels: dict[str, str] = {}
    for lineno, cols in _tsv_rows(path):
        if len(cols) != 2 or not cols[0]:
            raise MalformedDataError(f"{path}:{lineno}: expected node<TAB>label")
        if cols[1] not in (BENIGN, SYBIL):
            raise MalformedDataError(f"{path}:{lineno}: label must be benign or sybil")
        if labels.get(cols[0], cols[1]) != cols[1]:
            raise MalformedDataError(f"{path}:{lineno}: conflicting label for {cols[0]!r}")
        labels[cols[0]] = cols[1]
    return labels


def write_labels(labels: Mapping[str, str], path: str | Path) -> None:
    Path(path).write_text("".join(f"{u}\t{labels[u]}\n" for u in sorted(labels)))


def priors_csv(priors: Mapping[str, float]) -> str:
    lines = ["account_id,score"] + [f"{u},{_fmt(p)}" for u, p in priors.items()]
    return "\n".join(lines) + "\n"


def write_priors(priors: Mapping[str, float], path: str | Path) -> None:
    Path(path).write_text(priors_csv(priors))


def read_priors(path: str | Path) -> dict[str, float]:
    rows = list(csv.reader(io.StringIO(_read_text(path))))
    if not rows or rows[0] != ["account_id", "score"]:
        raise MalformedPriorError(f"{path}: expected header account_id,score")
    priors: dict[str, float] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            u, p = row[0], float(row[1])
        except (IndexError, ValueError):
            raise MalformedPriorError(f"{path}:{lineno}: expected account_id,score") from None
        if not (math.isfinite(p) and 0.0 <= p <= 1.0):
            raise MalformedPriorError(f"{path}:{lineno}: score {row[1]} outside [0, 1]")
        priors[u] = p
    return priors


def scores_csv(result: ScoreVector) -> str:
    lines = ["account_id,score,iterations,flag"]
    for i, u in enumerate(result.users):
        lines.append(f"{u},{result.scores[i]:.9g},{result.iteration_count},{result.flag(i)}")
    return "\n".join(lines) + "\n"


def write_scores(result: ScoreVector, path: str | Path) -> None:
    Path(path).write_text(scores_csv(result))


def read_scores(path: str | Path) -> dict[str, tuple[float, int, str]]:
    rows = list(csv.reader(io.StringIO(_read_text(path))))
    if not rows or rows[0] != ["account_id", "score", "iterations", "flag"]:
        raise MalformedDataError(f"{path}: expected header account_id,score,iterations,flag")
    return {r[0]: (float(r[1]), int(r[2]), r[3]) for r in rows[1:] if r}


DATASET_FILES = {
    "accounts": "accounts.jsonl",
    "edges": "edges.tsv",
    "labels": "labels.tsv",
    "ground_truth": "ground_truth.tsv",
}


def write_dataset(dataset, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {key: out / name for key, name in DATASET_FILES.items()}
    write_accounts(dataset.accounts, paths["accounts"])
    write_edges(dataset.edges, paths["edges"])
    write_labels(dataset.labels, paths["labels"])
    write_labels(dataset.ground_truth, paths["ground_truth"])
    return paths


def read_dataset(accounts, edges, labels, ground_truth):
    from sybilwalk.synthgen import Dataset

    return Dataset(
        read_accounts(accounts), read_edges(edges), read_labels(labels), read_labels(ground_truth)
    )
