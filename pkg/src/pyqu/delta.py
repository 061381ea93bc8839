"""Commit-level metric deltas and per-quality-attribute feature vectors."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from pyqu.metrics import (
    COUNT_METRICS,
    DEFAULT_CATALOG,
    RATIO_METRICS,
    MetricVector,
    RuleCatalog,
    compute_metric_vector,
    parse_source,
)

QAS = ("UN", "RE", "MA", "US", "MO")
DELTA_KEYS = MetricVector.keys() + ("rep",)

UN_FEATURES = ("cc", "hv", "ccr", "cr", "scs", "apifc", "afp")
QA_FEATURES: dict[str, tuple[str, ...]] = {
    "UN": UN_FEATURES,
    "RE": ("cc", "tc", "d", "scs", "adc"),
    "MA": ("cc", "loc", "ch", "cp"),
    "US": UN_FEATURES + ("dq", "rep"),
    "MO": ("cc", "ch", "cp_external", "cp_internal"),
}
QA_ARITY = {qa: len(f) for qa, f in QA_FEATURES.items()}


class UnknownQAError(KeyError):
    pass


@dataclass(frozen=True)
class CommitMetricDelta:
    sha: str
    deltas: dict[str, float]
    files_pre: int = 0
    files_post: int = 0
    degraded: bool = False

    def __getitem__(self, key: str) -> float:
        if key == "cp":
            return self.deltas["cp_internal"] + self.deltas["cp_external"]
        return self.deltas[key]

    def negated(self) -> CommitMetricDelta:
        return CommitMetricDelta(
            self.sha,
            {k: -v for k, v in self.deltas.items()},
            self.files_post,
            self.files_pre,
            self.degraded,
        )

    def to_dict(self) -> dict:
        return {
            "sha": self.sha,
            "files_pre": self.files_pre,
            "files_post": self.files_post,
            "degraded": self.degraded,
            **{f"d_{k}": self.deltas[k] for k in DELTA_KEYS},
        }

    @classmethod
    def from_dict(cls, row: Mapping) -> CommitMetricDelta:
        return cls(
            sha=str(row.get("sha", "")),
            deltas={k: float(row[f"d_{k}"]) for k in DELTA_KEYS},
            files_pre=int(row.get("files_pre", 0) or 0),
            files_post=int(row.get("files_post", 0) or 0),
            degraded=str(row.get("degraded", False)).lower() in ("1", "true"),
        )

    @classmethod
    def zero(cls, sha: str = "") -> CommitMetricDelta:
        return cls(sha, {k: 0.0 for k in DELTA_KEYS})


@dataclass(frozen=True)
class QAFeatureVector:
    qa: str
    values: tuple[float, ...]
    names: tuple[str, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.values)


def aggregate_file_metrics(vectors: Sequence[MetricVector]) -> MetricVector:
    """Sum count metrics; LoC-weighted mean of ratio metrics."""
    if not vectors:
        return MetricVector.neutral()
    values = {k: sum(getattr(v, k) for v in vectors) for k in COUNT_METRICS}
    total_loc = sum(v.loc for v in vectors)
    for k in RATIO_METRICS:
        if total_loc > 0:
            values[k] = sum(v.loc * getattr(v, k) for v in vectors) / total_loc
        else:
            values[k] = sum(getattr(v, k) for v in vectors) / len(vectors)
    return MetricVector(**values)


def diff_vectors(pre: MetricVector, post: MetricVector) -> dict[str, float]:
    return {k: float(getattr(post, k)) - float(getattr(pre, k)) for k in MetricVector.keys()}


def compute_deltas(
    pair,
    catalog: RuleCatalog = DEFAULT_CATALOG,
    repo_trees: tuple | None = None,
) -> CommitMetricDelta:
    """Delta of aggregated metrics across one commit.

    ``pair`` is a SnapshotPair (pre/post maps path -> text). A file missing
    on one side contributes the neutral vector there. ``repo_trees`` is an
    optional ``(rep_pre, rep_post)`` pair of reproducibility scores or
    RepoReproducibility values.
    """
    paths = sorted(set(pair.pre) | set(pair.post))
    degraded = False
    pre_vecs, post_vecs = [], []
    for path in paths:
        for side, out in ((pair.pre, pre_vecs), (pair.post, post_vecs)):
            if path in side:
                unit = parse_source(path, side[path])
                degraded |= not unit.parse_ok
                out.append(compute_metric_vector(unit, catalog))
            else:
                out.append(MetricVector.neutral())
    deltas = diff_vectors(aggregate_file_metrics(pre_vecs), aggregate_file_metrics(post_vecs))
    rep = 0.0
    if repo_trees is not None:
        before, after = (getattr(t, "rep", t) for t in repo_trees)
        rep = float(after) - float(before)
    deltas["rep"] = rep
    return CommitMetricDelta(
        sha=getattr(pair, "sha", ""),
        deltas=deltas,
        files_pre=len(pair.pre),
        files_post=len(pair.post),
        degraded=degraded,
    )


def assemble_features(
    delta: CommitMetricDelta,
    qa: str,
    un_score: float | None = None,
) -> QAFeatureVector:
    """Ordered feature vector for one quality attribute.

    For US, passing ``un_score`` replaces the seven raw understandability
    deltas by that single score (the vector then has three entries).
    """
    qa = qa.upper()
    if qa not in QA_FEATURES:
        raise UnknownQAError(f"unknown quality attribute {qa!r}; expected one of {', '.join(QAS)}")
    names = QA_FEATURES[qa]
    if qa == "US" and un_score is not None:
        names = ("un_score", "dq", "rep")
        return QAFeatureVector(qa, (float(un_score), delta["dq"], delta["rep"]), names)
    return QAFeatureVector(qa, tuple(float(delta[n]) for n in names), names)


# serialisation ------------------------------------------------------------

CSV_COLUMNS = ("sha", "files_pre", "files_post", "degraded") + tuple(f"d_{k}" for k in DELTA_KEYS)


def delta_to_json(delta: CommitMetricDelta) -> str:
    return json.dumps(delta.to_dict())


def features_to_json(fv: QAFeatureVector, sha: str = "") -> str:
    return json.dumps({"sha": sha, "qa": fv.qa, "values": list(fv.values)})


def write_delta_csv(deltas: Iterable[CommitMetricDelta], fh) -> None:
    writer = csv.DictWriter(fh, fieldnames=list(CSV_COLUMNS), lineterminator="\n")
    writer.writeheader()
    for d in deltas:
        writer.writerow(d.to_dict())


def read_delta_csv(fh) -> list[CommitMetricDelta]:
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    return [CommitMetricDelta.from_dict(row) for row in csv.DictReader(fh)]
