"""Labelled-commit datasets, the change-type taxonomy and sampling statistics."""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TypeVar

from pyqu.delta import QAS

T = TypeVar("T")

DETECTORS = ("PyRef", "PythonRefMiner", "R-CPatMiner")
CATEGORIES = (
    "Structure Reorganization",
    "Data Reorganization",
    "Clean up",
    "Code Simplification",
    "Function Signature Refinements",
    "Enhance Documentation",
    "Rename Identifier",
    "Import Restructure",
    "Use Optimized Features",
    "String Formatting",
    "Enhance Error Handling",
    "Change Scope",
    "Migration to Supported API",
)
DATASET_FORMAT_VERSION = 1
LABEL_COLUMNS = tuple(f"label_{qa.lower()}" for qa in QAS)
DATASET_COLUMNS = ("repo", "sha") + LABEL_COLUMNS + ("change_types", "notes")

Z_SCORES = {0.90: 1.645, 0.95: 1.96, 0.99: 2.576}


class ValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# taxonomy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaxonomyEntry:
    category: str
    name: str
    frequency: int
    novel: bool
    detected_by: frozenset[str]
    improves: frozenset[str]

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "name": self.name,
            "frequency": self.frequency,
            "novel": self.novel,
            "detected_by": sorted(self.detected_by),
            "improves": [qa for qa in QAS if qa in self.improves],
        }


@dataclass(frozen=True)
class TaxonomyCatalog:
    entries: tuple[TaxonomyEntry, ...]
    reported_total: int | None = None
    discrepancies: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, name: str) -> bool:
        return any(e.name == name for e in self.entries)

    def __getitem__(self, name: str) -> TaxonomyEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    @property
    def categories(self) -> dict[str, list[TaxonomyEntry]]:
        out: dict[str, list[TaxonomyEntry]] = {}
        for e in self.entries:
            out.setdefault(e.category, []).append(e)
        return out

    @property
    def total_frequency(self) -> int:
        return sum(e.frequency for e in self.entries)

    def improving(self, qa: str) -> list[TaxonomyEntry]:
        return [e for e in self.entries if qa.upper() in e.improves]

    def frequency_check(self) -> tuple[bool, str]:
        """Compare the summed frequencies with the reported total."""
        total = self.total_frequency
        if self.reported_total is None:
            return True, f"frequencies sum to {total}; no reported total to compare"
        if total == self.reported_total:
            return True, f"frequencies sum to the reported {total}"
        return False, f"frequencies sum to {total}, reported total is {self.reported_total} (difference {self.reported_total - total})"


def _parse_entries(raw: Sequence[Mapping]) -> tuple[TaxonomyEntry, ...]:
    problems, entries, seen = [], [], set()
    for i, r in enumerate(raw):
        try:
            name = str(r["name"])
            category = str(r["category"])
            freq = r["frequency"]
            detected = frozenset(r.get("detected_by", ()))
            improves = frozenset(r["improves"])
        except (KeyError, TypeError) as exc:
            problems.append(f"entry {i}: missing field {exc}")
            continue
        if name in seen:
            problems.append(f"duplicate name {name!r}")
        seen.add(name)
        if category not in CATEGORIES:
            problems.append(f"{name!r}: unknown category {category!r}")
        bad_qa = sorted(improves - set(QAS))
        if bad_qa:
            problems.append(f"{name!r}: unknown QA flag(s) {bad_qa}")
        if not improves:
            problems.append(f"{name!r}: improves no quality attribute")
        bad_tool = sorted(detected - set(DETECTORS))
        if bad_tool:
            problems.append(f"{name!r}: unknown detector(s) {bad_tool}")
        if isinstance(freq, bool) or not isinstance(freq, int) or freq < 0:
            problems.append(f"{name!r}: frequency must be a non-negative integer")
        entries.append(TaxonomyEntry(category, name, freq, bool(r.get("novel", False)), detected, improves))
    if problems:
        raise ValidationError("invalid taxonomy catalog: " + "; ".join(problems))
    return tuple(entries)


def parse_taxonomy(doc) -> TaxonomyCatalog:
    """Build a catalog from a bare entry array or a versioned envelope."""
    if isinstance(doc, list):
        return TaxonomyCatalog(_parse_entries(doc))
    if not isinstance(doc, dict) or "entries" not in doc:
        raise ValidationError("taxonomy file must be an entry array or an object with 'entries'")
    version = doc.get("format_version", 1)
    if version != 1:
        raise ValidationError(f"unsupported taxonomy format_version {version!r}")
    return TaxonomyCatalog(
        _parse_entries(doc["entries"]),
        doc.get("reported_total"),
        tuple(doc.get("discrepancies", ())),
    )


def load_taxonomy(path: str | Path | None = None) -> TaxonomyCatalog:
    """Load and validate a catalog; ``None`` loads the bundled one."""
    if path is None:
        text = resources.files("pyqu.data").joinpath("taxonomy.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise ValidationError(f"taxonomy file is not valid JSON: {exc}") from exc
    return parse_taxonomy(doc)


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------


def cohens_kappa(matrix: Sequence[Sequence[float]]) -> float:
    """Chance-corrected agreement for a square rater-by-rater count matrix."""
    rows = [list(r) for r in matrix]
    k = len(rows)
    if k == 0 or any(len(r) != k for r in rows):
        raise ValueError("agreement matrix must be square and non-empty")
    if any(v < 0 for r in rows for v in r):
        raise ValueError("agreement counts must be non-negative")
    total = sum(sum(r) for r in rows)
    if total <= 0:
        raise ValueError("agreement matrix total must be positive")
    p_o = sum(rows[i][i] for i in range(k)) / total
    row_sums = [sum(r) for r in rows]
    col_sums = [sum(rows[i][j] for i in range(k)) for j in range(k)]
    p_e = sum(row_sums[i] * col_sums[i] for i in range(k)) / (total * total)
    if p_e == 1.0:
        if p_o == 1.0:
            return 1.0
        raise ValueError("kappa is undefined when expected agreement is 1")
    return (p_o - p_e) / (1.0 - p_e)


def cochran_sample_size(population: float | None = None, confidence: float = 0.95, margin: float = 0.05) -> int:
    """Minimum simple-random-sample size at p = 0.5.

    ``population`` of ``None`` or ``math.inf`` means an infinite population.
    Sizes are rounded up.
    """
    if margin <= 0:
        raise ValueError("margin must be positive")
    z = None
    for level, score in Z_SCORES.items():
        if math.isclose(confidence, level):
            z = score
    if z is None:
        raise ValueError(f"confidence must be one of {sorted(Z_SCORES)}")
    n0 = z * z * 0.25 / (margin * margin)
    if population is None or math.isinf(population):
        n = n0
    else:
        if population < 1:
            raise ValueError("population must be >= 1")
        n = n0 / (1.0 + (n0 - 1.0) / population)
    return int(math.ceil(n - 1e-9))


def srs_sample(items: Sequence[T], size: int, seed: int = 0) -> list[T]:
    items = list(items)
    if size < 0 or size > len(items):
        raise ValueError(f"sample size {size} outside [0, {len(items)}]")
    return random.Random(seed).sample(items, size)


# ---------------------------------------------------------------------------
# labelled commits
# ---------------------------------------------------------------------------

_LABEL_TEXT = {True: "1", False: "0", None: ""}
_TEXT_LABEL = {"1": True, "0": False, "": None}


@dataclass(frozen=True)
class LabeledCommitRecord:
    repo: str
    sha: str
    labels: dict[str, bool | None] = field(default_factory=dict)
    change_types: tuple[str, ...] = ()
    notes: str = ""

    def __post_init__(self):
        labels = {qa.upper(): v for qa, v in self.labels.items()}
        for qa in QAS:
            labels.setdefault(qa, None)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "change_types", tuple(self.change_types))

    def label(self, qa: str) -> bool | None:
        return self.labels.get(qa.upper())


def _validate_records(records: Sequence[LabeledCommitRecord], catalog: TaxonomyCatalog | None) -> None:
    seen = set()
    for r in records:
        key = (r.repo, r.sha)
        if key in seen:
            raise ValidationError(f"duplicate sha {r.sha} in repo {r.repo}")
        seen.add(key)
        unknown = sorted(set(r.labels) - set(QAS))
        if unknown:
            raise ValidationError(f"{r.sha}: unknown QA label(s) {unknown}")
        if catalog is not None:
            missing = [t for t in r.change_types if t not in catalog]
            if missing:
                raise ValidationError(f"{r.sha}: unknown change type(s) {missing}")


def save_dataset(records: Iterable[LabeledCommitRecord], path: str | Path, catalog: TaxonomyCatalog | None = None) -> None:
    records = list(records)
    _validate_records(records, catalog)
    for r in records:
        if any(";" in t for t in r.change_types):
            raise ValidationError(f"{r.sha}: change type names may not contain ';'")
    buf = io.StringIO()
    buf.write(f"# format_version: {DATASET_FORMAT_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DATASET_COLUMNS)
    for r in records:
        labels = [_LABEL_TEXT[r.labels.get(qa)] for qa in QAS]
        writer.writerow([r.repo, r.sha, *labels, ";".join(r.change_types), r.notes])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def load_dataset(path: str | Path, catalog: TaxonomyCatalog | None = None) -> list[LabeledCommitRecord]:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines(keepends=True)
    offset = 0
    if lines and lines[0].startswith("#"):
        header = lines[0].lstrip("#").strip()
        key, _, value = header.partition(":")
        if key.strip() != "format_version" or value.strip() != str(DATASET_FORMAT_VERSION):
            raise ValidationError(f"line 1: unsupported dataset header {header!r}")
        offset = 1
    reader = csv.reader(io.StringIO("".join(lines[offset:])))
    records = []
    header = next(reader, None)
    if header is None:
        return records
    if tuple(header) != DATASET_COLUMNS:
        raise ValidationError(f"line {offset + 1}: expected columns {','.join(DATASET_COLUMNS)}")
    for row in reader:
        line = offset + reader.line_num
        if len(row) != len(DATASET_COLUMNS):
            raise ValidationError(f"line {line}: expected {len(DATASET_COLUMNS)} fields, got {len(row)}")
        repo, sha, *rest = row
        label_text, change_types, notes = rest[: len(QAS)], rest[len(QAS)], rest[len(QAS) + 1]
        if not sha:
            raise ValidationError(f"line {line}: empty sha")
        labels = {}
        for qa, value in zip(QAS, label_text):
            if value.strip() not in _TEXT_LABEL:
                raise ValidationError(f"line {line}: label for {qa} must be 1, 0 or empty, got {value!r}")
            labels[qa] = _TEXT_LABEL[value.strip()]
        types = tuple(t for t in change_types.split(";") if t) if change_types else ()
        records.append(LabeledCommitRecord(repo, sha, labels, types, notes))
    try:
        _validate_records(records, catalog)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    return records
