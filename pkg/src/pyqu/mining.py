"""Git history walking, candidate-commit filters and snapshot extraction."""

from __future__ import annotations

import ast
import logging
import re
import subprocess
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Mapping

from pyqu.metrics import DEFAULT_CATALOG, RuleCatalog, parse_source
from pyqu.metrics.source import resolve_call

log = logging.getLogger(__name__)

DEFAULT_KEYWORDS = ("refactor", "enhance code", "improve code", "code quality", "quality metric")
DEFAULT_ML_LIBRARIES = ("keras", "torch", "tensorflow", "sklearn", "numpy", "pandas")
DEFAULT_MAX_PY_FILES = 5

_KINDS = {"A": "added", "M": "modified", "D": "deleted", "T": "modified"}


class MiningError(RuntimeError):
    pass


@dataclass(frozen=True)
class FilterConfig:
    keywords: tuple[str, ...] = DEFAULT_KEYWORDS
    ml_libraries: tuple[str, ...] = DEFAULT_ML_LIBRARIES
    max_py_files: int = DEFAULT_MAX_PY_FILES

    def __post_init__(self):
        if not self.keywords:
            raise ValueError("keywords must not be empty")
        if int(self.max_py_files) < 1:
            raise ValueError("max_py_files must be >= 1")
        object.__setattr__(self, "keywords", tuple(self.keywords))
        object.__setattr__(self, "ml_libraries", tuple(self.ml_libraries))
        object.__setattr__(self, "max_py_files", int(self.max_py_files))

    @classmethod
    def from_mapping(cls, data: Mapping) -> FilterConfig:
        known = {"keywords", "ml_libraries", "max_py_files"}
        return cls(**{k: v for k, v in data.items() if k in known})

    def keyword_pattern(self) -> re.Pattern:
        parts = []
        for kw in self.keywords:
            words = kw.split()
            if len(words) == 1:
                parts.append(rf"\b{re.escape(words[0])}(?:s|ed|ing)?\b")
            else:
                parts.append(r"\b" + r"\s+".join(re.escape(w) for w in words) + r"\b")
        return re.compile("|".join(parts), re.IGNORECASE)


@dataclass(frozen=True)
class CommitRecord:
    sha: str
    message: str
    author_time: int
    changed_py_files: tuple[tuple[str, str], ...]
    parent_sha: str | None = None

    def to_dict(self) -> dict:
        return {
            "sha": self.sha,
            "parent_sha": self.parent_sha,
            "author_time": datetime.fromtimestamp(self.author_time, tz=timezone.utc).isoformat(),
            "message": self.message,
            "changed_py_files": [{"path": p, "change": k} for p, k in self.changed_py_files],
        }


@dataclass(frozen=True)
class SnapshotPair:
    sha: str
    pre: dict[str, str] = field(default_factory=dict)
    post: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class RepoReproducibility:
    has_dependency_file: bool
    has_readme: bool
    randomness_controlled: bool | None  # None: no randomness used

    @property
    def rep(self) -> float:
        seeded = True if self.randomness_controlled is None else self.randomness_controlled
        return (int(self.has_dependency_file) + int(self.has_readme) + int(seeded)) / 3

    def to_dict(self) -> dict:
        return {
            "has_dependency_file": self.has_dependency_file,
            "has_readme": self.has_readme,
            "randomness_controlled": (
                "not_applicable" if self.randomness_controlled is None else self.randomness_controlled
            ),
            "rep": self.rep,
        }


# ---------------------------------------------------------------------------
# git access
# ---------------------------------------------------------------------------


class GitRepo:
    """Read-only handle over the ``git`` command line."""

    def __init__(self, path):
        self.path = Path(path)
        if not self.path.is_dir():
            raise MiningError(f"not a readable directory: {self.path}")
        try:
            self._run("rev-parse", "--git-dir")
        except MiningError:
            raise MiningError(f"not a git repository: {self.path}") from None

    def _run(self, *args: str, input: bytes | None = None) -> bytes:
        proc = subprocess.run(
            ["git", "-C", str(self.path), *args],
            input=input,
            capture_output=True,
        )
        if proc.returncode != 0:
            raise MiningError(proc.stderr.decode("utf-8", "replace").strip() or f"git {args[0]} failed")
        return proc.stdout

    def has_commits(self) -> bool:
        try:
            self._run("rev-parse", "--verify", "-q", "HEAD")
            return True
        except MiningError:
            return False

    def head(self) -> str | None:
        if not self.has_commits():
            return None
        return self._run("rev-parse", "HEAD").decode().strip()

    def show(self, sha: str, path: str) -> bytes:
        return self._run("show", f"{sha}:{path}")

    def ls_tree(self, sha: str) -> list[str]:
        out = self._run("ls-tree", "-r", "-z", "--name-only", sha)
        return [p for p in out.decode("utf-8", "surrogateescape").split("\0") if p]

    def read_blobs(self, sha: str, paths: list[str]) -> dict[str, bytes]:
        """Contents of ``paths`` at ``sha``; missing paths are omitted."""
        if not paths:
            return {}
        request = "".join(f"{sha}:{p}\n" for p in paths).encode("utf-8", "surrogateescape")
        out = self._run("cat-file", "--batch", input=request)
        blobs: dict[str, bytes] = {}
        pos = 0
        for p in paths:
            nl = out.index(b"\n", pos)
            header = out[pos:nl].split()
            pos = nl + 1
            if len(header) < 3 or header[1] == b"missing":
                continue
            size = int(header[2])
            blobs[p] = out[pos : pos + size]
            pos += size + 1
        return blobs


def _decode(data: bytes) -> str:
    return data.decode("utf-8", errors="replace")


def walk_history(repo: GitRepo | str, rev_range: str | None = None) -> Iterator[CommitRecord]:
    """Commits oldest-first in topological order; merges diff against the
    first parent, root commits against the empty tree."""
    if not isinstance(repo, GitRepo):
        repo = GitRepo(repo)
    if not repo.has_commits():
        return
    raw = repo._run(
        "log", "--topo-order", "--reverse", "--format=%H%x00%P%x00%at%x00%B%x1e", rev_range or "HEAD"
    )
    for chunk in raw.split(b"\x1e"):
        chunk = chunk.lstrip(b"\n")
        if not chunk:
            continue
        sha, parents, when, message = chunk.split(b"\0", 3)
        sha = sha.decode()
        parent = parents.decode().split()[0] if parents.strip() else None
        try:
            args = ["diff-tree", "-r", "-z", "--no-commit-id", "--no-renames", "--name-status"]
            args += [parent, sha] if parent else ["--root", sha]
            out = repo._run(*args)
        except MiningError as exc:
            log.warning("skipping commit %s: %s", sha, exc)
            continue
        fields = [f for f in out.decode("utf-8", "surrogateescape").split("\0") if f]
        changed = []
        for status, path in zip(fields[0::2], fields[1::2]):
            if path.endswith(".py"):
                changed.append((path, _KINDS.get(status[0], "modified")))
        yield CommitRecord(
            sha=sha,
            message=_decode(message).rstrip("\n"),
            author_time=int(when or 0),
            changed_py_files=tuple(changed),
            parent_sha=parent,
        )


def snapshot_pair(repo: GitRepo, record: CommitRecord) -> SnapshotPair:
    pre_paths = [p for p, k in record.changed_py_files if k != "added"] if record.parent_sha else []
    post_paths = [p for p, k in record.changed_py_files if k != "deleted"]
    pre_blobs = repo.read_blobs(record.parent_sha, pre_paths) if pre_paths else {}
    post_blobs = repo.read_blobs(record.sha, post_paths)
    missing = (set(pre_paths) - set(pre_blobs)) | (set(post_paths) - set(post_blobs))
    for path in sorted(missing):
        log.warning("commit %s: blob for %s missing, file dropped", record.sha, path)
    return SnapshotPair(
        sha=record.sha,
        pre={p: _decode(b) for p, b in pre_blobs.items() if p not in missing},
        post={p: _decode(b) for p, b in post_blobs.items() if p not in missing},
    )


# ---------------------------------------------------------------------------
# filters
# ---------------------------------------------------------------------------


def keyword_filter(record: CommitRecord, config: FilterConfig = FilterConfig()) -> bool:
    return config.keyword_pattern().search(record.message) is not None


_IMPORT_LINE = re.compile(r"^\s*(?:from\s+([\w.]+)\s+import\s+([\w., ]+)|import\s+([\w., ]+))", re.M)


def imported_roots(text: str) -> set[str]:
    """Names an import-root match can hit: the first component of plain
    imports, every component of ``from`` modules and the imported names."""
    roots: set[str] = set()
    unit = parse_source("<import-scan>", text)
    if unit.parse_ok:
        for node in ast.walk(unit.tree):
            if isinstance(node, ast.Import):
                roots.update(a.name.split(".")[0] for a in node.names)
            elif isinstance(node, ast.ImportFrom) and node.level == 0 and node.module:
                roots.update(node.module.split("."))
                roots.update(a.name for a in node.names)
        return roots
    for m in _IMPORT_LINE.finditer(text):
        if m.group(1):
            roots.update(m.group(1).split("."))
            roots.update(n.strip() for n in m.group(2).split(","))
        else:
            roots.update(n.strip().split(".")[0].split()[0] for n in m.group(3).split(",") if n.strip())
    return roots


def ml_import_filter(record: CommitRecord, snapshots: SnapshotPair, config: FilterConfig = FilterConfig()) -> bool:
    wanted = set(config.ml_libraries)
    for path, kind in record.changed_py_files:
        side = snapshots.pre if kind == "deleted" else snapshots.post
        text = side.get(path)
        if text is not None and imported_roots(text) & wanted:
            return True
    return False


def file_count_filter(record: CommitRecord, config: FilterConfig = FilterConfig()) -> bool:
    return len(record.changed_py_files) <= config.max_py_files


@dataclass(frozen=True)
class Verdicts:
    keyword: bool
    ml_import: bool
    file_count: bool

    @property
    def passed(self) -> bool:
        return self.keyword and self.ml_import and self.file_count

    def to_dict(self) -> dict:
        return {
            "keyword": self.keyword,
            "ml_import": self.ml_import,
            "file_count": self.file_count,
            "passed": self.passed,
        }


def apply_filters(record: CommitRecord, snapshots: SnapshotPair, config: FilterConfig) -> Verdicts:
    return Verdicts(
        keyword=keyword_filter(record, config),
        ml_import=ml_import_filter(record, snapshots, config),
        file_count=file_count_filter(record, config),
    )


def mine(repo: GitRepo | str, config: FilterConfig = FilterConfig(), rev_range: str | None = None):
    """Yield ``(record, snapshots, verdicts)`` for every walked commit."""
    if not isinstance(repo, GitRepo):
        repo = GitRepo(repo)
    for record in walk_history(repo, rev_range):
        snaps = snapshot_pair(repo, record)
        yield record, snaps, apply_filters(record, snaps, config)


# ---------------------------------------------------------------------------
# reproducibility
# ---------------------------------------------------------------------------

_DEPENDENCY_FILES = {"requirements.txt", "setup.py", "setup.cfg", "pyproject.toml", "pipfile", "environment.yml"}
_README = re.compile(r"^readme(\.(md|rst|txt|markdown))?$", re.IGNORECASE)
_REQUIREMENTS = re.compile(r"^requirements[\w.-]*\.txt$", re.IGNORECASE)


def repo_reproducibility(tree: Mapping[str, str], catalog: RuleCatalog = DEFAULT_CATALOG) -> RepoReproducibility:
    """Score a full repository listing (path -> text, root-relative)."""
    root_files = [p for p in tree if "/" not in p]
    has_dep = any(p.lower() in _DEPENDENCY_FILES or _REQUIREMENTS.match(p) for p in root_files)
    has_readme = any(_README.match(p) for p in root_files)
    rand_re = re.compile(catalog.randomness_calls)
    seed_re = re.compile(catalog.seeding_calls)
    uses_random = seeded = False
    for path in sorted(tree):
        if not path.endswith(".py"):
            continue
        unit = parse_source(path, tree[path])
        if not unit.parse_ok:
            continue
        aliases = unit.import_aliases
        for node in ast.walk(unit.tree):
            if isinstance(node, ast.Call):
                callee = resolve_call(node, aliases)
                if callee is None:
                    continue
                if seed_re.search(callee):
                    seeded = True
                if rand_re.search(callee):
                    uses_random = True
    return RepoReproducibility(has_dep, has_readme, seeded if uses_random else None)


def repo_tree(repo: GitRepo, sha: str | None) -> dict[str, str]:
    """Root files plus every ``.py`` file at ``sha`` (empty for ``None``)."""
    if sha is None:
        return {}
    paths = [p for p in repo.ls_tree(sha) if p.endswith(".py") or "/" not in p]
    tree = {p: "" for p in paths}
    wanted = [p for p in paths if p.endswith(".py")]
    for p, data in repo.read_blobs(sha, wanted).items():
        tree[p] = _decode(data)
    return tree

