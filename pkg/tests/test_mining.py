from __future__ import annotations

import subprocess

import pytest

from conftest import requires_git
from fixture_repo import EXPECTED_PASSING, EXPECTED_VERDICTS
from pyqu.mining import (
    CommitRecord,
    FilterConfig,
    GitRepo,
    MiningError,
    file_count_filter,
    imported_roots,
    keyword_filter,
    mine,
    repo_reproducibility,
    repo_tree,
    walk_history,
)


def _record(message="", files=()):
    return CommitRecord("0" * 40, message, 0, tuple(files))


@pytest.mark.parametrize(
    "message,hit",
    [
        ("Refactor loader", True),
        ("refactored the loader", True),
        ("REFACTORING", True),
        ("refactors", True),
        ("Improve   code layout", True),
        ("code\nquality pass", True),
        ("prefactor step", False),
        ("refactorization", False),
        ("improve coding", False),
        ("Enhance codebase", False),
        ("quality metrics added", False),
        ("tweak quality metric", True),
    ],
)
def test_keyword_pattern(message, hit):
    assert keyword_filter(_record(message)) is hit


def test_custom_keywords():
    cfg = FilterConfig(keywords=("cleanup",))
    assert keyword_filter(_record("Cleanup module"), cfg)
    assert not keyword_filter(_record("Refactor module"), cfg)


@pytest.mark.parametrize(
    "text,roots",
    [
        ("import torch\n", {"torch"}),
        ("import torch.nn as nn, os\n", {"torch", "os"}),
        ("from sklearn.linear_model import Ridge\n", {"sklearn", "linear_model", "Ridge"}),
        ("from . import torch\n", set()),
        ("def f(:\nimport numpy as np\n", {"numpy"}),
        ("def f(:\nfrom keras.layers import Dense\n", {"keras", "layers", "Dense"}),
        ("x = 'import torch'\n", set()),
    ],
)
def test_imported_roots(text, roots):
    assert imported_roots(text) == roots


def test_file_count_bounds():
    five = _record("x", [(f"f{i}.py", "modified") for i in range(5)])
    six = _record("x", [(f"f{i}.py", "modified") for i in range(6)])
    assert file_count_filter(five) and not file_count_filter(six)
    assert file_count_filter(_record("x"))


def test_filter_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(keywords=())
    with pytest.raises(ValueError):
        FilterConfig(max_py_files=0)
    cfg = FilterConfig.from_mapping({"keywords": ["a"], "max_py_files": "3", "other": 1})
    assert cfg.keywords == ("a",) and cfg.max_py_files == 3


@requires_git
def test_fixture_verdicts(fixture_repo):
    path, shas = fixture_repo
    names = {sha: name for name, sha in shas.items()}
    seen = {}
    for record, _, verdicts in mine(path):
        name = names[record.sha]
        seen[name] = (verdicts.keyword, verdicts.ml_import, verdicts.file_count)
    assert seen == EXPECTED_VERDICTS
    assert {n for n, v in seen.items() if all(v)} == EXPECTED_PASSING


@requires_git
def test_walk_order_and_change_kinds(fixture_repo):
    path, shas = fixture_repo
    records = {r.sha: r for r in walk_history(path)}
    order = [r.sha for r in walk_history(path)]
    assert order[0] == shas["root"] and order[-1] == shas["broken_syntax"]
    assert records[shas["root"]].parent_sha is None
    assert records[shas["delete_legacy"]].changed_py_files == (("legacy.py", "deleted"),)
    assert records[shas["add_data"]].changed_py_files == (("data.py", "added"),)
    assert records[shas["merge"]].changed_py_files == (("side.py", "added"),)
    assert records[shas["docs_only"]].changed_py_files == ()
    assert records[shas["legacy_added"]].message == "add legacy loader\n\nrefactor later"


@requires_git
def test_snapshots_for_deleted_file(fixture_repo):
    path, shas = fixture_repo
    for record, snaps, _ in mine(path):
        if record.sha == shas["delete_legacy"]:
            assert list(snaps.pre) == ["legacy.py"] and snaps.post == {}
        if record.sha == shas["root"]:
            assert snaps.pre == {} and list(snaps.post) == ["model.py"]


@requires_git
def test_tighter_file_limit_only_removes(fixture_repo):
    path, _ = fixture_repo
    loose = {r.sha for r, _, v in mine(path) if v.passed}
    tight = {r.sha for r, _, v in mine(path, FilterConfig(max_py_files=1)) if v.passed}
    assert tight <= loose
    assert len(tight) < len(loose)


@requires_git
def test_rev_range(fixture_repo):
    path, shas = fixture_repo
    got = [r.sha for r in walk_history(path, f"{shas['six_files']}..{shas['delete_legacy']}")]
    assert got == [shas["legacy_added"], shas["delete_legacy"]]


@requires_git
def test_empty_repository(tmp_path):
    subprocess.run(["git", "init", "-q", str(tmp_path)], check=True)
    assert list(walk_history(tmp_path)) == []
    assert GitRepo(tmp_path).head() is None


def test_not_a_repository(tmp_path):
    with pytest.raises(MiningError):
        GitRepo(tmp_path / "missing")
    with pytest.raises(MiningError):
        GitRepo(tmp_path)


@requires_git
def test_repo_tree_contents(fixture_repo):
    path, shas = fixture_repo
    tree = repo_tree(GitRepo(path), shas["root"])
    assert set(tree) == {"model.py", "README.md", "requirements.txt"}
    assert "np.mean" in tree["model.py"]
    assert repo_tree(GitRepo(path), None) == {}


@pytest.mark.parametrize(
    "tree,rep",
    [
        ({"README.md": "", "requirements.txt": "", "a.py": "import random\nrandom.seed(0)\nrandom.random()\n"}, 1.0),
        ({"README.md": "", "setup.py": "", "a.py": "x = 1\n"}, 1.0),
        ({"README.md": "", "a.py": "import numpy as np\nnp.random.rand(3)\n"}, 1 / 3),
        ({"readme.rst": "", "a.py": "import torch\ntorch.manual_seed(1)\ntorch.randn(2)\n"}, 2 / 3),
        ({"docs/README.md": "", "sub/requirements.txt": ""}, 1 / 3),
        ({}, 1 / 3),
    ],
)
def test_reproducibility_score(tree, rep):
    assert repo_reproducibility(tree).rep == pytest.approx(rep)


def test_reproducibility_to_dict():
    d = repo_reproducibility({"a.py": "x = 1\n"}).to_dict()
    assert d["randomness_controlled"] == "not_applicable"
