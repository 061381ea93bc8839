from __future__ import annotations

import shutil
import sys
from pathlib import Path

import numpy as np
import pytest

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))

from fixture_repo import build_fixture_repo  # noqa: E402

from pyqu.classifiers import Model, save_model  # noqa: E402
from pyqu.delta import QA_ARITY  # noqa: E402

FIXTURES = TESTS / "fixtures"
ACCEPTANCE_LINES: list[str] = []

requires_git = pytest.mark.skipif(shutil.which("git") is None, reason="git not installed")


@pytest.fixture(scope="session")
def fixture_repo(tmp_path_factory):
    path = tmp_path_factory.mktemp("repo") / "fixture"
    shas = build_fixture_repo(path)
    return path, shas


def logistic_model(qa: str, weights, bias: float = 0.0) -> Model:
    d = len(weights)
    return Model(
        "logistic",
        {"l2": 0.0, "learning_rate": 0.1, "n_iter": 500},
        d,
        {"mean": np.zeros(d), "scale": np.ones(d), "weights": np.asarray(weights, dtype=float), "bias": float(bias)},
        qa,
    )


@pytest.fixture(scope="session")
def fixture_models(tmp_path_factory):
    """Hand-set logistic models weighing only the CC delta (by -1).

    CC is the first feature of every QA, so probability is
    ``sigmoid(-delta_cc)`` and a commit is enhanced exactly when it does not
    raise cyclomatic complexity.
    """
    out = tmp_path_factory.mktemp("models")
    for qa, d in QA_ARITY.items():
        save_model(logistic_model(qa, [-1.0] + [0.0] * (d - 1)), out / f"{qa}.json")
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
