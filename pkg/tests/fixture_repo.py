"""Scripted git repository exercising every mining filter path.

Commit dates are pinned so the shas are identical on every build.
"""

from __future__ import annotations

import os
import subprocess
from pathlib import Path

# name -> (keyword, ml_import, file_count) verdicts expected for the commit
EXPECTED_VERDICTS = {
    "root": (False, True, True),
    "refactor_torch": (True, True, True),
    "refactor_no_ml": (True, False, True),
    "no_keyword": (False, True, True),
    "five_files": (True, True, True),
    "six_files": (True, True, False),
    "legacy_added": (True, True, True),
    "delete_legacy": (True, True, True),
    "add_data": (True, True, True),
    "side_branch": (True, True, True),
    "docs_only": (False, False, True),
    "merge": (False, True, True),
    "config_only": (True, False, True),
    "broken_syntax": (True, True, True),
}
EXPECTED_PASSING = {name for name, v in EXPECTED_VERDICTS.items() if all(v)}

MODEL_V1 = '''import numpy as np


def train(x):
    return np.mean(x)
'''

MODEL_V2 = '''"""Model training."""
import torch


def train(x):
    """Average the batch."""
    return torch.mean(x)
'''

MODEL_V3 = '''"""Model training."""
import torch


def train(x, scale=1.0):
    """Average the batch and scale it."""
    return torch.mean(x) * scale
'''


def _module(i: int, extra: str = "") -> str:
    return f"import numpy as np\n\n\ndef f{i}(x):\n    return np.sum(x) + {i}{extra}\n"


class _Git:
    def __init__(self, path: Path):
        self.path = path
        self.tick = 0

    def __call__(self, *args: str) -> str:
        env = dict(os.environ)
        stamp = f"{1700000000 + self.tick * 3600} +0000"
        env.update(
            GIT_AUTHOR_NAME="Fixture",
            GIT_AUTHOR_EMAIL="fixture@example.com",
            GIT_COMMITTER_NAME="Fixture",
            GIT_COMMITTER_EMAIL="fixture@example.com",
            GIT_AUTHOR_DATE=stamp,
            GIT_COMMITTER_DATE=stamp,
            GIT_CONFIG_GLOBAL="/dev/null",
            GIT_CONFIG_NOSYSTEM="1",
        )
        out = subprocess.run(["git", "-C", str(self.path), *args], env=env, check=True, capture_output=True, text=True)
        return out.stdout.strip()

    def write(self, rel: str, text: str) -> None:
        p = self.path / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)

    def commit(self, message: str) -> str:
        self.tick += 1
        self("add", "-A")
        self("commit", "-q", "--allow-empty", "-m", message)
        return self("rev-parse", "HEAD")


def build_fixture_repo(path: str | Path) -> dict[str, str]:
    """Create the repository at ``path``; returns commit name -> sha."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    git = _Git(path)
    git("init", "-q", "-b", "main")
    shas: dict[str, str] = {}

    git.write("model.py", MODEL_V1)
    git.write("README.md", "# fixture\n")
    git.write("requirements.txt", "numpy\n")
    shas["root"] = git.commit("Initial commit")

    git.write("model.py", MODEL_V2)
    shas["refactor_torch"] = git.commit("Refactor training loop to torch")

    git.write("utils.py", "def clamp(x, lo, hi):\n    return max(lo, min(x, hi))\n")
    shas["refactor_no_ml"] = git.commit("refactor helpers")

    git.write("model.py", MODEL_V3)
    shas["no_keyword"] = git.commit("Add a scale argument")

    for i in range(1, 6):
        git.write(f"pkg/m{i}.py", _module(i))
    shas["five_files"] = git.commit("Improve code quality of the numeric helpers")

    for i in range(1, 6):
        git.write(f"pkg/m{i}.py", _module(i, " * 1"))
    git.write("pkg/m6.py", _module(6))
    shas["six_files"] = git.commit("Refactoring across six modules")

    git.write("legacy.py", "import torch\n\nLOADER = torch.load\n")
    # keyword only in the message body
    shas["legacy_added"] = git.commit("add legacy loader\n\nrefactor later")
    os.remove(path / "legacy.py")
    shas["delete_legacy"] = git.commit("Refactored: drop legacy loader")

    git.write("data.py", "import pandas as pd\n\n\ndef load(p):\n    return pd.read_csv(p)\n")
    shas["add_data"] = git.commit("Enhance code: add data module")

    git("checkout", "-q", "-b", "side")
    git.write("side.py", "from sklearn.linear_model import LogisticRegression\n\nMODEL = LogisticRegression()\n")
    shas["side_branch"] = git.commit("refactor model factory on side branch")

    git("checkout", "-q", "main")
    git.write("README.md", "# fixture\n\nMore words.\n")
    shas["docs_only"] = git.commit("Update docs")

    git.tick += 1
    git("merge", "-q", "--no-ff", "-m", "Merge branch 'side'", "side")
    shas["merge"] = git("rev-parse", "HEAD")

    git.write("settings.cfg", "[x]\ny = 1\n")
    shas["config_only"] = git.commit("Code quality: tidy config")

    git.write("broken.py", "import numpy as np\n\ndef f(:\n    return np.zeros(3)\n")
    shas["broken_syntax"] = git.commit("refactor: half-finished numpy port")
    return shas
