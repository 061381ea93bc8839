"""Grid search, the per-QA training pipeline and commit classification."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from pyqu.classifiers.evaluation import DELTA_ACCURACY_GATE, EvalReport, evaluate, model_select
from pyqu.classifiers.models import Model, fit, predict_proba, validate_hyperparameters
from pyqu.classifiers.sampling import Dataset, smote_oversample, stratified_split
from pyqu.delta import QAS, CommitMetricDelta, assemble_features

log = logging.getLogger(__name__)

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "decision_tree": {"max_depth": [3, 5, 8, None], "min_samples_leaf": [1, 5, 10]},
    "random_forest": {"n_trees": [50, 200]},
    "gradient_boosting": {"n_stages": [50, 200], "learning_rate": [0.05, 0.1]},
    "logistic": {"l2": [0.0, 0.01]},
}


def expand_grid(grid: Mapping[str, Sequence]) -> list[dict[str, Any]]:
    keys = sorted(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def grid_configs(grids: Mapping[str, Mapping[str, Sequence]] | None = None) -> list[tuple[str, dict]]:
    grids = DEFAULT_GRIDS if grids is None else grids
    configs = []
    for family in sorted(grids):
        for hp in expand_grid(grids[family]):
            validate_hyperparameters(family, hp)
            configs.append((family, hp))
    return configs


def _fit_eval(args):
    family, hp, train, test, seed, qa = args
    model = fit(family, train, hp, seed=seed, qa=qa)
    return model, evaluate(model, train, test)


def grid_search(
    train: Dataset,
    test: Dataset,
    grids: Mapping[str, Mapping[str, Sequence]] | None = None,
    seed: int = 0,
    jobs: int = 1,
    qa: str | None = None,
) -> list[tuple[Model, EvalReport]]:
    """Fit and evaluate every (family, hyperparameters) cell.

    Results come back in grid order whatever the number of workers.
    """
    tasks = [(family, hp, train, test, seed, qa) for family, hp in grid_configs(grids)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_fit_eval, tasks))
    return [_fit_eval(t) for t in tasks]


@dataclass
class TrainingResult:
    qa: str
    model: Model
    report: EvalReport
    candidates: list[tuple[Model, EvalReport]] = field(repr=False, default_factory=list)
    n_train: int = 0
    n_test: int = 0

    def summary(self) -> dict:
        return {
            "qa": self.qa,
            "family": self.model.family,
            "hyperparameters": self.model.hyperparameters,
            "n_train": self.n_train,
            "n_test": self.n_test,
            **self.report.to_dict(),
        }


def train_qa(
    data: Dataset,
    qa: str,
    seed: int = 0,
    grids: Mapping[str, Mapping[str, Sequence]] | None = None,
    train_frac: float = 0.7,
    smote_k: int = 5,
    jobs: int = 1,
    gate: float = DELTA_ACCURACY_GATE,
) -> TrainingResult:
    """SMOTE, stratified split, grid fit and model selection for one QA."""
    balanced = smote_oversample(data, k=smote_k, seed=seed)
    train, test = stratified_split(balanced, train_frac=train_frac, seed=seed)
    candidates = grid_search(train, test, grids, seed=seed, jobs=jobs, qa=qa)
    model, report = model_select(candidates, gate=gate)
    log.info("%s: selected %s f1=%.3f acc=%.3f", qa, model.family, report.f1, report.accuracy)
    return TrainingResult(qa, model, report, candidates, len(train), len(test))


def classify_commit(
    models: Mapping[str, Model],
    delta: CommitMetricDelta,
    qas: Sequence[str] | None = None,
    threshold: float | None = None,
) -> dict[str, dict[str, Any]]:
    """Per-QA probability and label for one commit.

    When the US model was trained on three features, the understandability
    probability (which must then be among the models) stands in for the raw
    understandability deltas.
    """
    qas = [q.upper() for q in (qas or QAS) if q.upper() in models]
    out: dict[str, dict[str, Any]] = {}
    un_prob = None
    for qa in sorted(qas, key=lambda q: q != "UN"):
        model = models[qa]
        un_score = None
        if qa == "US" and model.dim == 3:
            if "UN" not in models:
                raise ValueError("US model expects an understandability score but no UN model was given")
            un_score = un_prob if un_prob is not None else predict_proba(models["UN"], assemble_features(delta, "UN").values)
        fv = assemble_features(delta, qa, un_score=un_score)
        p = predict_proba(model, fv.values)
        t = model.threshold if threshold is None else threshold
        out[qa] = {"probability": p, "enhanced": p >= t}
        if qa == "UN":
            un_prob = p
    return {qa: out[qa] for qa in QAS if qa in out}
