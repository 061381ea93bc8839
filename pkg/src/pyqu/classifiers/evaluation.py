from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from pyqu.classifiers.models import Model, SingleClassError, predict_proba
from pyqu.classifiers.sampling import Dataset
from pyqu.kernels import auc_statistic

DELTA_ACCURACY_GATE = 0.1


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(y_true, y_pred) -> Confusion:
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape:
        raise ValueError("label and prediction lengths differ")
    return Confusion(
        int(((t == 1) & (p == 1)).sum()),
        int(((t == 0) & (p == 1)).sum()),
        int(((t == 1) & (p == 0)).sum()),
        int(((t == 0) & (p == 0)).sum()),
    )


def accuracy(c: Confusion) -> float:
    return (c.tp + c.tn) / c.total if c.total else 0.0


def precision(c: Confusion) -> float:
    return c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0


def recall(c: Confusion) -> float:
    return c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0


def f1_score(c: Confusion) -> float:
    p, r = precision(c), recall(c)
    return 2 * p * r / (p + r) if p + r else 0.0


def roc_auc(scores, labels) -> float:
    s = np.ascontiguousarray(scores, dtype=np.float64)
    y = np.ascontiguousarray(labels, dtype=np.int64)
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    if not ((y == 0).any() and (y == 1).any()):
        raise SingleClassError("ROC-AUC is undefined when only one class is present")
    return auc_statistic(s, y)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    roc_auc: float
    train_accuracy: float
    delta_accuracy: float

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(model: Model, train: Dataset, test: Dataset, threshold: float | None = None) -> EvalReport:
    t = model.threshold if threshold is None else threshold
    p_test = predict_proba(model, test.X)
    p_train = predict_proba(model, train.X)
    c = confusion(test.y, p_test >= t)
    train_acc = accuracy(confusion(train.y, p_train >= t))
    test_acc = accuracy(c)
    return EvalReport(
        accuracy=test_acc,
        precision=precision(c),
        recall=recall(c),
        f1=f1_score(c),
        roc_auc=roc_auc(p_test, test.y),
        train_accuracy=train_acc,
        delta_accuracy=abs(train_acc - test_acc),
    )


def _hp_key(model: Model) -> str:
    return repr(sorted(model.hyperparameters.items(), key=lambda kv: kv[0]))


def model_select(candidates: Sequence[tuple[Model, EvalReport]], gate: float = DELTA_ACCURACY_GATE) -> tuple[Model, EvalReport]:
    """Pick the best candidate that passes the overfitting gate.

    Among candidates with ``delta_accuracy <= gate`` the highest F1 wins,
    ties broken by ROC-AUC, then accuracy, then family name. When no
    candidate passes, the one with the smallest gap is returned.
    """
    if not candidates:
        raise ValueError("model_select needs at least one candidate")
    passing = [c for c in candidates if c[1].delta_accuracy <= gate]
    if not passing:
        return min(candidates, key=lambda c: (c[1].delta_accuracy, -c[1].f1, c[0].family, _hp_key(c[0])))
    return min(
        passing,
        key=lambda c: (-c[1].f1, -c[1].roc_auc, -c[1].accuracy, c[0].family, _hp_key(c[0])),
    )
