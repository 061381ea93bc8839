"""Per-quality-attribute binary classifiers."""

from pyqu.classifiers.evaluation import (
    DELTA_ACCURACY_GATE,
    Confusion,
    EvalReport,
    accuracy,
    confusion,
    evaluate,
    f1_score,
    model_select,
    precision,
    recall,
    roc_auc,
)
from pyqu.classifiers.models import (
    FAMILIES,
    FeatureDimensionError,
    HyperparameterError,
    Model,
    SingleClassError,
    Tree,
    UnknownFamilyError,
    fit,
    grow_tree,
    predict,
    predict_proba,
    validate_hyperparameters,
)
from pyqu.classifiers.persistence import (
    MODEL_FORMAT_VERSION,
    ModelFormatError,
    deserialize_model,
    load_model,
    save_model,
    serialize_model,
)
from pyqu.classifiers.sampling import Dataset, LabeledExample, smote_oversample, stratified_split
from pyqu.classifiers.training import (
    DEFAULT_GRIDS,
    TrainingResult,
    classify_commit,
    expand_grid,
    grid_search,
    train_qa,
)

__all__ = [
    "DEFAULT_GRIDS",
    "DELTA_ACCURACY_GATE",
    "FAMILIES",
    "MODEL_FORMAT_VERSION",
    "Confusion",
    "Dataset",
    "EvalReport",
    "FeatureDimensionError",
    "HyperparameterError",
    "LabeledExample",
    "Model",
    "ModelFormatError",
    "SingleClassError",
    "TrainingResult",
    "Tree",
    "UnknownFamilyError",
    "accuracy",
    "classify_commit",
    "confusion",
    "deserialize_model",
    "evaluate",
    "expand_grid",
    "f1_score",
    "fit",
    "grid_search",
    "grow_tree",
    "load_model",
    "model_select",
    "precision",
    "predict",
    "predict_proba",
    "recall",
    "roc_auc",
    "save_model",
    "serialize_model",
    "smote_oversample",
    "stratified_split",
    "train_qa",
    "validate_hyperparameters",
]
