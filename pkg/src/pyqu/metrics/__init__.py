"""File-level code metrics computed from Python source."""

from pyqu.metrics.complexity import cyclomatic_complexity, halstead_counts, halstead_volume
from pyqu.metrics.rules import (
    DEFAULT_CATALOG,
    ApiRule,
    CatalogError,
    LintFinding,
    RuleCatalog,
    advanced_feature_penalty,
    api_framework_conformance,
    collect_findings,
    defect_score,
    style_conformance,
)
from pyqu.metrics.source import EntityIndex, SourceUnit, parse_source, read_source
from pyqu.metrics.structure import (
    annotation_doc_consistency,
    cohesion,
    coupling,
    docstring_quality,
    type_consistency,
)
from pyqu.metrics.textual import LineStats, comment_readability, count_loc_and_ccr
from pyqu.metrics.vector import COUNT_METRICS, RATIO_METRICS, MetricVector, compute_metric_vector

__all__ = [
    "COUNT_METRICS",
    "DEFAULT_CATALOG",
    "RATIO_METRICS",
    "ApiRule",
    "CatalogError",
    "EntityIndex",
    "LineStats",
    "LintFinding",
    "MetricVector",
    "RuleCatalog",
    "SourceUnit",
    "advanced_feature_penalty",
    "annotation_doc_consistency",
    "api_framework_conformance",
    "cohesion",
    "collect_findings",
    "comment_readability",
    "compute_metric_vector",
    "count_loc_and_ccr",
    "coupling",
    "cyclomatic_complexity",
    "defect_score",
    "docstring_quality",
    "halstead_counts",
    "halstead_volume",
    "parse_source",
    "read_source",
    "style_conformance",
    "type_consistency",
]
