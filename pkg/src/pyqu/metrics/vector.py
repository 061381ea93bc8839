from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields

from pyqu.metrics.complexity import cyclomatic_complexity, halstead_volume
from pyqu.metrics.rules import (
    DEFAULT_CATALOG,
    RuleCatalog,
    advanced_feature_penalty,
    api_framework_conformance,
    defect_score,
    style_conformance,
)
from pyqu.metrics.source import SourceUnit, parse_source
from pyqu.metrics.structure import (
    annotation_doc_consistency,
    cohesion,
    coupling,
    docstring_quality,
    type_consistency,
)
from pyqu.metrics.textual import comment_readability, count_loc_and_ccr

COUNT_METRICS = ("cc", "hv", "loc", "afp", "d", "tc", "cp_internal", "cp_external")
RATIO_METRICS = ("ccr", "cr", "scs", "apifc", "adc", "ch", "dq")


@dataclass(frozen=True)
class MetricVector:
    cc: int = 0
    hv: float = 0.0
    loc: int = 0
    ccr: float = 0.0
    cr: float = 0.0
    scs: float = 1.0
    afp: int = 0
    apifc: float = 1.0
    d: float = 0.0
    adc: float = 0.0
    ch: float = 1.0
    cp_internal: int = 0
    cp_external: int = 0
    tc: int = 0
    dq: float = 0.0

    @classmethod
    def neutral(cls) -> MetricVector:
        return cls()

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> MetricVector:
        unknown = set(data) - set(cls.keys())
        if unknown:
            raise KeyError(f"unknown metric keys: {sorted(unknown)}")
        return cls(**data)


def compute_metric_vector(unit: SourceUnit | str, catalog: RuleCatalog = DEFAULT_CATALOG) -> MetricVector:
    """All file-level metrics for one unit (or raw source text)."""
    if isinstance(unit, str):
        unit = parse_source("<text>", unit)
    lines = count_loc_and_ccr(unit)
    internal, external = coupling(unit)
    return MetricVector(
        cc=cyclomatic_complexity(unit),
        hv=halstead_volume(unit),
        loc=lines.loc,
        ccr=lines.ccr,
        cr=comment_readability(unit),
        scs=style_conformance(unit, catalog, loc=lines.loc),
        afp=advanced_feature_penalty(unit, catalog),
        apifc=api_framework_conformance(unit, catalog),
        d=defect_score(unit, catalog),
        adc=annotation_doc_consistency(unit),
        ch=cohesion(unit),
        cp_internal=internal,
        cp_external=external,
        tc=type_consistency(unit),
        dq=docstring_quality(unit),
    )
