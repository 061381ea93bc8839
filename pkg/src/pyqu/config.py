"""Toolkit configuration: file loading, environment overrides and seeds."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import tomli

from pyqu.classifiers.evaluation import DELTA_ACCURACY_GATE
from pyqu.classifiers.models import DEFAULT_THRESHOLD
from pyqu.classifiers.training import DEFAULT_GRIDS, grid_configs
from pyqu.mining import FilterConfig

ENV_PREFIX = "PYQU_"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ToolkitConfig:
    filter: FilterConfig = field(default_factory=FilterConfig)
    taxonomy_path: str | None = None
    grids: dict[str, dict[str, list]] = field(default_factory=lambda: json.loads(json.dumps(DEFAULT_GRIDS)))
    seed: int = 0
    threshold: float = DEFAULT_THRESHOLD
    train_frac: float = 0.7
    smote_k: int = 5
    delta_gate: float = DELTA_ACCURACY_GATE
    us_uses_un_score: bool = False
    output_dir: str = "pyqu-out"
    jobs: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must lie in [0, 1], got {self.threshold}")
        if not 0.0 < self.train_frac < 1.0:
            raise ConfigError(f"train_frac must lie in (0, 1), got {self.train_frac}")
        if self.smote_k < 1:
            raise ConfigError("smote_k must be >= 1")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            grid_configs(self.grids)
        except ValueError as exc:
            raise ConfigError(f"grids: {exc}") from exc

    @property
    def effective_jobs(self) -> int:
        return self.jobs or os.cpu_count() or 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["filter"] = {k: list(v) if isinstance(v, tuple) else v for k, v in d["filter"].items()}
        return d


_SCALARS = {
    "taxonomy_path": str,
    "seed": int,
    "threshold": float,
    "train_frac": float,
    "smote_k": int,
    "delta_gate": float,
    "output_dir": str,
    "jobs": int,
}


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def config_from_mapping(data: Mapping[str, Any]) -> ToolkitConfig:
    known = set(_SCALARS) | {"filter", "grids", "us_uses_un_score"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs: dict[str, Any] = {}
    for key, cast in _SCALARS.items():
        if key in data and data[key] is not None:
            kwargs[key] = cast(data[key])
    if "us_uses_un_score" in data:
        kwargs["us_uses_un_score"] = bool(data["us_uses_un_score"])
    if "filter" in data:
        try:
            kwargs["filter"] = FilterConfig.from_mapping(data["filter"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"filter: {exc}") from exc
    if "grids" in data:
        kwargs["grids"] = {fam: dict(g) for fam, g in data["grids"].items()}
    return ToolkitConfig(**kwargs)


def read_config_file(path: str | Path) -> dict:
    path = Path(path)
    raw = path.read_bytes()
    try:
        if path.suffix.lower() == ".json":
            return json.loads(raw)
        return tomli.loads(raw.decode("utf-8"))
    except (ValueError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def env_overrides(environ: Mapping[str, str] | None = None) -> dict:
    """Config keys set through ``PYQU_*`` variables."""
    environ = os.environ if environ is None else environ
    out: dict[str, Any] = {}
    for key in _SCALARS:
        name = ENV_PREFIX + key.upper()
        if name in environ:
            out[key] = environ[name]
    if ENV_PREFIX + "US_USES_UN_SCORE" in environ:
        out["us_uses_un_score"] = _bool(environ[ENV_PREFIX + "US_USES_UN_SCORE"])
    filt = {}
    for key in ("keywords", "ml_libraries"):
        name = ENV_PREFIX + key.upper()
        if name in environ:
            filt[key] = tuple(s.strip() for s in environ[name].split(",") if s.strip())
    if ENV_PREFIX + "MAX_PY_FILES" in environ:
        filt["max_py_files"] = int(environ[ENV_PREFIX + "MAX_PY_FILES"])
    if filt:
        out["filter"] = filt
    return out


def load_config(path: str | Path | None = None, environ: Mapping[str, str] | None = None) -> ToolkitConfig:
    """Defaults, then the config file, then ``PYQU_*`` environment variables."""
    data: dict[str, Any] = read_config_file(path) if path else {}
    env = env_overrides(environ)
    if "filter" in env:
        data["filter"] = {**data.get("filter", {}), **env.pop("filter")}
    data.update(env)
    try:
        return config_from_mapping(data)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def with_overrides(config: ToolkitConfig, **changes) -> ToolkitConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    if "max_py_files" in changes:
        changes["filter"] = replace(config.filter, max_py_files=changes.pop("max_py_files"))
    return replace(config, **changes)


def derive_seed(base: int, stage: str) -> int:
    """Stable per-stage seed fanned out from the single run seed."""
    digest = hashlib.sha256(f"{base}:{stage}".encode()).digest()
    return int.from_bytes(digest[:4], "big")
