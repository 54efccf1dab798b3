"""Experiment configuration: YAML file -> validated, frozen dataclasses."""
from __future__ import annotations

import dataclasses
import difflib
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .errors import ConfigError, MissingRequired, ParseError, UnknownKey
from .learners.specs import SPECS, make_spec
from .preprocess import DEFAULT_COMPOSITES, DEFAULT_DROPS


@dataclass(frozen=True)
class PipelineSection:
    drop_columns: tuple = DEFAULT_DROPS
    skew_threshold: float = 0.5
    composites: tuple = DEFAULT_COMPOSITES
    standardize: bool = True
    target: str = "Attrition"


@dataclass(frozen=True)
class SplitSection:
    test_fraction: float = 0.2


@dataclass(frozen=True)
class SmoteSection:
    enabled: bool = True
    k_neighbors: int = 5
    target_ratio: float = 1.0


@dataclass(frozen=True)
class LlmSection:
    enabled: bool = False
    service_url: str = "http://127.0.0.1:8765"
    base_model: str = "gpt-3.5-turbo"
    api_key_env: str = "ATTRITION_LLM_API_KEY"
    corpus_file: str = "corpus.jsonl"
    include_synthetic: bool = False
    parallelism: int = 4
    max_tokens: int = 50


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    dataset: Optional[str] = None
    output_dir: str = "runs/default"
    pipeline: PipelineSection = PipelineSection()
    split: SplitSection = SplitSection()
    smote: SmoteSection = SmoteSection()
    learners: dict = field(default_factory=lambda: {name: {} for name in SPECS})
    llm: LlmSection = LlmSection()

    def __post_init__(self):
        _validate(self)

    def learner_names(self) -> list[str]:
        """Configured learners in canonical report order (independent of file order)."""
        return [name for name in SPECS if name in self.learners]

    def learner_specs(self) -> dict:
        return {name: make_spec(name, **self.learners[name]) for name in self.learner_names()}

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _validate(cfg: ExperimentConfig):
    if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {cfg.seed!r}")
    if not 0 < cfg.split.test_fraction < 1:
        raise ConfigError(f"split.test_fraction must be in (0, 1), got {cfg.split.test_fraction}")
    if cfg.pipeline.skew_threshold < 0:
        raise ConfigError("pipeline.skew_threshold must be >= 0")
    if cfg.smote.k_neighbors < 1:
        raise ConfigError("smote.k_neighbors must be >= 1")
    if not 0 < cfg.smote.target_ratio <= 1:
        raise ConfigError("smote.target_ratio must be in (0, 1]")
    if cfg.llm.parallelism < 1:
        raise ConfigError("llm.parallelism must be >= 1")
    if not cfg.learners:
        raise ConfigError("at least one learner must be configured")
    for name, overrides in cfg.learners.items():
        if name not in SPECS:
            raise UnknownKey(f"learners.{name}" + _hint(name, SPECS))
        try:
            make_spec(name, **overrides)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"learners.{name}: {exc}") from None
    if cfg.dataset is not None and not Path(cfg.dataset).is_file():
        raise ConfigError(f"dataset file not found: {cfg.dataset}")


def _hint(key, options) -> str:
    close = difflib.get_close_matches(key, list(options), n=1)
    return f" (did you mean {close[0]!r}?)" if close else ""


def _coerce_composites(value, where):
    if isinstance(value, dict):
        items = value.items()
    elif isinstance(value, (list, tuple)):
        items = value
    else:
        raise ConfigError(f"{where}: expected a mapping of name -> source columns")
    return tuple((str(name), tuple(srcs)) for name, srcs in items)


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'}: expected a mapping, got {type(data).__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            path = f"{where}.{key}" if where else key
            raise UnknownKey(f"unknown key {path!r}" + _hint(key, known))
    kwargs = {}
    for name, f in known.items():
        if name not in data:
            if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
                raise MissingRequired(f"required key {name!r} is missing")
            continue
        value = data[name]
        path = f"{where}.{name}" if where else name
        default = f.default
        if dataclasses.is_dataclass(default):
            value = _build(type(default), value or {}, path)
        elif name == "composites":
            value = _coerce_composites(value, path)
        elif name == "learners":
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: expected a mapping of learner -> overrides")
            value = {str(k): dict(v or {}) for k, v in value.items()}
        elif isinstance(default, tuple):
            value = tuple(value)
        kwargs[name] = value
    return cls(**kwargs)


def config_from_dict(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    data = dict(data)
    if "seed" not in data or data["seed"] is None:
        raise MissingRequired("'seed' is required (no wall-clock seeding)")
    if data.get("dataset") and base_dir is not None:
        path = Path(data["dataset"])
        data["dataset"] = str(path if path.is_absolute() else (base_dir / path).resolve())
    return _build(ExperimentConfig, data, "")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ParseError(line, getattr(exc, "problem", None) or str(exc)) from None
    if data is None:
        raise MissingRequired(f"config {path} is empty; 'seed' is required")
    return config_from_dict(data, base_dir=path.parent)


def default_config_path() -> Path:
    return Path(str(resources.files("attrition") / "configs" / "default.yaml"))


def default_config() -> ExperimentConfig:
    return load_config(default_config_path())


def config_hash(cfg: ExperimentConfig) -> str:
    """sha256 of the canonical JSON of every result-affecting field.

    ``output_dir`` is excluded so the same experiment written to two places
    hashes the same.
    """
    doc = cfg.to_dict()
    doc.pop("output_dir")
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()
