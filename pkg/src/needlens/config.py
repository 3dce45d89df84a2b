"""Pipeline configuration loaded from a JSON file with CLI overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(Exception):
    pass


@dataclass
class PipelineConfig:
    registry_path: str = "registry.csv"
    feedback_path: str = "feedback.jsonl"
    lexicon_path: str | None = None  # None -> shipped seed lexicon
    ontology_path: str | None = None  # None -> shipped sample ontology
    stopwords_path: str | None = None  # None -> shipped list
    valence_path: str | None = None  # None -> shipped lexicon
    output_dir: str = "out"
    boilerplate: list[str] = field(default_factory=list)
    min_df: int = 2
    max_df_frac: float = 0.5
    topics: int = 10
    topic_candidates: list[int] = field(default_factory=lambda: [5, 10, 15, 20])
    select_topics: bool = False
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 2000
    burn_in: int = 500
    sample_lag: int = 10
    heldout_fraction: float = 0.1
    tau: float = 0.25
    disparity_threshold: float = 1.25
    llm_url: str | None = None
    bind_host: str = "127.0.0.1"
    bind_port: int = 8400
    seed: int = 0

    @classmethod
    def load(cls, path: str | None) -> "PipelineConfig":
        if path is None:
            return cls()
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**obj)
        base = Path(path).parent
        for attr in ("registry_path", "feedback_path", "output_dir"):
            value = getattr(cfg, attr)
            if value and not Path(value).is_absolute():
                setattr(cfg, attr, str(base / value))
        for attr in ("lexicon_path", "ontology_path", "stopwords_path", "valence_path"):
            value = getattr(cfg, attr)
            if value and not Path(value).is_absolute():
                setattr(cfg, attr, str(base / value))
        return cfg

    def validate_inputs(self) -> None:
        for attr in ("registry_path", "feedback_path"):
            p = getattr(self, attr)
            if not Path(p).exists():
                raise ConfigError(f"{attr} does not exist: {p}")
        for attr in ("lexicon_path", "ontology_path", "stopwords_path", "valence_path"):
            p = getattr(self, attr)
            if p is not None and not Path(p).exists():
                raise ConfigError(f"{attr} does not exist: {p}")
