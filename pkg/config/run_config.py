"""
Per-run configuration files.

A run config is a YAML document merged under explicit CLI flags:

    map:
      form: standard
      delta: "0.05"
      f: "z + sin(2*pi*z) + 0.0127464"
    seed: 7
    workers: 4
    options:
      samples: 1000
"""
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator


def parse_complex(text: Union[str, int, float, complex]) -> complex:
    """Parse '0.5', '-1', '1+2i' or '1+2j' into a complex number."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    cleaned = text.replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError as exc:
        raise ValueError(f"not a complex literal: {text!r}") from exc


class MapConfig(BaseModel):
    """Map block of a run config."""

    form: Literal["standard", "alternative"] = "standard"
    f: str
    delta: Optional[complex] = None
    a: Optional[complex] = None

    @field_validator("delta", "a", mode="before")
    @classmethod
    def _complex_literal(cls, value: Any) -> Optional[complex]:
        if value is None:
            return None
        return parse_complex(value)

    @model_validator(mode="after")
    def _form_parameter(self) -> "MapConfig":
        if self.form == "standard" and self.delta is None:
            raise ValueError("standard form needs delta")
        if self.form == "alternative" and self.a is None:
            raise ValueError("alternative form needs a")
        return self


class RunConfig(BaseModel):
    """Top-level run config."""

    map: Optional[MapConfig] = None
    seed: Optional[int] = None
    workers: Optional[int] = None
    options: Dict[str, Any] = Field(default_factory=dict)

    def merged(self, flags: Dict[str, Any]) -> Dict[str, Any]:
        """Overlay explicit (non-None) CLI flags on the config options."""
        merged: Dict[str, Any] = dict(self.options)
        if self.seed is not None:
            merged["seed"] = self.seed
        if self.workers is not None:
            merged["workers"] = self.workers
        merged.update({key: value for key, value in flags.items() if value is not None})
        return merged


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Load and validate a YAML run config."""
    from src.utils.error_handler import ConfigurationError

    try:
        raw = yaml.safe_load(Path(path).read_text()) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(f"invalid config {path}: {exc}") from exc
