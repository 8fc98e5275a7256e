"""Engine configuration: defaults, key=value file parsing, env overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from opendialog.errors import LoadError
from opendialog.resources import default_data_dir


@dataclass
class EngineConfig:
    # Ranking constants
    base_confidence: float = 0.6
    incoherence_penalty: float = 0.15
    repeat_penalty: float = 0.05
    length_penalty_rate: float = 0.01
    length_threshold: int = 30
    ood_threshold: float = 0.8
    # NLU
    asr_threshold: float = 0.45
    qa_min_content_words: int = 2
    # Memory
    intimacy_turns_per_level: int = 10
    flush_threshold: int = 12
    # Dialogue management
    feedback_period: int = 3  # module completions between feedback solicitations
    ood_menu_streak: int = 2  # consecutive fallbacks before the menu re-offer
    menu_size: int = 5
    inability_phrase: str = "I'm not sure"
    # Providers
    provider_timeout_ms: float = 1500.0
    providers: str = "offline"  # comma-separated provider names, queried in order
    # Paths
    data_dir: Path = field(default_factory=default_data_dir)
    flows_dir: Path | None = None  # default: <data_dir>/flows
    archive_dir: Path | None = None  # session archive (JSON-lines per session)
    # Seeding: "random" or "fixed:<int>" for reproducible sessions
    seed_policy: str = "random"

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if self.flows_dir is None:
            self.flows_dir = self.data_dir / "flows"
        self.flows_dir = Path(self.flows_dir)
        if self.archive_dir is not None:
            self.archive_dir = Path(self.archive_dir)
        self.validate()

    def validate(self) -> None:
        for name in ("base_confidence", "ood_threshold", "asr_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise LoadError(f"config {name}={value} outside [0, 1]")
        for name in ("incoherence_penalty", "repeat_penalty", "length_penalty_rate",
                     "provider_timeout_ms"):
            if getattr(self, name) < 0:
                raise LoadError(f"config {name} must be >= 0")
        for name in ("length_threshold", "intimacy_turns_per_level", "flush_threshold",
                     "feedback_period", "ood_menu_streak", "menu_size"):
            if getattr(self, name) < 0:
                raise LoadError(f"config {name} must be >= 0")
        if self.seed_policy != "random":
            kind, _, value = self.seed_policy.partition(":")
            if kind != "fixed" or not value.lstrip("-").isdigit():
                raise LoadError(f"config seed_policy {self.seed_policy!r} "
                                f"must be 'random' or 'fixed:<int>'")
        if not self.data_dir.is_dir():
            raise LoadError(f"config data_dir {self.data_dir} is not a directory")

    def default_seed(self) -> int | None:
        if self.seed_policy.startswith("fixed:"):
            return int(self.seed_policy.split(":", 1)[1])
        return None


_FIELD_TYPES = {f.name: f.type for f in fields(EngineConfig)}


def _coerce(name: str, raw: str):
    if name in ("data_dir", "flows_dir", "archive_dir"):
        return Path(raw)
    current = getattr(EngineConfig(), name)
    if isinstance(current, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def load_config(path: Path | None = None, overrides: dict | None = None) -> EngineConfig:
    """Build a config from an optional key=value file plus overrides.

    Environment variables ENGINE_CONFIG (file path) and ENGINE_DATA_DIR are
    honored; unknown keys are rejected.
    """
    values: dict = {}
    if path is None and os.environ.get("ENGINE_CONFIG"):
        path = Path(os.environ["ENGINE_CONFIG"])
    if path is not None:
        if not path.is_file():
            raise LoadError(f"config file {path} not found")
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise LoadError(f"{path.name}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in _FIELD_TYPES:
                raise LoadError(f"{path.name}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = _coerce(key, raw)
            except ValueError as exc:
                raise LoadError(f"{path.name}:{lineno}: bad value for {key}: {exc}") from exc
    if os.environ.get("ENGINE_DATA_DIR"):
        values["data_dir"] = Path(os.environ["ENGINE_DATA_DIR"])
    if overrides:
        for key, value in overrides.items():
            if key not in _FIELD_TYPES:
                raise LoadError(f"unknown config key {key!r}")
            values[key] = value
    return EngineConfig(**values)
