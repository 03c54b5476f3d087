"""Run configuration: flat key=value files with dotted sections, flag overrides."""

from __future__ import annotations

from dataclasses import dataclass, fields

__all__ = ["TrainConfig", "ConfigError", "parse_config_file", "build_train_config", "config_to_dict", "CONFIG_KEYS"]


class ConfigError(ValueError):
    pass


@dataclass
class TrainConfig:
    mode: str = "lookup"
    seed: int = 0
    embedding_dim: int = 128
    num_layers: int = 3
    hidden_size: int = 128
    residual: bool = True
    dropout_retention: float = 0.5
    head_hidden: int = 256
    learning_rate: float | None = None  # mode default applies when unset
    batch_size: int = 32
    max_epochs: int = 20
    patience: int = 5
    clip_norm: float = 5.0
    max_len: int = 100
    min_frequency: int = 1
    train_path: str | None = None
    dev_path: str | None = None
    data_format: str = "jsonl"
    embeddings_path: str | None = None

    def resolved_learning_rate(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 2e-5 if self.mode == "contextual" else 1e-3

    def validate(self, require_data: bool = False):
        if self.mode not in ("lookup", "contextual"):
            raise ConfigError(f"model.mode: unknown mode '{self.mode}'")
        if not (0.0 < self.dropout_retention <= 1.0):
            raise ConfigError(
                f"model.dropout_retention: must be in (0, 1], got {self.dropout_retention}"
            )
        for key, value in (
            ("model.embedding_dim", self.embedding_dim),
            ("model.layers", self.num_layers),
            ("model.hidden", self.hidden_size),
            ("model.head_hidden", self.head_hidden),
            ("train.batch_size", self.batch_size),
            ("data.max_len", self.max_len),
            ("data.min_frequency", self.min_frequency),
        ):
            if value < 1:
                raise ConfigError(f"{key}: must be >= 1, got {value}")
        if self.max_epochs < 0:
            raise ConfigError(f"train.max_epochs: must be >= 0, got {self.max_epochs}")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ConfigError(f"train.learning_rate: must be > 0, got {self.learning_rate}")
        if require_data:
            if not self.train_path:
                raise ConfigError("data.train_path: missing dataset path")
            if not self.dev_path:
                raise ConfigError("data.dev_path: missing dataset path")
            if self.mode == "contextual" and not self.embeddings_path:
                raise ConfigError("data.embeddings_path: contextual mode needs a store path")


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("on", "true", "1", "yes"):
        return True
    if low in ("off", "false", "0", "no"):
        return False
    raise ValueError(f"expected on/off, got '{raw}'")


# config-file key -> (dataclass field, parser)
CONFIG_KEYS = {
    "model.mode": ("mode", str),
    "model.embedding_dim": ("embedding_dim", int),
    "model.layers": ("num_layers", int),
    "model.hidden": ("hidden_size", int),
    "model.residual": ("residual", _parse_bool),
    "model.dropout_retention": ("dropout_retention", float),
    "model.head_hidden": ("head_hidden", int),
    "train.seed": ("seed", int),
    "train.learning_rate": ("learning_rate", float),
    "train.batch_size": ("batch_size", int),
    "train.max_epochs": ("max_epochs", int),
    "train.patience": ("patience", int),
    "train.clip_norm": ("clip_norm", float),
    "data.max_len": ("max_len", int),
    "data.min_frequency": ("min_frequency", int),
    "data.train_path": ("train_path", str),
    "data.dev_path": ("dev_path", str),
    "data.format": ("data_format", str),
    "data.embeddings_path": ("embeddings_path", str),
}


def parse_config_file(path) -> dict[str, str]:
    """key=value lines; blank lines and '#' comments ignored."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got '{stripped}'")
            key, _, raw = stripped.partition("=")
            values[key.strip()] = raw.strip()
    return values


def build_train_config(file_values: dict[str, str] | None = None, overrides: dict | None = None) -> TrainConfig:
    """Apply config-file values then typed overrides; unknown keys are errors."""
    cfg = TrainConfig()
    for key, raw in (file_values or {}).items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key '{key}'")
        field_name, parse = CONFIG_KEYS[key]
        try:
            setattr(cfg, field_name, parse(raw))
        except ValueError as e:
            raise ConfigError(f"config key '{key}': {e}") from None
    valid_fields = {f.name for f in fields(TrainConfig)}
    for name, value in (overrides or {}).items():
        if name not in valid_fields:
            raise ConfigError(f"unknown config field '{name}'")
        if value is not None:
            setattr(cfg, name, value)
    return cfg


def config_to_dict(cfg: TrainConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(TrainConfig)}
