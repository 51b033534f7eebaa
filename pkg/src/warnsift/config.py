"""Model and training configuration.

Config files are flat ``key = value`` text, one setting per line, with
``#`` comments.  Keys mirror the :class:`ModelConfig` field names; any
unknown key is an error so typos fail loudly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass
class ModelConfig:
    vocab_size: int = 100_000
    embed_dim: int = 512
    hidden_dim: int = 512  # per direction
    function_len: int = 256
    field_len: int = 64
    slice_len: int = 256
    message_len: int = 32
    attr_embed_dim: int = 32
    focal_alpha: float = 0.05
    focal_gamma: float = 2.0
    learning_rate: float = 5e-5
    batch_size: int = 64
    max_epochs: int = 30
    threshold: float = 0.5
    plateau_patience: int = 2
    lr_decay: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("vocab_size", "embed_dim", "hidden_dim", "attr_embed_dim", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("function_len", "field_len", "slice_len", "message_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.focal_alpha < 1.0:
            raise ValueError("focal_alpha must lie in (0, 1)")
        if self.focal_gamma < 0.0:
            raise ValueError("focal_gamma must be non-negative")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if not 0.0 < self.lr_decay < 1.0:
            raise ValueError("lr_decay must lie in (0, 1)")
        if self.plateau_patience < 1:
            raise ValueError("plateau_patience must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be positive")

    @property
    def channel_lengths(self) -> tuple[int, int, int, int]:
        return (self.function_len, self.field_len, self.slice_len, self.message_len)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "ModelConfig":
        known = {f.name: f.type for f in dataclasses.fields(cls)}
        unknown = set(values) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**values)


def _parse_value(name: str, text: str) -> int | float:
    field_types = {f.name: f.type for f in dataclasses.fields(ModelConfig)}
    if name not in field_types:
        raise ValueError(f"unknown config key: {name}")
    if field_types[name] == "int" or field_types[name] is int:
        return int(text)
    return float(text)


def load_config(path) -> ModelConfig:
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            name, _, text = line.partition("=")
            name = name.strip()
            try:
                values[name] = _parse_value(name, text.strip())
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return ModelConfig(**values)


def save_config(config: ModelConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for field in dataclasses.fields(ModelConfig):
            fh.write(f"{field.name} = {getattr(config, field.name)}\n")


__all__ = ["ModelConfig", "load_config", "save_config"]
