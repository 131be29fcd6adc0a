"""Run configuration and the flat ``key = value`` config format.

Nested sections are flattened with dots (``reg.t_beta``).  Resolution order is
defaults, then the config file, then ``--set`` overrides.  Unknown keys are
errors.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .regularizer import RegularizerConfig


@dataclass
class DataConfig:
    source: str = "synthetic"  # synthetic | idx
    images: str = ""
    labels: str = ""
    limit: int = 10000
    synthetic_n: int = 2048


@dataclass
class GradcheckConfig:
    corrupt: str = ""  # test hook: mu0 | beta1 | entropy | regularizer | network
    clouds: int = 50
    n_params: int = 20


@dataclass
class TrainConfig:
    seed: int = 0
    steps: int = 5000
    batch_size: int = 64
    lr: float = 0.0008
    beta_commit: float = 0.25
    hcvq_enabled: bool = True
    n_codes: int = 128
    code_dim: int = 64
    hidden: int = 256
    reg: RegularizerConfig = field(default_factory=RegularizerConfig)
    data: DataConfig = field(default_factory=DataConfig)
    gradcheck: GradcheckConfig = field(default_factory=GradcheckConfig)

    def validate(self) -> "TrainConfig":
        if not self.lr > 0:
            raise ConfigError(f"lr must be > 0, got {self.lr}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.n_codes < 2:
            raise ConfigError(f"n_codes must be >= 2, got {self.n_codes}")
        if self.data.source not in ("synthetic", "idx"):
            raise ConfigError(f"data.source must be synthetic or idx, got {self.data.source!r}")
        try:
            RegularizerConfig(**dataclasses.asdict(self.reg))
        except ValueError as exc:
            raise ConfigError(f"reg: {exc}") from exc
        return self


# config-file spelling for fields whose names are Python keywords
_ALIASES = {"lam": "lambda"}
_REVERSE = {v: k for k, v in _ALIASES.items()}


def _walk(obj, prefix=""):
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        key = prefix + _ALIASES.get(f.name, f.name)
        if dataclasses.is_dataclass(value):
            yield from _walk(value, key + ".")
        else:
            yield key, obj, f.name, value


def flatten(cfg: TrainConfig) -> dict:
    """Fully resolved config as an ordered flat dict."""
    return {key: value for key, _, _, value in _walk(cfg)}


def _parse(raw: str, current):
    raw = raw.strip()
    if isinstance(current, bool):
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1]
    return raw


def set_value(cfg: TrainConfig, key: str, raw: str) -> None:
    for k, owner, name, current in _walk(cfg):
        if k == key:
            try:
                setattr(owner, name, _parse(raw, current))
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from exc
            return
    raise ConfigError(f"unknown config key {key!r}")


def parse_assignment(text: str, where: str = "--set") -> tuple[str, str]:
    if "=" not in text:
        raise ConfigError(f"{where}: expected key=value, got {text!r}")
    key, _, value = text.partition("=")
    key = key.strip()
    if not key:
        raise ConfigError(f"{where}: empty key in {text!r}")
    return key, value.strip()


def load_config(path: str | Path | None = None, overrides: list[str] | tuple = ()) -> TrainConfig:
    cfg = TrainConfig()
    if path:
        path = Path(path)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
        for lineno, line in enumerate(lines, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, value = parse_assignment(line, f"{path}:{lineno}")
            set_value(cfg, key, value)
    for item in overrides:
        key, value = parse_assignment(item)
        set_value(cfg, key, value)
    return cfg.validate()


def dump_config(cfg: TrainConfig) -> str:
    return "".join(f"{k} = {str(v).lower() if isinstance(v, bool) else v}\n" for k, v in flatten(cfg).items())
