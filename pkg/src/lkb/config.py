"""Service configuration.

Settings come from a flat key-value file with dotted keys
(``index.nlist=100``), environment variables prefixed ``LKB_`` (dots
become underscores, so ``LKB_INDEX_NLIST=100``), and explicit overrides
such as CLI flags. Precedence: override > environment > file > default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ConfigError

ENV_PREFIX = "LKB_"

_DEFAULTS: dict[str, str] = {
    "listen.host": "127.0.0.1",
    "listen.port": "8080",
    "data.dir": "./lkb-data",
    "splitter.strategy": "recursive",
    "splitter.chunk_size": "500",
    "splitter.overlap": "50",
    "embedder.kind": "reference",
    "embedder.dim": "64",
    "embedder.vocab": "4096",
    "embedder.heads": "4",
    "embedder.seed": "42",
    "embedder.url": "",
    "embedder.timeout_ms": "5000",
    "index.mode": "flat",
    "index.nlist": "0",  # 0 = floor(sqrt(N)) clamped to [1, 4096]
    "index.nprobe": "8",
    "index.pq_m": "8",
    "index.pq_bits": "8",
    "index.seed": "42",
    "retrieval.k": "4",
    "retrieval.budget": "2048",
    "llm.url": "",
    "llm.model": "local-model",
    "llm.timeout_ms": "30000",
    "llm.max_retries": "2",
    "llm.temperature": "0.0",
    "llm.mock": "true",
}

_INT_KEYS = {
    "listen.port",
    "splitter.chunk_size",
    "splitter.overlap",
    "embedder.dim",
    "embedder.vocab",
    "embedder.heads",
    "embedder.seed",
    "embedder.timeout_ms",
    "index.nlist",
    "index.nprobe",
    "index.pq_m",
    "index.pq_bits",
    "index.seed",
    "retrieval.k",
    "retrieval.budget",
    "llm.timeout_ms",
    "llm.max_retries",
}
_FLOAT_KEYS = {"llm.temperature"}
_BOOL_KEYS = {"llm.mock"}


@dataclass
class ServiceConfig:
    values: dict[str, object] = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def data_dir(self) -> str:
        return str(self.values["data.dir"])

    def as_dict(self) -> dict[str, object]:
        return dict(self.values)


def _parse_value(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            lowered = raw.strip().lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc


def _read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
            key, _, value = stripped.partition("=")
            out[key.strip()] = value.strip()
    return out


def _validate(values: dict[str, object]) -> None:
    checks = [
        ("splitter.chunk_size", lambda v: v >= 1, "must be >= 1"),
        ("splitter.overlap", lambda v: v >= 0, "must be >= 0"),
        ("embedder.dim", lambda v: v >= 1, "must be >= 1"),
        ("embedder.vocab", lambda v: v >= 1, "must be >= 1"),
        ("embedder.heads", lambda v: v >= 1, "must be >= 1"),
        ("index.nlist", lambda v: v >= 0, "must be >= 0 (0 = auto)"),
        ("index.nprobe", lambda v: v >= 1, "must be >= 1"),
        ("index.pq_m", lambda v: v >= 1, "must be >= 1"),
        ("index.pq_bits", lambda v: 1 <= v <= 16, "must be in [1, 16]"),
        ("retrieval.k", lambda v: v >= 1, "must be >= 1"),
        ("retrieval.budget", lambda v: v >= 1, "must be >= 1"),
        ("llm.timeout_ms", lambda v: v > 0, "must be > 0"),
        ("llm.max_retries", lambda v: v >= 0, "must be >= 0"),
        ("embedder.timeout_ms", lambda v: v > 0, "must be > 0"),
    ]
    for key, ok, message in checks:
        if not ok(values[key]):
            raise ConfigError(f"{key} {message}, got {values[key]}")
    if values["splitter.overlap"] >= values["splitter.chunk_size"]:
        raise ConfigError("splitter.overlap must be smaller than splitter.chunk_size")
    if values["splitter.strategy"] not in ("fixed", "recursive", "token"):
        raise ConfigError(f"unknown splitter.strategy {values['splitter.strategy']!r}")
    if values["embedder.kind"] not in ("reference", "remote"):
        raise ConfigError(f"embedder.kind must be reference or remote")
    if values["embedder.kind"] == "remote" and not values["embedder.url"]:
        raise ConfigError("embedder.url is required when embedder.kind=remote")
    if values["index.mode"] not in ("flat", "ivf", "ivfpq"):
        raise ConfigError(f"unknown index.mode {values['index.mode']!r}")


def load_config(
    path: str | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, str] | None = None,
) -> ServiceConfig:
    """Resolve configuration from all sources in precedence order."""
    environ = os.environ if env is None else env
    merged = dict(_DEFAULTS)
    if path:
        file_values = _read_config_file(path)
        unknown = set(file_values) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys in {path}: {sorted(unknown)}")
        merged.update(file_values)
    for key in _DEFAULTS:
        env_name = ENV_PREFIX + key.upper().replace(".", "_")
        if env_name in environ:
            merged[key] = environ[env_name]
    if overrides:
        unknown = set(overrides) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config overrides: {sorted(unknown)}")
        merged.update({k: str(v) for k, v in overrides.items()})

    values = {key: _parse_value(key, raw) for key, raw in merged.items()}
    _validate(values)
    return ServiceConfig(values=values)


def auto_nlist(n_vectors: int) -> int:
    """Default partition count: floor(sqrt(N)) clamped to [1, 4096]."""
    return max(1, min(4096, int(n_vectors**0.5)))
