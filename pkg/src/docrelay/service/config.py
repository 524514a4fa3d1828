"""Service configuration: a simple key=value file merged with CLI flags.

Recognized keys: store_path, backend (scripted|http), script_path, jobs_dir,
chunk_budget, top_k, block_budget, notes_budget, max_revisions, max_reroutes,
context_budget, order (comma-separated agent ids for scenario sessions),
host, port. Lines starting with '#' are comments.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from ..errors import ConfigError
from ..orchestration import EngineConfig
from ..retrieval.runner import RetrievalConfig
from ..scenario.pipeline import DECLARED_ORDER

_INT_KEYS = {"chunk_budget", "top_k", "block_budget", "notes_budget",
             "max_revisions", "max_reroutes", "context_budget", "port"}


@dataclass
class ServiceConfig:
    store_path: str | None = None
    backend: str = "scripted"
    script_path: str | None = None
    jobs_dir: str | None = None
    chunk_budget: int = 1000
    top_k: int = 8
    block_budget: int = 4000
    notes_budget: int = 8000
    max_revisions: int = 3
    max_reroutes: int = 2
    context_budget: int = 4000
    order: list[str] = field(default_factory=lambda: list(DECLARED_ORDER))
    host: str = "127.0.0.1"
    port: int = 8000

    def engine_config(self) -> EngineConfig:
        return EngineConfig(max_revisions=self.max_revisions,
                            max_reroutes=self.max_reroutes,
                            context_budget=self.context_budget)

    def retrieval_config(self) -> RetrievalConfig:
        return RetrievalConfig(top_k=self.top_k, block_budget=self.block_budget,
                               notes_budget=self.notes_budget)


def load_config_file(path: str | Path) -> dict:
    """Parse a key=value config file into a dict of typed values."""
    known = {f.name for f in fields(ServiceConfig)}
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = key.strip(), value.strip()
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        if key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: {key} must be an integer") from None
        elif key == "order":
            values[key] = [part.strip() for part in value.split(",") if part.strip()]
        else:
            values[key] = value
    return values


def build_config(file_path: str | Path | None = None, **overrides) -> ServiceConfig:
    """File values first, explicit (non-None) overrides on top."""
    values = load_config_file(file_path) if file_path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ServiceConfig(**values)
