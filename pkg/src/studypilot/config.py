"""Service configuration: one JSON file plus environment overrides.

Secrets never live in the file — the LLM token is read from the
environment variable named by ``llm_token_env`` at request time.
"""

from __future__ import annotations

import json
import os
from collections.abc import Mapping
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from .gateway import (
    DEFAULT_TOKEN_ENV,
    DecodingParams,
    HttpLlmClient,
    LlmClient,
    MockLlmClient,
    PipelineConfig,
    ReplayLlmClient,
)
from .model import ParseError, parse_clock
from .planner import PacePolicy

ENV_PREFIX = "STUDYPILOT_"

# Config-file keys that may be overridden by STUDYPILOT_<KEY> variables.
_ENV_KEYS = (
    "data_dir",
    "catalog_dir",
    "transcripts_dir",
    "llm_mode",
    "llm_endpoint",
    "llm_model",
    "llm_script_path",
    "llm_replay_path",
    "host",
    "port",
)


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str = "./studypilot-data"
    catalog_dir: str | None = None  # None: the bundled demo catalog
    transcripts_dir: str | None = None  # None: the bundled demo transcripts
    llm_mode: str = "none"  # none | mock | replay | http
    llm_script_path: str | None = None
    llm_replay_path: str | None = None
    llm_endpoint: str = ""
    llm_model: str = ""
    llm_token_env: str = DEFAULT_TOKEN_ENV
    max_repair_attempts: int = 3
    temperature: float = 0.0
    max_tokens: int = 2048
    default_window_start: str = "18:00"
    default_start_date: str = "2025-01-01"
    pace_table: Mapping[str, Mapping[str, int]] | None = None
    chunk_seconds: float = 60.0
    host: str = "127.0.0.1"
    port: int = 8500

    def resolved_catalog_dir(self) -> Path:
        if self.catalog_dir:
            return Path(self.catalog_dir)
        return Path(str(resources.files("studypilot").joinpath("data/catalog")))

    def resolved_transcripts_dir(self) -> Path:
        if self.transcripts_dir:
            return Path(self.transcripts_dir)
        return Path(str(resources.files("studypilot").joinpath("data/transcripts")))

    def pipeline(self) -> PipelineConfig:
        policy = PacePolicy.from_doc(self.pace_table) if self.pace_table else PacePolicy.default()
        return PipelineConfig(
            max_repair_attempts=self.max_repair_attempts,
            decoding=DecodingParams(temperature=self.temperature, max_tokens=self.max_tokens),
            policy=policy,
            default_window_start=parse_clock(self.default_window_start),
            default_start_date=self.default_start_date,
        )

    def make_client(self) -> LlmClient | None:
        if self.llm_mode == "none":
            return None
        if self.llm_mode == "mock":
            if not self.llm_script_path:
                raise ParseError("llm_mode=mock requires llm_script_path")
            raw = json.loads(Path(self.llm_script_path).read_text(encoding="utf-8"))
            return MockLlmClient(raw["script"], repeat_last=raw.get("repeat_last", False))
        if self.llm_mode == "replay":
            if not self.llm_replay_path:
                raise ParseError("llm_mode=replay requires llm_replay_path")
            inner = None
            if self.llm_endpoint:
                inner = HttpLlmClient(self.llm_endpoint, self.llm_model, self.llm_token_env)
            return ReplayLlmClient(self.llm_replay_path, inner=inner)
        if self.llm_mode == "http":
            if not self.llm_endpoint:
                raise ParseError("llm_mode=http requires llm_endpoint")
            return HttpLlmClient(self.llm_endpoint, self.llm_model, self.llm_token_env)
        raise ParseError(f"unknown llm_mode {self.llm_mode!r}")


def load_config(path: Path | str | None = None, env: Mapping[str, str] | None = None) -> ServiceConfig:
    """Read the JSON config file, then apply ``STUDYPILOT_*`` overrides."""
    env = os.environ if env is None else env
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"could not read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ParseError(f"config {path} must hold a JSON object")

    known = {f.name for f in fields(ServiceConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ParseError(f"unknown config keys: {', '.join(unknown)}")

    for key in _ENV_KEYS:
        value = env.get(ENV_PREFIX + key.upper())
        if value is not None:
            raw[key] = int(value) if key == "port" else value

    return ServiceConfig(**raw)
