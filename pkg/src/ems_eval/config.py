"""YAML run configuration.

Example::

    label: llama-3b
    seed: 7
    extractor: {mode: llm}
    matcher: {mode: llm}
    scorers:
      - {mode: llm, max_score: 10}
      - {mode: rouge}
    baselines: {bleu: true, rouge_variants: [rouge-1, rouge-2, rouge-l], embedding: false}
    gateway: {base_url: "https://api.example.com", model: gpt-4o-mini, cache_dir: .ems_cache}

Relative paths (prompt templates, output and cache directories) resolve
against the config file's directory.  Credentials never live here; the
gateway reads ``EMS_API_KEY`` from the environment.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError, ContractError
from .extraction import ExtractorConfig
from .gateway import GatewayConfig
from .matching import MatcherConfig
from .pipeline import BaselineConfig, RunConfig
from .prompts import EXTRACT, MATCH, SCORE, SLOTS, read_template
from .scoring import ScorerConfig

TOP_LEVEL = {"label", "seed", "concurrency", "output_dir", "strict", "dataset",
             "extractor", "matcher", "scorers", "baselines", "gateway"}
SECRET_KEYS = {"api_key", "apikey", "token", "password", "secret"}


def _section(raw: Any, cls: type, where: str, base: Path, template: str | None = None) -> Any:
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(raw).__name__}")
    known = {f.name for f in dataclasses.fields(cls)}
    secret = SECRET_KEYS & {k.lower() for k in raw}
    if secret:
        raise ConfigError(f"{where}: credentials are not accepted in config files; set EMS_API_KEY instead")
    unknown = set(raw) - known - ({"prompt_file"} if template else set())
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    values = dict(raw)
    if "prompt_file" in values:
        path = base / values.pop("prompt_file")
        values["prompt_template"] = read_template(path, SLOTS[template])
    for key in ("summary_cues", "rouge_variants"):
        if key in values:
            if not isinstance(values[key], list):
                raise ConfigError(f"{where}.{key}: expected a list")
            values[key] = tuple(values[key])
    if "cache_dir" in values and values["cache_dir"] is not None:
        values["cache_dir"] = str(base / values["cache_dir"])
    try:
        return cls(**values)
    except (ContractError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def config_from_dict(data: dict[str, Any] | None, base: str | Path = ".") -> RunConfig:
    data = data or {}
    base = Path(base)
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    unknown = set(data) - TOP_LEVEL
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {sorted(unknown)}")
    scorers_raw = data.get("scorers", [{}])
    if not isinstance(scorers_raw, list) or not scorers_raw:
        raise ConfigError("scorers: expected a non-empty list")
    gateway = _section(data.get("gateway"), GatewayConfig, "gateway", base)
    if "cache_dir" not in (data.get("gateway") or {}):
        gateway.cache_dir = str(base / GatewayConfig.cache_dir)
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    if "seed" not in (data.get("gateway") or {}):
        gateway.seed = seed
    try:
        return RunConfig(
            extractor=_section(data.get("extractor"), ExtractorConfig, "extractor", base, EXTRACT),
            matcher=_section(data.get("matcher"), MatcherConfig, "matcher", base, MATCH),
            scorers=[_section(s, ScorerConfig, f"scorers[{i}]", base, SCORE) for i, s in enumerate(scorers_raw)],
            baselines=_section(data.get("baselines"), BaselineConfig, "baselines", base),
            gateway=gateway,
            concurrency=int(data.get("concurrency", gateway.concurrency)),
            output_dir=str(base / data.get("output_dir", "runs")),
            seed=seed,
            strict=bool(data.get("strict", False)),
            label=str(data.get("label", "run")),
        )
    except ContractError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> tuple[RunConfig, str | None]:
    """Parse a YAML config; returns the run config and the optional dataset path it names."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    base = path.parent
    config = config_from_dict(data, base)
    dataset = (data or {}).get("dataset")
    return config, str(base / dataset) if dataset else None
