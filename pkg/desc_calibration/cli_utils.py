"""
CLI utilities for command line reconstruction and resolved-config files.
"""

from __future__ import annotations

import json
import shlex
from pathlib import Path
from typing import Any

import click

from .config import PRESETS, RunConfig
from .errors import ConfigError

PROGRAM = "desc_calibration"
RESOLVED_CONFIG = "resolved_config.json"


def reconstruct_command_line(click_command: click.Command) -> str:
    """
    Reconstruct command line from current Click context using introspection.

    Args:
        click_command: Click command object for introspection

    Returns:
        Reconstructed command line string
    """
    try:
        ctx = click.get_current_context()
        cli_args = ctx.params
    except RuntimeError:
        # No active context, return basic command
        return PROGRAM

    cmd_parts = [PROGRAM]
    if click_command.name and click_command.name != PROGRAM:
        cmd_parts.append(click_command.name)

    for param in click_command.params:
        if not isinstance(param, click.Option) or param.name not in cli_args:
            continue
        value = cli_args[param.name]
        # Skip unset options and defaults
        if value is None or value == () or value is False or value == param.default:
            continue

        flag = param.opts[0]
        if param.is_flag:
            cmd_parts.append(flag)
            continue
        for item in value if isinstance(value, tuple) else (value,):
            cmd_parts.extend([flag, shlex.quote(str(item))])

    return " ".join(cmd_parts)


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Read a config document; a resolved-config file is unwrapped to its `config` section."""
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from e
    if isinstance(document, dict) and "command_line" in document and "config" in document:
        document = document["config"]
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: a config file must hold a JSON object")
    return document


def resolve_config(
    config_path: str | None = None,
    preset: str | None = None,
    seed: int | None = None,
    method: str | None = None,
    overrides: tuple[str, ...] = (),
    data_dir: str | None = None,
) -> RunConfig:
    """
    Build the run config: preset, then config file, then `--set` overrides, then dedicated flags.

    `--seed` sets the run, generator and model seeds together.
    """
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"Unknown preset '{preset}'; expected one of {sorted(PRESETS)}")
    config = PRESETS[preset or "default"]()
    if config_path is not None:
        config.update(read_config_file(config_path))
    for assignment in overrides:
        config.apply_override(assignment)
    if seed is not None:
        config.seed = config.gen.seed = config.desc.seed = seed
    if method is not None:
        config.update({"method": method})
    if data_dir is not None:
        config.data.data_dir = data_dir
    config.validate()
    return config


def resolved_document(config: RunConfig, command_line: str) -> dict[str, Any]:
    return {"command_line": command_line, "config": config.to_dict()}
