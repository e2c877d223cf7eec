"""
Versioned checkpoint container shared by DESC models and the baselines.

A checkpoint is one JSON object:

    {"format": "desc_calibration.checkpoint", "version": 1, "kind": "...", "payload": {...}}

Floats are written with their shortest round-trip repr, so saving and loading
reproduces every parameter bit for bit.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from ..errors import CheckpointError
from .atomic_writer import AtomicWriter

logger = logging.getLogger(__name__)

FORMAT = "desc_calibration.checkpoint"
VERSION = 1
KINDS = ("desc", "histogram", "isotonic", "sir", "platt", "temperature", "scalebin", "identity")


def pack(kind: str, payload: dict[str, Any]) -> dict[str, Any]:
    """Wrap a payload in the container envelope."""
    if kind not in KINDS:
        raise CheckpointError(f"Unknown checkpoint kind '{kind}'")
    return {"format": FORMAT, "version": VERSION, "kind": kind, "payload": payload}


def unpack(document: Any, expected_kind: str | None = None) -> tuple[str, dict[str, Any]]:
    """
    Validate a container and return its (kind, payload).

    Raises:
        CheckpointError: On a foreign format, unsupported version or unknown kind
    """
    if not isinstance(document, dict) or document.get("format") != FORMAT:
        raise CheckpointError("Not a desc_calibration checkpoint")
    version = document.get("version")
    if version != VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version!r} (expected {VERSION})")
    kind = document.get("kind")
    if kind not in KINDS:
        raise CheckpointError(f"Unknown checkpoint kind '{kind}'")
    if expected_kind is not None and kind != expected_kind:
        raise CheckpointError(f"Expected a '{expected_kind}' checkpoint, got '{kind}'")
    payload = document.get("payload")
    if not isinstance(payload, dict):
        raise CheckpointError("Checkpoint payload must be an object")
    return kind, payload


def dumps(kind: str, payload: dict[str, Any]) -> str:
    return json.dumps(pack(kind, payload), indent=1, sort_keys=True) + "\n"


def save(path: str | Path, kind: str, payload: dict[str, Any], writer: AtomicWriter | None = None) -> Path:
    """Write a checkpoint atomically."""
    path = Path(path)
    (writer or AtomicWriter()).write(path, dumps(kind, payload), "json")
    logger.info("Wrote %s checkpoint to %s", kind, path)
    return path


def load(path: str | Path, expected_kind: str | None = None) -> tuple[str, dict[str, Any]]:
    """
    Read and validate a checkpoint.

    Raises:
        CheckpointError: If the file is not valid JSON or not a valid container
        OSError: If the file cannot be read
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CheckpointError(f"{path}: invalid JSON: {e}") from e
    return unpack(document, expected_kind)
