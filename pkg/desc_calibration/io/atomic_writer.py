"""
Atomic file writer for run outputs.

Ensures that checkpoints, reports and CSV tables are never left half-written
by an interrupted run.
"""

from __future__ import annotations

import io
import json
import tempfile
from collections.abc import Callable
from pathlib import Path

import pandas as pd

from ..errors import CheckpointError


class AtomicWriter:
    """Handles atomic file writes with validation.

    Uses a two-phase commit approach:
    1. Write to a temporary file in the same directory
    2. Validate the content
    3. Atomically replace the target file
    """

    def __init__(
        self,
        validate_json: Callable[[str], None] | None = None,
        validate_csv: Callable[[str], None] | None = None,
    ):
        """Initialize the atomic writer.

        Args:
            validate_json: Optional validation function for JSON documents
            validate_csv: Optional validation function for CSV tables
        """
        self._validate_json = validate_json or self._default_validate_json
        self._validate_csv = validate_csv or self._default_validate_csv

    def write(self, path: Path, content: str, file_format: str | None = None, validate: bool = True) -> None:
        """Write content to file atomically.

        Args:
            path: Target file path
            content: Content to write
            file_format: "json" or "csv"; inferred from the suffix when omitted
            validate: Whether to validate before finalizing

        Raises:
            CheckpointError: If validation fails
            OSError: If file operations fail
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        file_format = file_format or path.suffix.lstrip(".").lower()

        # Same directory ensures atomic rename on the same filesystem
        temp_fd, temp_path_str = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", text=True)
        temp_path = Path(temp_path_str)

        try:
            with open(temp_fd, "w", encoding="utf-8", newline="") as f:
                f.write(content)

            if validate:
                self._validate_content(content, file_format)

            temp_path.replace(path)

        except Exception:
            if temp_path.exists():
                try:
                    temp_path.unlink()
                except OSError:
                    pass
            raise

    def write_json(self, path: Path, document: object) -> None:
        """Serialize a JSON document with a stable key order and write it."""
        self.write(path, json.dumps(document, indent=2, sort_keys=True) + "\n", "json")

    def write_frame(self, path: Path, frame: pd.DataFrame) -> None:
        """Write a table as CSV."""
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, lineterminator="\n")
        self.write(path, buffer.getvalue(), "csv")

    def _validate_content(self, content: str, file_format: str) -> None:
        if file_format == "json":
            self._validate_json(content)
        elif file_format == "csv":
            self._validate_csv(content)

    def _default_validate_json(self, content: str) -> None:
        try:
            json.loads(content)
        except json.JSONDecodeError as e:
            raise CheckpointError(f"Refusing to write invalid JSON: {e}") from e

    def _default_validate_csv(self, content: str) -> None:
        header = content.split("\n", 1)[0]
        if not header.strip():
            raise CheckpointError("Refusing to write a CSV table without a header row")
