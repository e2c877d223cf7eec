"""
Tests for atomic output files and the checkpoint container.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

import pandas as pd
import pytest

from desc_calibration.errors import CheckpointError
from desc_calibration.io import AtomicWriter, checkpoint


class TestAtomicWriter:
    """Tests for AtomicWriter."""

    def test_write_creates_file(self):
        """Test that write creates a new file and its parent directories."""
        writer = AtomicWriter()

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "run" / "metrics.json"
            writer.write(path, '{"auc": 0.5}\n')

            assert path.exists()
            assert path.read_text() == '{"auc": 0.5}\n'

    def test_write_overwrites_existing(self):
        """Test that write replaces an existing file."""
        writer = AtomicWriter()

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "table.csv"
            path.write_text("old content")

            writer.write(path, "a,b\n1,2\n")

            assert path.read_text() == "a,b\n1,2\n"

    def test_write_validates_json(self):
        """Test that invalid JSON is refused and nothing is left behind."""
        writer = AtomicWriter()

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "broken.json"

            with pytest.raises(CheckpointError):
                writer.write(path, '{"auc": ', "json")

            assert not path.exists()
            assert list(Path(tmpdir).iterdir()) == []

    def test_write_without_validation(self):
        """Test that validation can be skipped."""
        writer = AtomicWriter()

        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "raw.json"
            writer.write(path, "not json", "json", validate=False)

            assert path.read_text() == "not json"

    def test_csv_needs_header(self):
        """Test that an empty CSV table is refused."""
        with tempfile.TemporaryDirectory() as tmpdir:
            with pytest.raises(CheckpointError):
                AtomicWriter().write(Path(tmpdir) / "empty.csv", "\n1,2\n")

    def test_custom_validator(self):
        """Test that a custom validator replaces the default one."""
        seen = []
        writer = AtomicWriter(validate_json=seen.append)

        with tempfile.TemporaryDirectory() as tmpdir:
            writer.write(Path(tmpdir) / "x.json", "anything")

        assert seen == ["anything"]

    def test_write_json_and_frame(self, tmp_path):
        """Test the JSON and DataFrame helpers."""
        writer = AtomicWriter()
        writer.write_json(tmp_path / "doc.json", {"b": 1, "a": [1.5, None]})
        writer.write_frame(tmp_path / "frame.csv", pd.DataFrame({"x": [1, 2], "y": ["a", "b"]}))

        assert (tmp_path / "doc.json").read_text().index('"a"') < (tmp_path / "doc.json").read_text().index('"b"')
        assert json.loads((tmp_path / "doc.json").read_text()) == {"a": [1.5, None], "b": 1}
        assert (tmp_path / "frame.csv").read_text() == "x,y\n1,a\n2,b\n"


class TestCheckpoint:
    """Tests for the versioned checkpoint container."""

    def test_save_and_load(self, tmp_path):
        """Test that a payload survives a save/load cycle exactly."""
        payload = {"a": 0.1 + 0.2, "b": [1e-300, -2.5], "name": "x"}
        path = checkpoint.save(tmp_path / "checkpoint.json", "platt", payload)

        kind, loaded = checkpoint.load(path)

        assert kind == "platt"
        assert loaded == payload

    def test_expected_kind_mismatch(self, tmp_path):
        """Test that loading with the wrong expected kind fails."""
        path = checkpoint.save(tmp_path / "checkpoint.json", "histogram", {})

        with pytest.raises(CheckpointError):
            checkpoint.load(path, expected_kind="desc")

    @pytest.mark.parametrize(
        "document",
        [
            {"format": "other", "version": 1, "kind": "desc", "payload": {}},
            {"format": checkpoint.FORMAT, "version": 99, "kind": "desc", "payload": {}},
            {"format": checkpoint.FORMAT, "version": 1, "kind": "forest", "payload": {}},
            {"format": checkpoint.FORMAT, "version": 1, "kind": "desc", "payload": []},
            [1, 2, 3],
        ],
        ids=["format", "version", "kind", "payload", "not-object"],
    )
    def test_unpack_rejects(self, document):
        """Test container validation failures."""
        with pytest.raises(CheckpointError):
            checkpoint.unpack(document)

    def test_invalid_json_file(self, tmp_path):
        """Test that a corrupt file raises CheckpointError."""
        path = tmp_path / "checkpoint.json"
        path.write_text("{")

        with pytest.raises(CheckpointError):
            checkpoint.load(path)

    def test_pack_rejects_unknown_kind(self):
        """Test that only known kinds can be written."""
        with pytest.raises(CheckpointError):
            checkpoint.pack("forest", {})
