"""Artifact store for datasets, checkpoints, reports and tables."""

import csv
import hashlib
import io
import json
import logging
from abc import ABC, abstractmethod
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Iterable

from config import get_settings
from core.errors import IoFailure, MissingArtifact

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def records_checksum(lines: Iterable[str]) -> str:
    """sha256 over the record lines, each terminated by a newline."""
    digest = hashlib.sha256()
    for line in lines:
        digest.update(line.encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class ArtifactStore(ABC):
    """Abstract base class for artifact storage."""

    @abstractmethod
    def path(self, name: str, folder: str = "") -> Path:
        """Location of an artifact."""
        pass

    @abstractmethod
    def write_text(self, name: str, text: str, folder: str = "") -> Path:
        """Write a text artifact and return its path."""
        pass

    @abstractmethod
    def read_text(self, name: str, folder: str = "") -> str:
        """Read a text artifact.

        Raises:
            MissingArtifact: if the artifact does not exist.
        """
        pass

    def exists(self, name: str, folder: str = "") -> bool:
        return self.path(name, folder).is_file()

    # JSON

    def write_json(self, name: str, data: dict, folder: str = "") -> Path:
        return self.write_text(name, json.dumps(data, indent=2, sort_keys=True) + "\n", folder)

    def read_json(self, name: str, folder: str = "") -> dict:
        text = self.read_text(name, folder)
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise IoFailure(f"{name} is not valid JSON: {e}") from e

    # JSONL with a checksummed header

    def write_jsonl(self, name: str, header: dict, records: Iterable[dict], folder: str = "") -> Path:
        """Write ``header`` followed by one JSON record per line.

        The header gains ``schema_version``, ``n`` and a ``checksum`` of the
        record lines so readers can detect truncation or edits.
        """
        lines = [_dumps(r) for r in records]
        head = dict(header, schema_version=SCHEMA_VERSION, n=len(lines), checksum=records_checksum(lines))
        text = "\n".join([_dumps(head), *lines]) + "\n"
        return self.write_text(name, text, folder)

    def read_jsonl(self, name: str, folder: str = "") -> tuple[dict, list[dict]]:
        """Return ``(header, records)`` after verifying the checksum."""
        lines = [line for line in self.read_text(name, folder).splitlines() if line]
        if not lines:
            raise IoFailure(f"{name} is empty")
        try:
            header = json.loads(lines[0])
            records = [json.loads(line) for line in lines[1:]]
        except json.JSONDecodeError as e:
            raise IoFailure(f"{name} is not valid JSONL: {e}") from e
        expected = header.get("checksum")
        if expected is not None and records_checksum(lines[1:]) != expected:
            raise IoFailure(f"{name} checksum mismatch")
        return header, records

    # CSV

    def write_csv(self, name: str, rows: list[dict], folder: str = "", fieldnames: list[str] | None = None) -> Path:
        out = io.StringIO()
        if fieldnames is None:
            fieldnames = list(rows[0]) if rows else []
        writer = csv.DictWriter(out, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return self.write_text(name, out.getvalue(), folder)

    def read_csv(self, name: str, folder: str = "") -> list[dict]:
        return list(csv.DictReader(io.StringIO(self.read_text(name, folder))))

    # Run metadata (the only place timestamps appear)

    def write_metadata(self, stage: str, config: dict, extra: dict | None = None) -> Path:
        try:
            metadata = self.read_json("metadata.json")
        except MissingArtifact:
            metadata = {}
        metadata[stage] = {
            "finished_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "config": config,
            **(extra or {}),
        }
        return self.write_json("metadata.json", metadata)


class LocalArtifactStore(ArtifactStore):
    """Artifacts under a local output directory."""

    def __init__(self, base_path: str | Path | None = None):
        settings = get_settings()
        self.base_path = Path(base_path if base_path is not None else settings.output_dir)

    def path(self, name: str, folder: str = "") -> Path:
        base = self.base_path / folder if folder else self.base_path
        return base / name

    def write_text(self, name: str, text: str, folder: str = "") -> Path:
        file_path = self.path(name, folder)
        try:
            file_path.parent.mkdir(parents=True, exist_ok=True)
            # newline="" keeps byte-identical output across platforms
            with open(file_path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as e:
            raise IoFailure(f"cannot write {file_path}: {e}") from e
        logger.debug("wrote %s", file_path)
        return file_path

    def read_text(self, name: str, folder: str = "") -> str:
        file_path = self.path(name, folder)
        if not file_path.is_file():
            raise MissingArtifact(f"missing artifact: {file_path}")
        try:
            return file_path.read_text(encoding="utf-8")
        except OSError as e:
            raise IoFailure(f"cannot read {file_path}: {e}") from e


@lru_cache
def get_artifact_store(base_path: str | None = None) -> ArtifactStore:
    """Get the artifact store rooted at ``base_path`` (default: configured output dir)."""
    return LocalArtifactStore(base_path)
