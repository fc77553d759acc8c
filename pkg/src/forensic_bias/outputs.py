"""Byte-deterministic artifact writers.

Given identical inputs these produce identical bytes on every platform:
CSV rows use the csv module's RFC 4180 dialect (CRLF line endings) with
floats rendered by repr (shortest round-trip form), and JSON is written
with sorted keys.  Manifests carry no timestamps or host details, so a
rerun with the same seed is byte-for-byte comparable.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

__all__ = [
    "format_value",
    "write_csv",
    "write_json",
    "sha256_file",
    "RunManifest",
    "MANIFEST_NAME",
    "write_manifest",
    "read_manifest",
]

MANIFEST_NAME = "manifest.json"


def format_value(value: object) -> str:
    """Canonical text for one CSV field."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def _jsonable(value: object) -> object:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_json(path: Path, obj: object) -> None:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """What was run and what it produced; enough to re-create everything."""

    preset: str
    seed: int
    parameters: dict
    artifacts: dict  # filename -> sha256 hex digest
    tool_version: str


def write_manifest(out_dir: Path, manifest: RunManifest) -> Path:
    path = out_dir / MANIFEST_NAME
    write_json(
        path,
        {
            "preset": manifest.preset,
            "seed": manifest.seed,
            "parameters": manifest.parameters,
            "artifacts": manifest.artifacts,
            "tool_version": manifest.tool_version,
        },
    )
    return path


def read_manifest(out_dir: Path) -> RunManifest:
    data = json.loads((out_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    return RunManifest(
        preset=data["preset"],
        seed=data["seed"],
        parameters=data["parameters"],
        artifacts=data["artifacts"],
        tool_version=data["tool_version"],
    )
