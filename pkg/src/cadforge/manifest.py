"""Append-only JSONL manifests binding stage artifacts to provenance."""

from __future__ import annotations

import json
from pathlib import Path

MANIFEST_NAME = "manifest.jsonl"


def manifest_path(directory) -> Path:
    return Path(directory) / MANIFEST_NAME


def append_rows(directory, rows):
    path = manifest_path(directory)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def write_rows(directory, rows):
    """Replace the manifest (used when a stage regenerates its outputs)."""
    path = manifest_path(directory)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_rows(directory):
    path = manifest_path(directory)
    if not path.exists():
        return []
    rows = []
    for line in path.read_text().splitlines():
        if line.strip():
            rows.append(json.loads(line))
    return rows


def stage_inputs(directory, stage: str = None):
    """(id, path) pairs listed by a manifest, or every .mcq file when the
    directory has no manifest."""
    directory = Path(directory)
    rows = read_rows(directory)
    if rows:
        out = []
        for row in rows:
            if stage is not None and row.get("stage") != stage:
                continue
            if not row.get("valid", True):
                continue
            out.append((row["id"], directory / row["path"]))
        return out
    return [(p.stem, p) for p in sorted(directory.glob("*.mcq"))]
