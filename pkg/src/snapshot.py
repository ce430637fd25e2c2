"""
Checksummed snapshots of a replicate's complete state

A snapshot file is canonical JSON (sorted keys, no whitespace):

    {"checksum": sha256(canonical state text), "schema_version": 1,
     "state": {...}, "step": <creation step>}

Saving the state of a freshly loaded snapshot reproduces the file byte for
byte.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from .utils import canonical_json, sha256_text

logger = logging.getLogger(__name__)

SNAPSHOT_SCHEMA_VERSION = 1


class SnapshotError(ValueError):
    """Snapshot file is corrupt, tampered with, or from an incompatible schema"""


def save_snapshot(state: Dict[str, Any], path: Union[str, Path], step: int) -> Path:
    """
    Write a replicate state to disk

    Args:
        state: Plain-data state (world, epidemic, samples, RNG streams)
        path: Output file
        step: Tick the state was taken at

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = canonical_json(state)
    document = {
        "checksum": sha256_text(body),
        "schema_version": SNAPSHOT_SCHEMA_VERSION,
        "state": json.loads(body),
        "step": int(step),
    }
    with open(path, "w", encoding="utf-8") as f:
        f.write(canonical_json(document))
    logger.info(f"Saved snapshot at step {step} to {path}")
    return path


def load_snapshot(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read and verify a snapshot

    Returns:
        {"step": ..., "state": ...}

    Raises:
        FileNotFoundError: if the file does not exist
        SnapshotError: on unreadable JSON, schema mismatch or checksum failure
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Snapshot not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise SnapshotError(f"Snapshot {path} is not valid JSON: {e}") from e

    if not isinstance(document, dict) or not {"checksum", "schema_version", "state", "step"} <= set(document):
        raise SnapshotError(f"Snapshot {path} is missing required fields")
    if document["schema_version"] != SNAPSHOT_SCHEMA_VERSION:
        raise SnapshotError(
            f"Snapshot {path} has schema version {document['schema_version']}, "
            f"expected {SNAPSHOT_SCHEMA_VERSION}"
        )
    if sha256_text(canonical_json(document["state"])) != document["checksum"]:
        raise SnapshotError(f"Snapshot {path} failed its checksum")

    logger.info(f"Loaded snapshot from {path} (step {document['step']})")
    return {"step": document["step"], "state": document["state"]}
