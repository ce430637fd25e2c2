"""
Common utilities for the dynamic network sampling simulator
"""

import hashlib
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd


def setup_logging(level: str = "INFO", log_file: Optional[str] = None):
    """
    Setup logging configuration

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_file: Optional file to write logs to
    """
    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    handlers = [logging.StreamHandler()]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format=log_format,
        handlers=handlers,
        force=True,
    )


def to_builtin(value: Any) -> Any:
    """Convert numpy scalars/arrays nested in dicts and lists to plain Python"""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_builtin(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def canonical_json(data: Any) -> str:
    """Deterministic JSON text (sorted keys, no whitespace)"""
    return json.dumps(to_builtin(data), sort_keys=True, separators=(",", ":"))


def write_jsonl(records: Iterable[Dict[str, Any]], output_path: Union[str, Path]) -> Path:
    """Write one canonical JSON object per line"""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    with open(output_path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(canonical_json(record))
            f.write("\n")

    return output_path


def read_jsonl(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """Read a JSON Lines file back into a list of dicts"""
    with open(path, "r", encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def save_results(results: Union[Dict[str, Any], List[Dict[str, Any]]],
                 output_path: Union[str, Path], format: str = "json") -> Path:
    """
    Save run results to file

    Args:
        results: Results dictionary or list of row dicts
        output_path: Path to save results
        format: Output format (json, csv)
    """
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)

    if format == "json":
        with open(output_path, "w", encoding="utf-8") as f:
            json.dump(to_builtin(results), f, indent=2, sort_keys=True)
    elif format == "csv":
        df = pd.DataFrame(results)
        df.to_csv(output_path, index=False, float_format="%.10g")
    else:
        raise ValueError(f"Unsupported format: {format}")

    return output_path


def stable_hash(text: str) -> int:
    """32-bit hash of a string that does not change between interpreter runs"""
    return int(hashlib.md5(text.encode()).hexdigest()[:8], 16)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


class Timer:
    """Context manager for timing operations"""

    def __init__(self, name: str = "Operation"):
        self.name = name
        self.logger = logging.getLogger(__name__)
        self.duration = 0.0

    def __enter__(self):
        self.start = datetime.now()
        return self

    def __exit__(self, *args):
        self.duration = (datetime.now() - self.start).total_seconds()
        self.logger.info(f"{self.name} took {self.duration:.2f} seconds")
