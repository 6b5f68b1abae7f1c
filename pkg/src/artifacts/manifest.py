"""Deterministic output files paired with run manifests"""

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

import src
from src.utils.logging import get_logger
from src.utils.system import ensure_directory, validate_file_path

logger = get_logger(__name__)

MANIFEST_SUFFIX = ".manifest.json"


def _plain(value: Any) -> Any:
    """Convert numpy scalars and arrays to JSON-native values"""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True, default=_plain) + "\n"


def write_json(path: Path, data: Any) -> Path:
    """Write JSON with sorted keys so reruns are byte-identical"""
    ensure_directory(path.parent)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(data))
    logger.debug(f"Wrote {path}")
    return path


def write_jsonl(path: Path, records: Iterable[dict]) -> Path:
    """One sorted-key JSON object per line"""
    ensure_directory(path.parent)
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True, default=_plain) + "\n")
            count += 1
    logger.debug(f"Wrote {count} records to {path}")
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    ensure_directory(path.parent)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    logger.debug(f"Wrote {path}")
    return path


def file_hash(path: Path) -> str:
    """
    Calculate MD5 hash of a file

    Args:
        path: Path to the file

    Returns:
        MD5 hash string
    """
    hash_md5 = hashlib.md5()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(8192), b""):
            hash_md5.update(chunk)
    return hash_md5.hexdigest()


@dataclass
class RunManifest:
    """Provenance of one command's outputs; carries no timestamps"""

    command: str
    config: Dict[str, Any] = field(default_factory=dict)
    version: str = src.__version__
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    def add_input(self, path: Path) -> None:
        """Record the MD5 hash of an input file"""
        validate_file_path(path)
        self.inputs[str(path)] = file_hash(path)

    def add_output(self, path: Path) -> Path:
        if str(path) not in self.outputs:
            self.outputs.append(str(path))
        return path

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "version": self.version,
            "inputs": self.inputs,
            "outputs": sorted(self.outputs),
            "summary": self.summary,
        }

    def manifest_path(self, out_dir: Path) -> Path:
        return out_dir / f"{self.command}{MANIFEST_SUFFIX}"

    def save(self, out_dir: Path) -> Path:
        """Write <command>.manifest.json next to the outputs"""
        path = write_json(self.manifest_path(out_dir), self.to_dict())
        logger.info(f"Manifest for {self.command}: {len(self.outputs)} outputs -> {path}")
        return path

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        """
        Load a manifest written by save()

        Raises:
            FileNotFoundError: If the file does not exist
            ValueError: If the file is not a manifest
        """
        validate_file_path(path)
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        if "command" not in data:
            raise ValueError(f"Not a run manifest: {path}")
        return cls(
            command=data["command"],
            config=data.get("config", {}),
            version=data.get("version", ""),
            inputs=data.get("inputs", {}),
            outputs=list(data.get("outputs", [])),
            summary=data.get("summary", {}),
        )

    def stale_inputs(self) -> List[str]:
        """Inputs whose current hash differs from the recorded one"""
        stale = []
        for name, recorded in self.inputs.items():
            path = Path(name)
            try:
                if file_hash(path) != recorded:
                    stale.append(name)
            except OSError as e:
                logger.warning(f"Failed to hash {path}: {e}")
                stale.append(name)
        return stale
