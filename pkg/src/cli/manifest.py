"""
Run manifests and JSON/CSV output helpers.
"""
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Union
import csv
import hashlib
import json
import logging
import platform

import numpy as np

from config import settings
from src import __version__

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def to_jsonable(value: Any) -> Any:
    """json.dumps default: numpy scalars and arrays, complex numbers, paths."""
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return to_jsonable_tree(value.tolist())
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "to_dict"):
        return value.to_dict()
    raise TypeError(f"not JSON serializable: {type(value).__name__}")


def to_jsonable_tree(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, list):
        return [to_jsonable_tree(v) for v in value]
    return value


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=to_jsonable)


def write_json(path: Union[str, Path], payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(payload) + "\n")
    return path


def write_csv(path: Union[str, Path], rows: Iterable[Mapping[str, Any]]) -> Path:
    rows = list(rows)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        if rows:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    return path


def sha256_file(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def versions() -> Dict[str, str]:
    out = {"python": platform.python_version(), "henon-workbench": __version__}
    for package in ("numpy", "scipy", "pydantic", "PyYAML"):
        try:
            out[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            out[package] = "unknown"
    return out


def write_manifest(out_dir: Union[str, Path], command: str, inputs: Dict[str, Any],
                   seed: Optional[int], outputs: List[Path],
                   status: str = "ok") -> Path:
    """Record inputs, seed, versions, settings and output checksums beside the outputs."""
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "status": status,
        "inputs": inputs,
        "seed": seed,
        "versions": versions(),
        "settings": settings.to_dict(),
        "outputs": {p.name: sha256_file(p) for p in outputs if p.exists()},
    }
    path = write_json(out_dir / MANIFEST_NAME, manifest)
    logger.debug("manifest written", extra={"path": str(path), "outputs": len(outputs)})
    return path
