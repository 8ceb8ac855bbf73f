from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src import __version__

logger = logging.getLogger(__name__)

CACHE_ENV = "SMOOTHCI_CACHE_DIR"
DEFAULT_CACHE_DIR = ".smoothci_cache"
FLOAT_DIGITS = 12


def _normalise(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(key): _normalise(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalise(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return _normalise(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.{FLOAT_DIGITS}g}")
    return obj


def canonical_json(obj: Any) -> str:
    """Sorted keys, no whitespace, floats rounded to 12 significant digits."""
    return json.dumps(_normalise(obj), sort_keys=True, separators=(",", ":"))


def config_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


@dataclass
class RunManifest:
    command: str
    config: dict[str, Any]
    seed: Optional[int] = None
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__
    created: Optional[str] = None

    @property
    def config_hash(self) -> str:
        return config_hash({"command": self.command, "config": self.config})

    def stamp(self) -> "RunManifest":
        self.created = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return self

    def to_dict(self, include_timestamp: bool = False) -> dict[str, Any]:
        out = {
            "command": self.command,
            "config": self.config,
            "configHash": self.config_hash,
            "seed": self.seed,
            "toolVersion": self.tool_version,
            "outputs": list(self.outputs),
        }
        if include_timestamp:
            out["created"] = self.created
        return out


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class ResultCache:
    """Directory of ``<config hash>.json`` files holding a manifest and a result payload."""

    def __init__(self, root: str | Path | None = None) -> None:
        self.root = Path(root if root is not None else os.environ.get(CACHE_ENV, DEFAULT_CACHE_DIR))

    def path_for(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, key: str) -> Optional[dict[str, Any]]:
        path = self.path_for(key)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            logger.warning("[cache] ignoring unreadable entry %s", path)
            return None
        logger.info("[cache] hit %s", key[:12])
        return entry.get("payload")

    def put(self, key: str, payload: dict[str, Any], manifest: RunManifest) -> Path:
        path = self.path_for(key)
        entry = {"manifest": manifest.stamp().to_dict(include_timestamp=True), "payload": payload}
        atomic_write(path, json.dumps(entry, indent=2, sort_keys=True))
        logger.info("[cache] stored %s", key[:12])
        return path


def write_json(payload: dict[str, Any], path: str | Path, manifest: RunManifest) -> Path:
    """JSON document with the manifest embedded under ``manifest`` (no timestamp)."""
    out = Path(path)
    text = json.dumps({"manifest": manifest.to_dict(), **payload}, indent=2, sort_keys=True) + "\n"
    atomic_write(out, text)
    logger.info("[saved] %s", out)
    return out
