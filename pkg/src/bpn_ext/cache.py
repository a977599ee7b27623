"""Content-addressed on-disk cache for slice results.

Each entry is a small JSON file named by the SHA-256 of its key.  Writes go
through a temporary file and ``os.replace`` so concurrent writers of the same
key are harmless: the value for a key is a pure function of the key.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

FORMAT_VERSION = 1
ENV_VAR = "BPN_EXT_CACHE_DIR"

log = logging.getLogger(__name__)


def default_cache_dir() -> Path:
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "bpn-ext"


def resolve_cache_dir(flag: Optional[str] = None) -> Path:
    """Flag first, then the environment variable, then the platform default."""
    if flag:
        return Path(flag)
    if os.environ.get(ENV_VAR):
        return Path(os.environ[ENV_VAR])
    return default_cache_dir()


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def checksum(payload: Any) -> str:
    return hashlib.sha256(_canonical(payload).encode()).hexdigest()


@dataclass(frozen=True)
class CacheEntry:
    key: dict
    payload: Any
    format_version: int = FORMAT_VERSION

    @property
    def checksum(self) -> str:
        return checksum(self.payload)

    def dumps(self) -> str:
        return _canonical({"key": self.key, "format_version": self.format_version,
                           "payload": self.payload, "checksum": self.checksum})

    @classmethod
    def loads(cls, text: str) -> "CacheEntry":
        raw = json.loads(text)
        entry = cls(raw["key"], raw["payload"], raw["format_version"])
        if raw["checksum"] != entry.checksum:
            raise ValueError("checksum mismatch")
        return entry


class SliceCache:
    def __init__(self, directory):
        self.directory = Path(directory)

    def path_for(self, key: dict) -> Path:
        digest = hashlib.sha256(_canonical(dict(key, format_version=FORMAT_VERSION)).encode()).hexdigest()
        return self.directory / digest[:2] / f"{digest}.json"

    def get(self, key: dict) -> Optional[Any]:
        path = self.path_for(key)
        try:
            text = path.read_text()
        except FileNotFoundError:
            return None
        try:
            entry = CacheEntry.loads(text)
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("discarding corrupt cache entry %s (%s); recomputing", path, exc)
            return None
        if entry.format_version != FORMAT_VERSION or entry.key != key:
            log.warning("discarding stale cache entry %s; recomputing", path)
            return None
        return entry.payload

    def put(self, key: dict, payload: Any) -> None:
        path = self.path_for(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(CacheEntry(key, payload).dumps())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def ensure(self, key: dict, compute):
        value = self.get(key)
        if value is None:
            value = compute()
            self.put(key, value)
        return value
