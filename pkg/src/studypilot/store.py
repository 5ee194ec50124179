"""Durable keyed JSON documents on the filesystem.

Documents live under ``root/<kind>/<key>.json`` as canonical JSON. Writes
go through a same-directory temp file that is flushed, fsynced, and
renamed over the target, so a reader (including one started after a crash)
sees either the old document or the complete new one. Mutations of one key
serialize through an in-process lock; the store is single-process by
design.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
import threading
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator

from .model import ValidationError, canonical_json

_KEY_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class MissingDocument(ValidationError):
    code = "not_found"


class DocumentExists(ValidationError):
    code = "already_exists"


class BadKey(ValidationError):
    code = "bad_key"


class JsonStore:
    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[tuple[str, str], threading.RLock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, kind: str, key: str) -> threading.RLock:
        with self._locks_guard:
            return self._locks.setdefault((kind, key), threading.RLock())

    @contextmanager
    def lock(self, kind: str, key: str) -> Iterator[None]:
        """Reentrant mutex for multi-document updates touching one entity."""
        lock = self._lock_for(kind, key)
        with lock:
            yield

    def _path(self, kind: str, key: str) -> Path:
        if not _KEY_RE.match(kind) or not _KEY_RE.match(key):
            raise BadKey(f"illegal store key {kind!r}/{key!r}")
        return self.root / kind / f"{key}.json"

    def put(self, kind: str, key: str, doc: Any) -> None:
        path = self._path(kind, key)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self.lock(kind, key):
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{key}.", suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as handle:
                    handle.write(canonical_json(doc))
                    handle.flush()
                    os.fsync(handle.fileno())
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise
            dir_fd = os.open(path.parent, os.O_RDONLY)
            try:
                os.fsync(dir_fd)
            finally:
                os.close(dir_fd)

    def create(self, kind: str, key: str, doc: Any) -> None:
        """``put`` that refuses to overwrite — used for immutable documents."""
        with self.lock(kind, key):
            if self.exists(kind, key):
                raise DocumentExists(f"{kind}/{key} already written")
            self.put(kind, key, doc)

    def get(self, kind: str, key: str) -> Any:
        path = self._path(kind, key)
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise MissingDocument(f"no document {kind}/{key}", element=key) from None

    def get_or(self, kind: str, key: str, default: Any = None) -> Any:
        try:
            return self.get(kind, key)
        except MissingDocument:
            return default

    def exists(self, kind: str, key: str) -> bool:
        return self._path(kind, key).is_file()

    def delete(self, kind: str, key: str) -> None:
        with self.lock(kind, key):
            try:
                self._path(kind, key).unlink()
            except FileNotFoundError:
                raise MissingDocument(f"no document {kind}/{key}", element=key) from None

    def keys(self, kind: str) -> list[str]:
        if not _KEY_RE.match(kind):
            raise BadKey(f"illegal store kind {kind!r}")
        directory = self.root / kind
        if not directory.is_dir():
            return []
        return sorted(p.stem for p in directory.glob("*.json"))

    def update(self, kind: str, key: str, fn: Callable[[Any], Any], default: Any = None) -> Any:
        """Atomic read-modify-write; ``fn`` gets ``default`` for a new key."""
        with self.lock(kind, key):
            doc = self.get_or(kind, key, default)
            new_doc = fn(doc)
            self.put(kind, key, new_doc)
            return new_doc
