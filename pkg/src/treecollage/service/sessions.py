"""In-memory collection sessions with optional write-through persistence."""
from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..manifest import Manifest


@dataclass
class CollectionSession:
    """One loaded collection: its manifest and the latest committed layout.

    ``current`` pairs the revision with the serialized layout document and is
    swapped atomically, so readers never observe a torn revision/layout pair.
    Mutations are serialized by the per-session lock.
    """

    id: str
    manifest: Manifest
    original_root: str
    current: tuple[int, bytes]
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def revision(self) -> int:
        return self.current[0]

    @property
    def layout_bytes(self) -> bytes:
        return self.current[1]


class SessionStore:
    def __init__(self, data_dir: str | Path | None = None) -> None:
        self._sessions: dict[str, CollectionSession] = {}
        self._registry_lock = threading.Lock()
        self.data_dir = Path(data_dir) if data_dir is not None else None

    def create(self, manifest: Manifest, original_root: str, layout_bytes: bytes,
               manifest_bytes: bytes) -> CollectionSession:
        session = CollectionSession(
            id=uuid.uuid4().hex,
            manifest=manifest,
            original_root=original_root,
            current=(1, layout_bytes),
        )
        with self._registry_lock:
            self._sessions[session.id] = session
        self._persist(session, manifest_bytes=manifest_bytes)
        return session

    def get(self, session_id: str) -> CollectionSession | None:
        with self._registry_lock:
            return self._sessions.get(session_id)

    def commit(self, session: CollectionSession, layout_bytes: bytes) -> int:
        revision = session.revision + 1
        session.current = (revision, layout_bytes)
        self._persist(session)
        return revision

    def _persist(self, session: CollectionSession, manifest_bytes: bytes | None = None) -> None:
        if self.data_dir is None:
            return
        root = self.data_dir / session.id
        root.mkdir(parents=True, exist_ok=True)
        if manifest_bytes is not None:
            (root / "manifest.json").write_bytes(manifest_bytes)
        (root / "layout.json").write_bytes(session.layout_bytes)
