"""Out-of-context artifact storage.

Pipeline agents exchange natural-language messages only; the actual payloads
(source documents, generated scenarios, spreadsheets) live here and travel as
opaque handles. The store is content-addressed and in-memory, with optional
write-through persistence to a directory.
"""

from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import ArtifactLookupError

ARTIFACT_KINDS = frozenset({
    "fsd-source",
    "fsd-preprocessed",
    "chapter-extract",
    "scenario-md",
    "factcheck-report",
    "scenario-translated",
    "spreadsheet",
})


@dataclass(frozen=True)
class ArtifactHandle:
    id: str
    kind: str
    created_by: str
    created_at: float
    seq: int            # insertion order; breaks created_at ties deterministically


class ArtifactStore:
    """Content-addressed artifact store.

    ids are derived from (kind, content), so identical payloads map to the
    same handle and round-trips are byte-exact. Reads are lock-free against
    immutable entries; writes are serialized. When ``persist_dir`` is given,
    every put is also written to disk, one file per artifact.
    """

    def __init__(self, persist_dir: str | Path | None = None):
        self._entries: dict[str, tuple[ArtifactHandle, bytes, bool]] = {}
        self._lock = threading.Lock()
        self._seq = 0
        self._persist_dir = Path(persist_dir) if persist_dir else None
        if self._persist_dir:
            self._persist_dir.mkdir(parents=True, exist_ok=True)

    def put(self, kind: str, content: str | bytes, created_by: str = "system") -> ArtifactHandle:
        if not content:
            raise ValueError("artifact content must be non-empty")
        is_text = isinstance(content, str)
        data = content.encode("utf-8") if is_text else bytes(content)
        artifact_id = hashlib.sha256(kind.encode("utf-8") + b"\x00" + data).hexdigest()[:24]
        with self._lock:
            existing = self._entries.get(artifact_id)
            if existing is not None:
                return existing[0]
            self._seq += 1
            handle = ArtifactHandle(id=artifact_id, kind=kind, created_by=created_by,
                                    created_at=time.time(), seq=self._seq)
            self._entries[artifact_id] = (handle, data, is_text)
        if self._persist_dir:
            suffix = ".txt" if is_text else ".bin"
            (self._persist_dir / f"{handle.seq:05d}_{kind}_{artifact_id}{suffix}").write_bytes(data)
        return handle

    def get(self, handle: ArtifactHandle | str) -> str | bytes:
        """Return the stored content, byte-exact (str iff text was put)."""
        artifact_id = handle.id if isinstance(handle, ArtifactHandle) else handle
        entry = self._entries.get(artifact_id)
        if entry is None:
            raise ArtifactLookupError(f"unknown artifact handle: {artifact_id}")
        _, data, is_text = entry
        return data.decode("utf-8") if is_text else data

    def get_text(self, handle: ArtifactHandle | str) -> str:
        content = self.get(handle)
        return content if isinstance(content, str) else content.decode("utf-8")

    def contains(self, handle: ArtifactHandle | str) -> bool:
        artifact_id = handle.id if isinstance(handle, ArtifactHandle) else handle
        return artifact_id in self._entries

    def handles(self, kind: str | None = None) -> list[ArtifactHandle]:
        """All handles in insertion order, optionally filtered by kind."""
        entries = sorted(self._entries.values(), key=lambda entry: entry[0].seq)
        return [h for h, _, _ in entries if kind is None or h.kind == kind]

    def latest(self, kind: str) -> ArtifactHandle | None:
        """Newest handle of the given kind; ties broken by insertion order."""
        candidates = self.handles(kind)
        return candidates[-1] if candidates else None

    def bodies(self, min_chars: int = 0) -> list[str]:
        """Decoded text of every stored artifact with length >= min_chars.

        Binary payloads are decoded leniently; used by transcript scans that
        check no artifact body leaks into supervisor envelopes.
        """
        out = []
        for _, data, _ in self._entries.values():
            text = data.decode("utf-8", errors="replace")
            if len(text) >= min_chars:
                out.append(text)
        return out

    def __len__(self) -> int:
        return len(self._entries)
