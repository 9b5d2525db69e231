"""Accident-keyed append-only storage for verified upload records."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .group import Curve
from .messages import decode_record, encode_record
from .policycrypt import CipherCore


@dataclass(frozen=True)
class StoredRecord:
    core: CipherCore
    stored_at: int  # simulation clock tick of acceptance
    via: str  # name of the verifying unit


class RecordStore:
    """Records grouped by accident id; append-only.

    With a persist directory set, every accident also gets one file of
    length-prefixed record serializations, appended as records arrive.
    """

    def __init__(self, persist_dir: "str | Path | None" = None) -> None:
        self._records: dict[bytes, list[StoredRecord]] = {}
        self.persist_dir = Path(persist_dir) if persist_dir is not None else None
        if self.persist_dir is not None:
            self.persist_dir.mkdir(parents=True, exist_ok=True)

    def _path_for(self, accident_id: bytes) -> Path:
        assert self.persist_dir is not None
        return self.persist_dir / (accident_id.hex() + ".rec")

    def append(self, core: CipherCore, stored_at: int = 0, via: str = "") -> int:
        """Store a record; returns its index within the accident's list."""
        records = self._records.setdefault(core.accident_id, [])
        records.append(StoredRecord(core, stored_at, via))
        if self.persist_dir is not None:
            blob = encode_record(core)
            with self._path_for(core.accident_id).open("ab") as fh:
                fh.write(len(blob).to_bytes(4, "big") + blob)
        return len(records) - 1

    def get(self, accident_id: bytes, index: int) -> StoredRecord:
        records = self._records.get(accident_id)
        if not records:
            raise KeyError(f"no records for accident {accident_id.hex()}")
        if not 0 <= index < len(records):
            raise IndexError(f"record index {index} out of range")
        return records[index]

    def count(self, accident_id: bytes) -> int:
        return len(self._records.get(accident_id, ()))

    def accidents(self) -> list[bytes]:
        return sorted(self._records)

    @classmethod
    def load(cls, persist_dir: "str | Path", curve: Curve) -> "RecordStore":
        """Rebuild an in-memory store from a persist directory."""
        store = cls()
        for path in sorted(Path(persist_dir).glob("*.rec")):
            data = path.read_bytes()
            pos = 0
            while pos < len(data):
                if pos + 4 > len(data):
                    raise ValueError(f"truncated length prefix in {path.name}")
                n = int.from_bytes(data[pos : pos + 4], "big")
                end = pos + 4 + n
                if end > len(data):
                    raise ValueError(f"truncated record in {path.name}")
                store.append(decode_record(curve, data[pos + 4 : end]))
                pos = end
        return store
