"""In-memory stand-ins for a chain and for the outside storage."""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from ..embed import ChainProfile, RefKind, StorageRef, profile
from ..errors import LedgerRejected, MissingError
from ..tokens import Chain

URL_PREFIX = b"https://drive.google.com/file/d/"
IPFS_PREFIX = b"/ipfs/"
URL_BYTES = 66
IPFS_BYTES = 48


@dataclass(frozen=True)
class SimTx:
    txid: bytes
    seq: int
    data: bytes
    prev: bytes | None = None  # spent input, when the chunk is outpoint-linked


class SimLedger:
    """Append-only transaction log for one chain profile.

    ``txid = SHA256(prev | data | seq)`` with ``seq`` as 8 bytes big-endian,
    so identical payloads still get distinct ids.
    """

    def __init__(self, chain: ChainProfile | Chain | str = Chain.BTC):
        self.profile = chain if isinstance(chain, ChainProfile) else profile(chain)
        self._log: list[SimTx] = []
        self._index: dict[bytes, SimTx] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._log)

    def __iter__(self):
        return iter(list(self._log))

    def submit_tx(self, data: bytes, prev: bytes | None = None) -> bytes:
        data = bytes(data)
        limit = self.profile.max_chunk
        if limit is not None and len(data) > limit:
            raise LedgerRejected(f"{len(data)} bytes exceeds the {limit}-byte limit")
        with self._lock:
            if prev is not None and prev not in self._index:
                raise LedgerRejected(f"input {prev.hex()} does not exist")
            seq = len(self._log)
            txid = hashlib.sha256((prev or b"") + data + seq.to_bytes(8, "big")).digest()
            tx = SimTx(txid, seq, data, prev)
            self._log.append(tx)
            self._index[txid] = tx
        return txid

    def get_tx(self, txid: bytes) -> SimTx:
        try:
            return self._index[bytes(txid)]
        except KeyError:
            raise MissingError(f"no transaction {bytes(txid).hex()}") from None

    def to_json(self) -> dict:
        return {
            "chain": self.profile.chain.name.lower(),
            "txs": [
                {"txid": t.txid.hex(), "data": t.data.hex(),
                 "prev": t.prev.hex() if t.prev else None}
                for t in self._log
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> SimLedger:
        led = cls(obj["chain"])
        for rec in obj["txs"]:
            prev = bytes.fromhex(rec["prev"]) if rec.get("prev") else None
            txid = led.submit_tx(bytes.fromhex(rec["data"]), prev)
            if txid.hex() != rec["txid"]:
                raise MissingError("ledger file is inconsistent with its txids")
        return led

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path, chain: Chain | str = Chain.BTC) -> SimLedger:
        p = Path(path)
        if not p.exists():
            return cls(chain)
        return cls.from_json(json.loads(p.read_text()))


class SimStorage:
    """Semi-honest outside storage: returns what was stored, or nothing.

    References are derived from the content hash: a 66-byte Drive-style URL
    or a 48-byte IPFS path.
    """

    def __init__(self):
        self.objects: dict[bytes, bytes] = {}

    def put(self, data: bytes, kind: RefKind = RefKind.URL) -> StorageRef:
        h = hashlib.sha256(data).hexdigest().encode()
        if kind is RefKind.URL:
            ref = URL_PREFIX + h[:URL_BYTES - len(URL_PREFIX)]
        else:
            ref = IPFS_PREFIX + h[:IPFS_BYTES - len(IPFS_PREFIX)]
        self.objects[ref] = bytes(data)
        return StorageRef(RefKind(kind), ref)

    def get(self, ref: StorageRef) -> bytes:
        try:
            return self.objects[ref.ref]
        except KeyError:
            raise MissingError(f"storage object {ref.ref.decode(errors='replace')} unavailable") from None

    def to_json(self) -> dict:
        return {k.decode(): v.hex() for k, v in self.objects.items()}

    @classmethod
    def from_json(cls, obj: dict) -> SimStorage:
        st = cls()
        st.objects = {k.encode(): bytes.fromhex(v) for k, v in obj.items()}
        return st

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> SimStorage:
        p = Path(path)
        return cls.from_json(json.loads(p.read_text())) if p.exists() else cls()
