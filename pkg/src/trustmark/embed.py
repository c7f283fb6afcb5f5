"""Packing tokens into chain transactions.

Case 1 writes the whole encoded token on chain; case 2 writes only its
SHA-256 digest plus a reference to an outside store holding the token.

Each embedded data field starts with one header byte (``0xA0 | flags``)::

    FLAG_INLINE    the next 32 bytes are the predecessor's txid
    FLAG_OUTPOINT  the predecessor is the transaction's spent input (tx.prev)
    FLAG_DIGEST    case-2 payload: digest(32) | storage reference

Case 1 chains its transactions through the spent-input reference, so the
whole data field carries payload. Case 2 writes the predecessor txid into
the data field right after the header.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Protocol, Sequence

from .errors import DecodeError, IntegrityError, LedgerRejected, UsageError
from .tokens import Chain, Token

MAGIC = 0xA0
FLAG_INLINE = 0x01
FLAG_OUTPOINT = 0x02
FLAG_DIGEST = 0x04
TXID_BYTES = 32
DIGEST_BYTES = 32


class Mode(str, Enum):
    CASE1 = "case1"
    CASE2 = "case2"


class LinkMode(str, Enum):
    SINGLE = "single"
    OUTPOINT = "outpoint"
    TXID_CHAIN = "txid_chain"


@dataclass(frozen=True)
class ChainProfile:
    chain: Chain
    max_chunk: int | None  # bytes of embeddable data per transaction; None = unbounded
    unit: str


PROFILES = {
    Chain.BTC: ChainProfile(Chain.BTC, 80, "BTC"),  # OP_RETURN
    Chain.ETH: ChainProfile(Chain.ETH, None, "gas"),  # calldata
    Chain.NEM: ChainProfile(Chain.NEM, 1024, "XEM"),  # message field
}


def profile(chain: Chain | str) -> ChainProfile:
    if isinstance(chain, str):
        try:
            chain = Chain[chain.upper()]
        except KeyError:
            raise UsageError(f"unknown chain {chain!r}") from None
    return PROFILES[chain]


# -- storage references ----------------------------------------------------------

class RefKind(str, Enum):
    URL = "url"
    IPFS_PATH = "ipfs"


@dataclass(frozen=True)
class StorageRef:
    kind: RefKind
    ref: bytes

    def __post_init__(self):
        if not self.ref:
            raise UsageError("empty storage reference")

    def __len__(self) -> int:
        return len(self.ref)

    @classmethod
    def parse(cls, ref: bytes) -> StorageRef:
        if ref.startswith(b"https://") or ref.startswith(b"http://"):
            return cls(RefKind.URL, ref)
        if ref.startswith(b"/ipfs/"):
            return cls(RefKind.IPFS_PATH, ref)
        raise DecodeError(f"unrecognised storage reference {ref[:16]!r}")


class Ledger(Protocol):
    def submit_tx(self, data: bytes, prev: bytes | None = None) -> bytes: ...
    def get_tx(self, txid: bytes): ...


class Storage(Protocol):
    def put(self, data: bytes, kind: RefKind = RefKind.URL) -> StorageRef: ...
    def get(self, ref: StorageRef) -> bytes: ...


# -- plans ---------------------------------------------------------------------

@dataclass(frozen=True)
class TxPayload:
    body: bytes
    flags: int

    @property
    def size(self) -> int:
        """Embedded data length once the link (if inline) is filled in."""
        return 1 + (TXID_BYTES if self.flags & FLAG_INLINE else 0) + len(self.body)

    def data(self, prev: bytes | None) -> bytes:
        head = bytes([MAGIC | self.flags])
        if self.flags & FLAG_INLINE:
            if prev is None or len(prev) != TXID_BYTES:
                raise UsageError("inline link needs the 32-byte predecessor txid")
            return head + prev + self.body
        return head + self.body


@dataclass
class ChunkPlan:
    chain: Chain
    mode: Mode
    link_mode: LinkMode
    chunks: list[TxPayload]
    txids: list[bytes] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.chunks)

    @property
    def payload(self) -> bytes:
        return b"".join(c.body for c in self.chunks)

    def chunk_sizes(self) -> list[int]:
        return [c.size for c in self.chunks]

    def to_json(self, fee: FeeQuote | None = None) -> dict:
        out = {
            "chain": self.chain.name.lower(),
            "mode": self.mode.value,
            "link_mode": self.link_mode.value,
            "chunks": [
                {"index": i, "size": c.size, "flags": c.flags, "body_hex": c.body.hex()}
                for i, c in enumerate(self.chunks)
            ],
        }
        if self.txids:
            out["txids"] = [t.hex() for t in self.txids]
        if fee is not None:
            out["fee_quote"] = fee.to_json()
        return out


def _split(payload: bytes, first: int | None, rest: int | None) -> list[bytes]:
    if first is None or len(payload) <= first:
        return [payload]
    if rest is None or rest <= 0:
        raise UsageError("chunk capacity too small to carry a link")
    out = [payload[:first]]
    for i in range(first, len(payload), rest):
        out.append(payload[i:i + rest])
    return out


def encode_token(token: Token) -> bytes:
    return token.to_bytes()


def decode_token(data: bytes, n: int = 4, m: int = 2) -> Token:
    return Token.from_bytes(data, n, m)


def plan_case1(payload: bytes | Token, chain: ChainProfile | Chain | str) -> ChunkPlan:
    """Full token on chain, chunks chained through their spent inputs."""
    prof = chain if isinstance(chain, ChainProfile) else profile(chain)
    if isinstance(payload, Token):
        payload = encode_token(payload)
    if not payload:
        raise UsageError("empty payload")
    cap = None if prof.max_chunk is None else prof.max_chunk - 1
    bodies = _split(payload, cap, cap)
    chunks = [TxPayload(b, FLAG_OUTPOINT if i else 0) for i, b in enumerate(bodies)]
    link = LinkMode.SINGLE if len(chunks) == 1 else LinkMode.OUTPOINT
    return ChunkPlan(prof.chain, Mode.CASE1, link, chunks)


def plan_case2(token: bytes | Token, storage: StorageRef,
               chain: ChainProfile | Chain | str) -> ChunkPlan:
    """Digest of the token plus its storage reference, txids written inline."""
    prof = chain if isinstance(chain, ChainProfile) else profile(chain)
    data = encode_token(token) if isinstance(token, Token) else token
    payload = hashlib.sha256(data).digest() + storage.ref
    if prof.max_chunk is None:
        bodies = [payload]
    else:
        bodies = _split(payload, prof.max_chunk - 1, prof.max_chunk - 1 - TXID_BYTES)
    chunks = [TxPayload(b, FLAG_DIGEST | (FLAG_INLINE if i else 0))
              for i, b in enumerate(bodies)]
    link = LinkMode.SINGLE if len(chunks) == 1 else LinkMode.TXID_CHAIN
    return ChunkPlan(prof.chain, Mode.CASE2, link, chunks)


# -- submission and extraction -------------------------------------------------

def link_and_submit(plan: ChunkPlan, ledger: Ledger) -> bytes:
    """Submit chunks in order, linking each to its predecessor; returns the head txid."""
    prev = None
    txids = []
    for i, chunk in enumerate(plan.chunks):
        data = chunk.data(prev)
        outpoint = prev if chunk.flags & FLAG_OUTPOINT else None
        try:
            prev = ledger.submit_tx(data, prev=outpoint)
        except LedgerRejected as exc:
            raise LedgerRejected(f"chunk {i} rejected: {exc}", index=i) from exc
        txids.append(prev)
    plan.txids = txids
    return prev


def walk(head_txid: bytes, ledger: Ledger) -> tuple[list[bytes], list[bytes], int]:
    """Follow links back from ``head_txid``; returns (txids, bodies, flags) oldest first."""
    txids, bodies = [], []
    seen = set()
    cur: bytes | None = head_txid
    mode_flag = None
    while cur is not None:
        if cur in seen:
            raise IntegrityError("transaction links form a cycle")
        seen.add(cur)
        tx = ledger.get_tx(cur)
        data = tx.data
        if not data or data[0] & 0xF0 != MAGIC:
            raise DecodeError(f"transaction {cur.hex()} carries no token data")
        flags = data[0] & 0x0F
        if mode_flag is None:
            mode_flag = flags & FLAG_DIGEST
        elif flags & FLAG_DIGEST != mode_flag:
            raise DecodeError("linked transactions mix embedding modes")
        if flags & FLAG_INLINE:
            if len(data) < 1 + TXID_BYTES:
                raise DecodeError("truncated inline link")
            nxt, body = data[1:1 + TXID_BYTES], data[1 + TXID_BYTES:]
        elif flags & FLAG_OUTPOINT:
            if tx.prev is None:
                raise DecodeError("outpoint link flagged but transaction has no input")
            nxt, body = tx.prev, data[1:]
        else:
            nxt, body = None, data[1:]
        txids.append(cur)
        bodies.append(body)
        cur = nxt
    txids.reverse()
    bodies.reverse()
    return txids, bodies, mode_flag or 0


def extract_payload(head_txid: bytes, ledger: Ledger,
                    storage: Storage | None = None) -> tuple[Mode, bytes]:
    """Reassembled on-chain payload, resolving case 2 through ``storage``."""
    _, bodies, flags = walk(head_txid, ledger)
    payload = b"".join(bodies)
    if not flags & FLAG_DIGEST:
        return Mode.CASE1, payload
    if len(payload) <= DIGEST_BYTES:
        raise DecodeError("case-2 payload too short")
    digest, ref = payload[:DIGEST_BYTES], StorageRef.parse(payload[DIGEST_BYTES:])
    if storage is None:
        raise UsageError("case-2 token needs a storage backend to resolve")
    obj = storage.get(ref)
    if hashlib.sha256(obj).digest() != digest:
        raise IntegrityError("stored object does not match the on-chain digest")
    return Mode.CASE2, obj


def extract(head_txid: bytes, ledger: Ledger, storage: Storage | None = None,
            n: int = 4, m: int = 2) -> Token:
    _, data = extract_payload(head_txid, ledger, storage)
    return decode_token(data, n, m)


# -- fees ----------------------------------------------------------------------

@dataclass(frozen=True)
class FeeConfig:
    btc_per_tx: Decimal = Decimal("0.002")
    nem_per_unit: Decimal = Decimal("0.05")
    eth_base_gas: int = 21000
    eth_nonzero_gas: int = 16
    eth_zero_gas: int = 4

    @classmethod
    def from_json(cls, obj: dict) -> FeeConfig:
        kw = {}
        for name in ("btc_per_tx", "nem_per_unit"):
            if name in obj:
                kw[name] = Decimal(str(obj[name]))
        for name in ("eth_base_gas", "eth_nonzero_gas", "eth_zero_gas"):
            if name in obj:
                kw[name] = int(obj[name])
        return cls(**kw)


@dataclass(frozen=True)
class FeeQuote:
    chain: Chain
    amount: Decimal
    unit: str
    tx_count: int

    def to_json(self) -> dict:
        return {"chain": self.chain.name.lower(), "amount": str(self.amount),
                "unit": self.unit, "tx_count": self.tx_count}


def estimate_fee(chain: ChainProfile | Chain | str, chunks: Sequence[bytes | int],
                 config: FeeConfig = FeeConfig()) -> FeeQuote:
    """Fee for embedding ``chunks`` (data bytes, or just their lengths).

    ETH gas depends on zero bytes, so passing lengths there prices every byte
    as nonzero.
    """
    prof = chain if isinstance(chain, ChainProfile) else profile(chain)
    sizes = [c if isinstance(c, int) else len(c) for c in chunks]
    if prof.chain is Chain.NEM:
        units = sum(math.ceil(s / 32) + 1 for s in sizes)
        amount = units * config.nem_per_unit
    elif prof.chain is Chain.BTC:
        amount = len(sizes) * config.btc_per_tx
    elif prof.chain is Chain.ETH:
        gas = 0
        for c in chunks:
            if isinstance(c, int):
                zeros, nonzero = 0, c
            else:
                zeros = c.count(0)
                nonzero = len(c) - zeros
            gas += config.eth_base_gas + config.eth_nonzero_gas * nonzero + config.eth_zero_gas * zeros
        amount = Decimal(gas)
    else:  # pragma: no cover
        raise UsageError(f"no fee model for {prof.chain}")
    return FeeQuote(prof.chain, amount, prof.unit, len(sizes))
