"""Token protocol: issuance, revocation, submitter checks and auditing.

Canonical message layout (the bytes that get ring-signed)::

    0x01                      version
    chain_id        1 byte
    len(address)    2 bytes BE, then address bytes
    flag            1 byte    (0x01 TRUST, 0x00 UNTRUST)
    auditor_pk      32 bytes
    expiry          8 bytes BE unix seconds
    payload tag     1 byte    (0x01 issue, 0x02 revoke)
      issue:  C (32)
      revoke: r_link (32) | dec (32) | orig_txid (32)
    len(note)       2 bytes BE, then UTF-8 note
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from enum import IntEnum
from pathlib import Path
from random import Random

from . import ars
from .ars import AdmitterKeypair, OpenProof, Ring, RingSig
from .crs import PublicParams
from .errors import DecodeError, MissingError, UsageError
from .group import Point, decode_scalar, encode_scalar, random_scalar
from .pedersen import com_open, commit

VERSION = 0x01


class Chain(IntEnum):
    BTC = 1
    ETH = 2
    NEM = 3


class Flag(IntEnum):
    UNTRUST = 0
    TRUST = 1


@dataclass(frozen=True)
class Target:
    chain: Chain
    address: bytes


@dataclass(frozen=True)
class IssuePayload:
    commitment: Point


@dataclass(frozen=True)
class RevokePayload:
    r_link: int
    dec: int
    orig_txid: bytes


@dataclass(frozen=True)
class LinkSecret:
    """Opening of an issuance commitment; kept by the admitter to revoke later."""

    r_link: int
    dec: int

    def to_json(self) -> dict:
        return {"r_link": encode_scalar(self.r_link).hex(), "dec": encode_scalar(self.dec).hex()}

    @classmethod
    def from_json(cls, obj: dict) -> LinkSecret:
        return cls(decode_scalar(bytes.fromhex(obj["r_link"])),
                   decode_scalar(bytes.fromhex(obj["dec"])))


@dataclass(frozen=True)
class TokenMessage:
    target: Target
    flag: Flag
    auditor_pk: Point
    expiry: int
    payload: IssuePayload | RevokePayload
    note: str = ""

    def encode(self) -> bytes:
        addr = self.target.address
        note = self.note.encode("utf-8")
        if len(addr) > 0xFFFF or len(note) > 0xFFFF:
            raise UsageError("address or note too long")
        if not 0 <= self.expiry < 2**64:
            raise UsageError("expiry out of range")
        out = bytearray([VERSION, int(self.target.chain)])
        out += len(addr).to_bytes(2, "big") + addr
        out.append(int(self.flag))
        out += self.auditor_pk.encode()
        out += self.expiry.to_bytes(8, "big")
        if isinstance(self.payload, IssuePayload):
            out.append(0x01)
            out += self.payload.commitment.encode()
        elif isinstance(self.payload, RevokePayload):
            if len(self.payload.orig_txid) != 32:
                raise UsageError("orig_txid must be 32 bytes")
            out.append(0x02)
            out += encode_scalar(self.payload.r_link) + encode_scalar(self.payload.dec)
            out += self.payload.orig_txid
        else:
            raise UsageError("payload must be IssuePayload or RevokePayload")
        out += len(note).to_bytes(2, "big") + note
        return bytes(out)

    @classmethod
    def decode(cls, data: bytes) -> TokenMessage:
        msg, rest = cls.decode_prefix(data)
        if rest:
            raise DecodeError(f"{len(rest)} trailing bytes after message")
        return msg

    @classmethod
    def decode_prefix(cls, data: bytes) -> tuple[TokenMessage, bytes]:
        """Decode one message from the front of ``data``; returns the remainder."""
        r = _Reader(data)
        if r.take(1)[0] != VERSION:
            raise DecodeError("unknown message version")
        try:
            chain = Chain(r.take(1)[0])
        except ValueError as exc:
            raise DecodeError(str(exc)) from exc
        address = r.take(r.u16())
        flag_byte = r.take(1)[0]
        if flag_byte not in (0, 1):
            raise DecodeError(f"bad flag byte {flag_byte:#x}")
        auditor_pk = Point.decode(r.take(32))
        expiry = int.from_bytes(r.take(8), "big")
        tag = r.take(1)[0]
        if tag == 0x01:
            payload: IssuePayload | RevokePayload = IssuePayload(Point.decode(r.take(32)))
        elif tag == 0x02:
            payload = RevokePayload(decode_scalar(r.take(32)), decode_scalar(r.take(32)),
                                    r.take(32))
        else:
            raise DecodeError(f"bad payload tag {tag:#x}")
        try:
            note = r.take(r.u16()).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DecodeError("note is not UTF-8") from exc
        msg = cls(Target(chain, address), Flag(flag_byte), auditor_pk, expiry, payload, note)
        return msg, r.rest()


class _Reader:
    def __init__(self, data: bytes):
        self.data = bytes(data)
        self.pos = 0

    def take(self, k: int) -> bytes:
        if self.pos + k > len(self.data):
            raise DecodeError("truncated input")
        out = self.data[self.pos:self.pos + k]
        self.pos += k
        return out

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "big")

    def rest(self) -> bytes:
        return self.data[self.pos:]


@dataclass(frozen=True)
class Token:
    msg: TokenMessage
    sig: RingSig
    ring_id: bytes

    def message_bytes(self) -> bytes:
        return self.msg.encode()

    def to_bytes(self) -> bytes:
        return self.msg.encode() + self.ring_id + self.sig.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, n: int = 4, m: int = 2) -> Token:
        msg, rest = TokenMessage.decode_prefix(data)
        if len(rest) != 32 + RingSig.size(n, m):
            raise DecodeError("token has wrong signature length for these parameters")
        return cls(msg, RingSig.from_bytes(rest[32:], n, m), rest[:32])


# -- registry ------------------------------------------------------------------

class AdmitterRegistry:
    """Directory of admitter keys, auditor keys and published rings."""

    def __init__(self):
        self.admitters: list[Point] = []
        self.auditors: list[Point] = []
        self.rings: dict[bytes, Ring] = {}

    def add_admitter(self, pk: Point) -> None:
        if pk not in self.admitters:
            self.admitters.append(pk)

    def add_auditor(self, opk: Point) -> None:
        if opk not in self.auditors:
            self.auditors.append(opk)

    def publish_ring(self, members) -> Ring:
        ring = members if isinstance(members, Ring) else Ring(tuple(members))
        unknown = [p for p in ring.members if p not in self.admitters]
        if unknown:
            raise UsageError(f"{len(unknown)} ring member(s) are not registered admitters")
        self.rings[ring.ring_id] = ring
        return ring

    def resolve(self, ring_id: bytes) -> Ring:
        try:
            return self.rings[ring_id]
        except KeyError:
            raise MissingError(f"unknown ring {ring_id.hex()}") from None

    def to_json(self) -> dict:
        return {
            "admitters": [p.hex() for p in self.admitters],
            "auditors": [p.hex() for p in self.auditors],
            "rings": [
                {"ring_id": rid.hex(), "members": [p.hex() for p in ring.members]}
                for rid, ring in self.rings.items()
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> AdmitterRegistry:
        reg = cls()
        for h in obj.get("admitters", []):
            reg.add_admitter(Point.decode(bytes.fromhex(h)))
        for h in obj.get("auditors", []):
            reg.add_auditor(Point.decode(bytes.fromhex(h)))
        for entry in obj.get("rings", []):
            ring = Ring(tuple(Point.decode(bytes.fromhex(h)) for h in entry["members"]))
            if ring.ring_id.hex() != entry["ring_id"]:
                raise DecodeError("ring_id does not match its members")
            reg.rings[ring.ring_id] = ring
        return reg

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> AdmitterRegistry:
        p = Path(path)
        if not p.exists():
            return cls()
        return cls.from_json(json.loads(p.read_text()))


# -- protocol ------------------------------------------------------------------

def _now(now: int | None) -> int:
    return int(time.time()) if now is None else now


def _sign_token(pp, admitter: AdmitterKeypair, ring: Ring, msg: TokenMessage,
                rng) -> Token:
    if admitter.pk not in ring:
        raise UsageError("admitter is not a member of the ring")
    sig = ars.sign(pp, msg.auditor_pk, msg.encode(), ring, admitter.sk, rng)
    return Token(msg, sig, ring.ring_id)


def issue_token(pp: PublicParams, admitter: AdmitterKeypair, ring: Ring,
                auditor_pk: Point, target: Target, flag: Flag, expiry: int,
                note: str = "", *, now: int | None = None,
                rng: Random | None = None) -> tuple[Token, LinkSecret]:
    """Sign a fresh trust/untrust token; returns it with the revocation secret."""
    if admitter.pk not in ring:
        raise UsageError("admitter is not a member of the ring")
    if expiry <= _now(now):
        raise UsageError("expiry is not in the future")
    r_link = random_scalar(rng)
    c, dec = commit(pp.commit_key(), r_link, rng)
    msg = TokenMessage(target, Flag(flag), auditor_pk, expiry, IssuePayload(c), note)
    return _sign_token(pp, admitter, ring, msg, rng), LinkSecret(r_link, dec)


def revoke_token(pp: PublicParams, admitter: AdmitterKeypair, ring: Ring,
                 auditor_pk: Point, target: Target, link: LinkSecret,
                 orig_txid: bytes, expiry: int, note: str = "", *,
                 flag: Flag = Flag.TRUST, now: int | None = None,
                 rng: Random | None = None) -> Token:
    if expiry <= _now(now):
        raise UsageError("expiry is not in the future")
    if len(orig_txid) != 32:
        raise UsageError("orig_txid must be 32 bytes")
    msg = TokenMessage(target, Flag(flag), auditor_pk, expiry,
                       RevokePayload(link.r_link, link.dec, bytes(orig_txid)), note)
    return _sign_token(pp, admitter, ring, msg, rng)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    step: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


ACCEPT = Verdict(True)


def submitter_check(pp: PublicParams, token: Token, registry: AdmitterRegistry,
                    now: int | None = None) -> Verdict:
    """Run the submitter's four abort checks in order."""
    try:
        ring = registry.resolve(token.ring_id)
    except MissingError:
        return Verdict(False, 1, "ring is not published")
    if any(pk not in registry.admitters for pk in ring.members):
        return Verdict(False, 1, "ring contains an unknown public key")
    if token.msg.auditor_pk not in registry.auditors:
        return Verdict(False, 2, "designated key is not a registered auditor")
    if token.msg.expiry <= _now(now):
        return Verdict(False, 3, "token has expired")
    if not ars.verify(pp, token.msg.auditor_pk, token.message_bytes(), ring, token.sig):
        return Verdict(False, 4, "ring signature does not verify")
    return ACCEPT


def verify_revocation(pp: PublicParams, revocation: Token, revocation_ring: Ring,
                      original: Token, original_txid: bytes) -> bool:
    """True iff ``revocation`` validly opens the commitment in ``original``.

    The two tokens may be signed over different rings; only the commitment
    opening, the transaction reference and the revocation's own signature
    matter.
    """
    rev, orig = revocation.msg.payload, original.msg.payload
    if not isinstance(rev, RevokePayload) or not isinstance(orig, IssuePayload):
        return False
    if rev.orig_txid != original_txid:
        return False
    if revocation_ring.ring_id != revocation.ring_id:
        return False
    if not ars.verify(pp, revocation.msg.auditor_pk, revocation.message_bytes(),
                      revocation_ring, revocation.sig):
        return False
    return com_open(pp.commit_key(), orig.commitment, rev.r_link, rev.dec)


def audit_open(pp: PublicParams, token: Token, ring: Ring, osk: int,
               rng: Random | None = None) -> tuple[Point, OpenProof] | None:
    return ars.open(pp, token.message_bytes(), ring, token.sig, osk, rng)


def audit_judge(pp: PublicParams, token: Token, ring: Ring, pk: Point,
                proof: OpenProof) -> bool:
    return ars.judge(pp, token.msg.auditor_pk, token.message_bytes(), ring,
                     token.sig, pk, proof)


def with_flag(token: Token, flag: Flag) -> Token:
    """Copy of ``token`` with the flag swapped and the old signature kept."""
    return replace(token, msg=replace(token.msg, flag=flag))
