"""Prime-order group over Curve25519 (ristretto255) and its scalar field.

Scalars are plain ints reduced mod ``L``; they encode as 32 bytes
little-endian. Group elements are :class:`Point` values wrapping their
canonical 32-byte ristretto encoding, written additively
(``a * P + Q``). Curve arithmetic is delegated to libsodium through
:mod:`rbcl`.
"""

from __future__ import annotations

import hashlib
import secrets
from random import Random
from typing import Iterable, Sequence

import rbcl

from .errors import DecodeError, UsageError

#: Order of the ristretto255 group.
L = 2**252 + 27742317777372353535851937790883648493

SCALAR_BYTES = 32
POINT_BYTES = 32


# -- scalars -----------------------------------------------------------------

def encode_scalar(s: int) -> bytes:
    return (s % L).to_bytes(SCALAR_BYTES, "little")


def decode_scalar(data: bytes) -> int:
    """Decode a canonical scalar; values >= L are rejected."""
    if len(data) != SCALAR_BYTES:
        raise DecodeError(f"scalar must be {SCALAR_BYTES} bytes, got {len(data)}")
    s = int.from_bytes(data, "little")
    if s >= L:
        raise DecodeError("non-canonical scalar")
    return s


def inverse(s: int) -> int:
    s %= L
    if s == 0:
        raise ZeroDivisionError("zero has no inverse mod L")
    return pow(s, -1, L)


def random_scalar(rng: Random | None = None) -> int:
    """Uniform scalar; ``rng`` makes it reproducible (tests, golden vectors)."""
    raw = rng.randbytes(64) if rng is not None else secrets.token_bytes(64)
    return int.from_bytes(raw, "little") % L


# -- points ------------------------------------------------------------------

class Point:
    """Element of the ristretto255 group, held in canonical encoding."""

    __slots__ = ("_enc",)

    def __init__(self, enc: bytes):
        # Trusted constructor; use Point.decode for untrusted bytes.
        self._enc = bytes(enc)

    @classmethod
    def decode(cls, data: bytes) -> Point:
        data = bytes(data)
        if len(data) != POINT_BYTES:
            raise DecodeError(f"point must be {POINT_BYTES} bytes, got {len(data)}")
        # libsodium masks the top bit before its canonicity check; the encoding
        # is only canonical with that bit clear.
        if data[31] & 0x80 or not rbcl.crypto_core_ristretto255_is_valid_point(data):
            raise DecodeError("invalid or non-canonical ristretto255 encoding")
        return cls(data)

    @classmethod
    def identity(cls) -> Point:
        return cls(bytes(POINT_BYTES))

    def encode(self) -> bytes:
        return self._enc

    def hex(self) -> str:
        return self._enc.hex()

    def is_identity(self) -> bool:
        return self._enc == bytes(POINT_BYTES)

    def __add__(self, other: Point) -> Point:
        if not isinstance(other, Point):
            return NotImplemented
        if self.is_identity():
            return other
        if other.is_identity():
            return self
        return Point(rbcl.crypto_core_ristretto255_add(self._enc, other._enc))

    def __sub__(self, other: Point) -> Point:
        if not isinstance(other, Point):
            return NotImplemented
        if other.is_identity():
            return self
        return Point(rbcl.crypto_core_ristretto255_sub(self._enc, other._enc))

    def __neg__(self) -> Point:
        return Point.identity() - self

    def __mul__(self, k: int) -> Point:
        if not isinstance(k, int):
            return NotImplemented
        k %= L
        if k == 0 or self.is_identity():
            return Point.identity()
        if k == 1:
            return self
        return Point(
            rbcl.crypto_scalarmult_ristretto255_allow_scalar_zero(
                k.to_bytes(SCALAR_BYTES, "little"), self._enc
            )
        )

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Point) and self._enc == other._enc

    def __hash__(self) -> int:
        return hash(self._enc)

    def __repr__(self) -> str:
        return f"Point({self._enc.hex()[:16]}...)"


_BASE = Point(rbcl.crypto_scalarmult_ristretto255_base((1).to_bytes(32, "little")))


def base_generator() -> Point:
    """The image of the Curve25519 base point (u = 9) in ristretto255."""
    return _BASE


def base_mul(k: int) -> Point:
    k %= L
    if k == 0:
        return Point.identity()
    return Point(rbcl.crypto_scalarmult_ristretto255_base(k.to_bytes(32, "little")))


def multi_mul(scalars: Iterable[int], points: Iterable[Point]) -> Point:
    acc = Point.identity()
    for k, p in zip(scalars, points, strict=True):
        acc = acc + p * k
    return acc


def point_sum(points: Iterable[Point]) -> Point:
    acc = Point.identity()
    for p in points:
        acc = acc + p
    return acc


# -- hashing -----------------------------------------------------------------

def _tagged(domain_tag: bytes, data: bytes) -> bytes:
    if not domain_tag:
        raise UsageError("domain tag must be nonempty")
    if len(domain_tag) > 255:
        raise UsageError("domain tag longer than 255 bytes")
    return bytes([len(domain_tag)]) + domain_tag + data


def hash_to_scalar(domain_tag: bytes, data: bytes) -> int:
    """SHA-512 of the length-prefixed tag and data, reduced mod L."""
    digest = hashlib.sha512(_tagged(domain_tag, data)).digest()
    return int.from_bytes(digest, "little") % L


def hash_to_group(domain_tag: bytes, data: bytes) -> Point:
    """Map to a group element with no known discrete log (ristretto255 from_hash)."""
    digest = hashlib.sha512(_tagged(domain_tag, data)).digest()
    return Point(rbcl.crypto_core_ristretto255_from_hash(digest))


def encode_points(points: Sequence[Point]) -> bytes:
    return b"".join(p.encode() for p in points)
