"""Accountable ring signatures with a designated opener.

Construction
------------
Admitter keys are commitments to zero, ``pk = sk*h``; auditor keys are
ElGamal keys, ``opk = osk*g``. A signature carries the ElGamal encryption
``(c1, c2) = (r*g, r*opk + pk)`` of the signer's key and a Fiat-Shamir
one-out-of-many proof over the ``N = n**m`` ring slots

    S_i = (pk_i, c1, c2 - pk_i)

showing that some slot has the form ``(sk*h, r*g, r*opk)`` with ``sk, r``
known to the signer. This proves at once that the ciphertext encrypts a ring
member and that the signer holds that member's secret key.

The secret index is written in base ``n`` (``m`` digits, low digit first).
Each digit gets its own bit commitments A_j, B_j, C_j, D_j over the ``n``
vector bases, and each polynomial degree ``k < m`` gets a three-component
blinding element G_k. The verifier recomputes the challenge ``x`` from the
commitments and a second challenge ``y`` from ``x`` and the digit responses,
then uses powers of ``y`` to fold every equation on base ``h`` into a single
check. Because of that fold the proof needs one ``h``-randomness response and
one ``r`` response in total.

At n=4, m=2 a signature is 16 group elements + 8 scalars (768 bytes).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from random import Random
from typing import Sequence

from .crs import PublicParams
from .errors import DecodeError, UsageError
from .group import (
    L, POINT_BYTES, SCALAR_BYTES, Point, base_mul, decode_scalar,
    encode_scalar, hash_to_scalar, random_scalar,
)
from .pedersen import vector_commit

SIGN_TAG = b"ars/v1"
BATCH_TAG = b"ars/v1/batch"
OPEN_TAG = b"ars/v1/open"


# -- keys and rings ------------------------------------------------------------

@dataclass(frozen=True)
class AuditorKeypair:
    opk: Point
    osk: int


@dataclass(frozen=True)
class AdmitterKeypair:
    pk: Point
    sk: int


def okgen(pp: PublicParams, rng: Random | None = None) -> AuditorKeypair:
    osk = random_scalar(rng)
    return AuditorKeypair(pp.g * osk, osk)


def ukgen(pp: PublicParams, rng: Random | None = None) -> AdmitterKeypair:
    sk = random_scalar(rng)
    return AdmitterKeypair(pp.h * sk, sk)


def admitter_from_secret(pp: PublicParams, sk: int) -> AdmitterKeypair:
    return AdmitterKeypair(pp.h * sk, sk % L)


def auditor_from_secret(pp: PublicParams, osk: int) -> AuditorKeypair:
    return AuditorKeypair(pp.g * osk, osk % L)


@dataclass(frozen=True)
class Ring:
    members: tuple[Point, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise UsageError("a ring needs at least one member")

    @property
    def ring_id(self) -> bytes:
        return hashlib.sha256(b"".join(p.encode() for p in self.members)).digest()

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, pk: object) -> bool:
        return pk in self.members

    def padded(self, size: int) -> list[Point]:
        """Members repeated at the tail up to ``size`` slots."""
        if len(self.members) > size:
            raise UsageError(f"ring of {len(self.members)} exceeds N={size}")
        return list(self.members) + [self.members[-1]] * (size - len(self.members))


def digits(index: int, n: int, m: int) -> list[int]:
    """Base-n digits of ``index``, least significant first."""
    if not 0 <= index < n**m:
        raise UsageError(f"index {index} outside [0, {n**m})")
    out = []
    for _ in range(m):
        index, d = divmod(index, n)
        out.append(d)
    return out


# -- signature container -------------------------------------------------------

@dataclass(frozen=True)
class RingSig:
    c1: Point
    c2: Point
    levels: tuple[tuple[Point, Point, Point, Point], ...]  # (A, B, C, D) per digit
    blinders: tuple[tuple[Point, Point, Point], ...]  # G_k per degree k < m
    f: tuple[tuple[int, ...], ...]  # m rows of n-1 digit responses
    z_h: int
    z_r: int

    def points(self) -> list[Point]:
        out = [self.c1, self.c2]
        for lev in self.levels:
            out.extend(lev)
        for gk in self.blinders:
            out.extend(gk)
        return out

    def scalars(self) -> list[int]:
        return [v for row in self.f for v in row] + [self.z_h, self.z_r]

    def to_bytes(self) -> bytes:
        return (b"".join(p.encode() for p in self.points())
                + b"".join(encode_scalar(s) for s in self.scalars()))

    @staticmethod
    def layout(n: int, m: int) -> tuple[int, int]:
        """(group elements, scalars) in a signature for the given shape."""
        return 2 + 7 * m, m * (n - 1) + 2

    @classmethod
    def size(cls, n: int, m: int) -> int:
        npts, nsc = cls.layout(n, m)
        return npts * POINT_BYTES + nsc * SCALAR_BYTES

    @classmethod
    def from_bytes(cls, data: bytes, n: int, m: int) -> RingSig:
        npts, nsc = cls.layout(n, m)
        if len(data) != cls.size(n, m):
            raise DecodeError(f"signature must be {cls.size(n, m)} bytes, got {len(data)}")
        pts = [Point.decode(data[i * POINT_BYTES:(i + 1) * POINT_BYTES])
               for i in range(npts)]
        off = npts * POINT_BYTES
        scs = [decode_scalar(data[off + i * SCALAR_BYTES:off + (i + 1) * SCALAR_BYTES])
               for i in range(nsc)]
        levels = tuple(tuple(pts[2 + 4 * j:6 + 4 * j]) for j in range(m))
        base = 2 + 4 * m
        blinders = tuple(tuple(pts[base + 3 * k:base + 3 * k + 3]) for k in range(m))
        f = tuple(tuple(scs[j * (n - 1):(j + 1) * (n - 1)]) for j in range(m))
        return cls(pts[0], pts[1], levels, blinders, f, scs[-2], scs[-1])


@dataclass(frozen=True)
class OpenProof:
    """Opened key plus a Chaum-Pedersen proof that ``c2 - pk = osk*c1``."""

    claimed_pk: Point
    challenge: int
    response: int

    def to_bytes(self) -> bytes:
        return self.claimed_pk.encode() + encode_scalar(self.challenge) + encode_scalar(self.response)

    @classmethod
    def from_bytes(cls, data: bytes) -> OpenProof:
        if len(data) != 96:
            raise DecodeError(f"open proof must be 96 bytes, got {len(data)}")
        return cls(Point.decode(data[:32]), decode_scalar(data[32:64]),
                   decode_scalar(data[64:]))


# -- one-out-of-many proof -----------------------------------------------------

def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        for j, v in enumerate(b):
            out[i + j] = (out[i + j] + u * v) % L
    return out


def _index_polys(n: int, m: int, delta: list[list[int]], a: list[list[int]]) -> list[list[int]]:
    """Coefficients of p_i(x) = prod_j (delta[j][i_j]*x + a[j][i_j]) for every slot i."""
    polys = []
    for i in range(n**m):
        poly = [1]
        for j, d in enumerate(digits(i, n, m)):
            poly = _poly_mul(poly, [a[j][d], delta[j][d]])
        polys.append(poly)
    return polys


def _weighted_ring_sum(slots: Sequence[Point], weights: Sequence[int]) -> Point:
    # Padding repeats keys, so merge weights per distinct key first.
    merged: dict[Point, int] = {}
    for p, w in zip(slots, weights):
        merged[p] = (merged.get(p, 0) + w) % L
    acc = Point.identity()
    for p, w in merged.items():
        acc = acc + p * w
    return acc


def _context(pp: PublicParams, opk: Point, message: bytes, ring: Ring) -> bytes:
    return pp.digest() + opk.encode() + ring.ring_id + hashlib.sha256(message).digest()


def _challenge(context: bytes, c1: Point, c2: Point, levels, blinders) -> int:
    parts = [context, c1.encode(), c2.encode()]
    for lev in levels:
        parts.extend(p.encode() for p in lev)
    for gk in blinders:
        parts.extend(p.encode() for p in gk)
    return hash_to_scalar(SIGN_TAG, b"".join(parts))


def _batch_challenge(x: int, f: Sequence[Sequence[int]]) -> int:
    data = encode_scalar(x) + b"".join(encode_scalar(v) for row in f for v in row)
    return hash_to_scalar(BATCH_TAG, data)


def ooom_prove(pp: PublicParams, slots: Sequence[Point], opk: Point, c1: Point,
               c2: Point, index: int, sk: int, r: int, context: bytes,
               rng: Random | None = None) -> RingSig:
    """Prove slot ``index`` of ``(slots[i], c1, c2 - slots[i])`` is ``(sk*h, r*g, r*opk)``."""
    n, m, N = pp.n, pp.m, pp.N
    if len(slots) != N:
        raise UsageError(f"expected {N} slots, got {len(slots)}")
    key = pp.commit_key()
    ell = digits(index, n, m)

    delta = [[int(i == d) for i in range(n)] for d in ell]
    a = []
    for _ in range(m):
        row = [random_scalar(rng) for _ in range(n - 1)]
        a.append([(-sum(row)) % L] + row)
    rand = [[random_scalar(rng) for _ in range(4)] for _ in range(m)]  # rA, rB, rC, rD
    levels = []
    for j in range(m):
        rA, rB, rC, rD = rand[j]
        levels.append((
            vector_commit(key, a[j], rA),
            vector_commit(key, delta[j], rB),
            vector_commit(key, [a[j][i] * (1 - 2 * delta[j][i]) for i in range(n)], rC),
            vector_commit(key, [-a[j][i] * a[j][i] for i in range(n)], rD),
        ))

    polys = _index_polys(n, m, delta, a)
    sigma = [random_scalar(rng) for _ in range(m)]
    rho = [random_scalar(rng) for _ in range(m)]
    blinders = []
    for k in range(m):
        pk_k = _weighted_ring_sum(slots, [p[k] for p in polys])
        # sum_i p_{i,k} = 0 for k < m, so the c1 and c2 parts of the slot sum vanish.
        blinders.append((pk_k + pp.h * sigma[k], pp.g * rho[k], opk * rho[k] - pk_k))

    x = _challenge(context, c1, c2, levels, blinders)
    f = tuple(tuple((delta[j][i] * x + a[j][i]) % L for i in range(1, n)) for j in range(m))
    y = _batch_challenge(x, f)

    xm = pow(x, m, L)
    z_sk = (sk * xm - sum(sigma[k] * pow(x, k, L) for k in range(m))) % L
    z_r = (r * xm - sum(rho[k] * pow(x, k, L) for k in range(m))) % L
    z_h = z_sk
    for j in range(m):
        rA, rB, rC, rD = rand[j]
        z_h += pow(y, 2 * j + 1, L) * (rB * x + rA) + pow(y, 2 * j + 2, L) * (rC * x + rD)
    return RingSig(c1, c2, tuple(levels), tuple(blinders), f, z_h % L, z_r)


def ooom_verify(pp: PublicParams, slots: Sequence[Point], opk: Point, sig: RingSig,
                context: bytes) -> bool:
    n, m, N = pp.n, pp.m, pp.N
    if len(slots) != N or len(sig.levels) != m or len(sig.blinders) != m:
        return False
    if any(len(row) != n - 1 for row in sig.f):
        return False
    x = _challenge(context, sig.c1, sig.c2, sig.levels, sig.blinders)
    y = _batch_challenge(x, sig.f)
    f = [[(x - sum(row)) % L, *row] for row in sig.f]

    weights = []
    for i in range(N):
        w = 1
        for j, d in enumerate(digits(i, n, m)):
            w = w * f[j][d] % L
        weights.append(w)
    ring_part = _weighted_ring_sum(slots, weights)
    xpow = [pow(x, k, L) for k in range(m + 1)]

    # Folded check on base h: slot component plus both bit relations per digit.
    lhs = ring_part
    for k, (ga, _, _) in enumerate(sig.blinders):
        lhs = lhs - ga * xpow[k]
    base_exps = [0] * n
    for j, (A, B, C, D) in enumerate(sig.levels):
        ya, yc = pow(y, 2 * j + 1, L), pow(y, 2 * j + 2, L)
        lhs = lhs + B * (ya * x % L) + A * ya + C * (yc * x % L) + D * yc
        for i in range(n):
            base_exps[i] += ya * f[j][i] + yc * f[j][i] * (x - f[j][i])
    rhs = pp.h * sig.z_h
    for base, e in zip(pp.bases, base_exps):
        rhs = rhs + base * e
    if lhs != rhs:
        return False

    # Randomness of the ciphertext, checked against g and against opk.
    lhs_g = sig.c1 * xpow[m]
    lhs_o = sig.c2 * xpow[m] - ring_part
    for k, (_, gb, gc) in enumerate(sig.blinders):
        lhs_g = lhs_g - gb * xpow[k]
        lhs_o = lhs_o - gc * xpow[k]
    return lhs_g == pp.g * sig.z_r and lhs_o == opk * sig.z_r


# -- the scheme ----------------------------------------------------------------

def sign(pp: PublicParams, opk: Point, message: bytes, ring: Ring, sk: int,
         rng: Random | None = None) -> RingSig:
    pk = pp.h * sk
    slots = ring.padded(pp.N)
    if pk not in ring:
        raise UsageError("signer's public key is not in the ring")
    index = slots.index(pk)
    r = random_scalar(rng)
    c1 = base_mul(r)
    c2 = opk * r + pk
    return ooom_prove(pp, slots, opk, c1, c2, index, sk, r,
                      _context(pp, opk, message, ring), rng)


def verify(pp: PublicParams, opk: Point, message: bytes, ring: Ring,
           sig: RingSig | bytes) -> bool:
    try:
        if isinstance(sig, (bytes, bytearray)):
            sig = RingSig.from_bytes(bytes(sig), pp.n, pp.m)
        slots = ring.padded(pp.N)
    except (DecodeError, UsageError):
        return False
    return ooom_verify(pp, slots, opk, sig, _context(pp, opk, message, ring))


def _open_challenge(pp, opk, message, ring, sig: RingSig, pk, t1, t2) -> int:
    data = (_context(pp, opk, message, ring) + sig.to_bytes() + pk.encode()
            + t1.encode() + t2.encode())
    return hash_to_scalar(OPEN_TAG, data)


def open(pp: PublicParams, message: bytes, ring: Ring, sig: RingSig | bytes, osk: int,
         rng: Random | None = None) -> tuple[Point, OpenProof] | None:
    """Decrypt the signer's key; ``None`` when this auditor cannot open ``sig``."""
    opk = pp.g * osk
    if isinstance(sig, (bytes, bytearray)):
        try:
            sig = RingSig.from_bytes(bytes(sig), pp.n, pp.m)
        except DecodeError:
            return None
    if not verify(pp, opk, message, ring, sig):
        return None
    pk = sig.c2 - sig.c1 * osk
    if pk not in ring:
        return None
    k = random_scalar(rng)
    t1, t2 = pp.g * k, sig.c1 * k
    e = _open_challenge(pp, opk, message, ring, sig, pk, t1, t2)
    return pk, OpenProof(pk, e, (k + e * osk) % L)


def judge(pp: PublicParams, opk: Point, message: bytes, ring: Ring,
          sig: RingSig | bytes, pk: Point, proof: OpenProof) -> bool:
    if isinstance(sig, (bytes, bytearray)):
        try:
            sig = RingSig.from_bytes(bytes(sig), pp.n, pp.m)
        except DecodeError:
            return False
    if pk != proof.claimed_pk or pk not in ring:
        return False
    if not verify(pp, opk, message, ring, sig):
        return False
    t1 = pp.g * proof.response - opk * proof.challenge
    t2 = sig.c1 * proof.response - (sig.c2 - pk) * proof.challenge
    return _open_challenge(pp, opk, message, ring, sig, pk, t1, t2) == proof.challenge
