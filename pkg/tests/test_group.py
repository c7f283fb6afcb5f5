import hashlib
from random import Random

import pytest
from hypothesis import given, settings, strategies as st

import ristretto_oracle as oracle
from trustmark.errors import DecodeError, UsageError
from trustmark.group import (
    L, Point, base_generator, base_mul, decode_scalar, encode_scalar, hash_to_group,
    hash_to_scalar, inverse, multi_mul, random_scalar,
)

scalars = st.integers(min_value=0, max_value=L - 1)


def test_generator_matches_curve25519_base_point():
    # u = 9 -> Edwards y = 4/5, pushed through the RFC encoder.
    assert base_generator().encode() == oracle.encode(oracle.base_point())
    assert base_generator().hex() == (
        "e2f2ae0a6abc4e71a884a961c500515f58e30b6aa582dd8db6a65945e08d2d76")


def test_generator_order_and_group_law():
    g = base_generator()
    assert (g * L).is_identity()
    assert g * 2 == g + g
    assert base_mul(L - 1) == -g


def test_generator_stable_across_calls():
    assert base_generator().encode() == base_generator().encode()


@settings(max_examples=40, deadline=None)
@given(scalars)
def test_scalar_mul_against_oracle(k):
    expect = oracle.encode(oracle.mul(k, oracle.base_point()))
    assert base_mul(k).encode() == expect


@settings(max_examples=30, deadline=None)
@given(scalars)
def test_decode_agrees_with_oracle(k):
    enc = base_mul(k).encode()
    pt = oracle.decode(enc)
    assert pt is not None and oracle.encode(pt) == enc


def test_decode_rejects_what_oracle_rejects():
    rng = Random(3)
    rejected = 0
    for _ in range(300):
        raw = rng.randbytes(32)
        ok = oracle.decode(raw) is not None
        if not ok:
            rejected += 1
            with pytest.raises(DecodeError):
                Point.decode(raw)
        else:
            assert Point.decode(raw).encode() == raw
    assert rejected > 200  # most random strings are not canonical encodings


def test_decode_wrong_length():
    with pytest.raises(DecodeError):
        Point.decode(bytes(31))


def test_homomorphism_many_pairs():
    rng = Random(11)
    g = base_generator()
    for _ in range(1000):
        a, b = random_scalar(rng), random_scalar(rng)
        assert base_mul(a) + base_mul(b) == g * ((a + b) % L)


@settings(max_examples=50, deadline=None)
@given(scalars, scalars)
def test_distributivity(a, b):
    p = base_mul(12345)
    assert p * a + p * b == p * (a + b)
    assert p * a - p * b == p * (a - b)


def test_multi_mul():
    rng = Random(2)
    ks = [random_scalar(rng) for _ in range(5)]
    ps = [base_mul(random_scalar(rng)) for _ in range(5)]
    acc = Point.identity()
    for k, p in zip(ks, ps):
        acc = acc + p * k
    assert multi_mul(ks, ps) == acc


def test_scalar_encoding():
    assert decode_scalar(encode_scalar(L - 1)) == L - 1
    assert encode_scalar(L) == bytes(32)
    with pytest.raises(DecodeError):
        decode_scalar(L.to_bytes(32, "little"))
    with pytest.raises(DecodeError):
        decode_scalar(bytes(31))
    assert inverse(7) * 7 % L == 1
    with pytest.raises(ZeroDivisionError):
        inverse(0)


def test_random_scalar_seeded():
    assert random_scalar(Random(5)) == random_scalar(Random(5))
    assert 0 <= random_scalar() < L


def test_hash_to_scalar():
    s = hash_to_scalar(b"fs/sign", b"m")
    assert 0 <= s < L
    assert s == hash_to_scalar(b"fs/sign", b"m")
    assert s != hash_to_scalar(b"fs/open", b"m")
    # Oracle: length-prefixed tag, SHA-512, little-endian reduction.
    ref = int.from_bytes(hashlib.sha512(b"\x07fs/sign" + b"m").digest(), "little") % L
    assert s == ref


def test_hash_to_group_against_oracle():
    for tag, data in [(b"crs/h", b""), (b"crs/h1", b"x"), (b"crs/h2", b"x")]:
        digest = hashlib.sha512(bytes([len(tag)]) + tag + data).digest()
        assert hash_to_group(tag, data).encode() == oracle.encode(oracle.from_uniform_bytes(digest))
    h1, h2 = hash_to_group(b"crs/h1", b"x"), hash_to_group(b"crs/h2", b"x")
    assert h1 != h2
    assert not h1.is_identity() and not h2.is_identity()
    assert Point.decode(h1.encode()) == h1


def test_hash_tags_validated():
    with pytest.raises(UsageError):
        hash_to_scalar(b"", b"x")
    with pytest.raises(UsageError):
        hash_to_group(b"t" * 256, b"x")
