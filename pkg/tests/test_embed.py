from decimal import Decimal
from random import Random

import pytest
from hypothesis import given, settings, strategies as st

from trustmark import embed
from trustmark.embed import (
    FLAG_INLINE, FeeConfig, Mode, RefKind, StorageRef, estimate_fee, plan_case1, plan_case2,
)
from trustmark.errors import DecodeError, IntegrityError, LedgerRejected, MissingError, UsageError
from trustmark.harness import SimLedger, SimStorage
from trustmark.tokens import Chain

URL = StorageRef.parse(b"https://drive.google.com/file/d/" + b"a" * 34)
IPFS = StorageRef.parse(b"/ipfs/" + b"Q" * 42)


def _payload(n, seed=0):
    return Random(seed).randbytes(n)


def test_storage_ref_lengths():
    assert len(URL) == 66 and URL.kind is RefKind.URL
    assert len(IPFS) == 48 and IPFS.kind is RefKind.IPFS_PATH
    with pytest.raises(DecodeError):
        StorageRef.parse(b"ftp://x")


@pytest.mark.parametrize("chain,size,count", [
    (Chain.BTC, 1612, 21), (Chain.ETH, 1619, 1), (Chain.NEM, 1616, 2)])
def test_case1_counts(chain, size, count):
    assert len(plan_case1(_payload(size), chain)) == count


@pytest.mark.parametrize("chain,ref,count", [
    (Chain.BTC, URL, 2), (Chain.BTC, IPFS, 2), (Chain.NEM, IPFS, 1), (Chain.NEM, URL, 1),
    (Chain.ETH, URL, 1), (Chain.ETH, IPFS, 1)])
def test_case2_counts(chain, ref, count):
    assert len(plan_case2(_payload(1612), ref, chain)) == count


def test_chunks_fit_profile():
    for chain in Chain:
        limit = embed.profile(chain).max_chunk
        for plan in (plan_case1(_payload(5000), chain), plan_case2(_payload(10), URL, chain)):
            assert limit is None or max(plan.chunk_sizes()) <= limit


def test_single_chunk_head_has_no_link():
    led = SimLedger(Chain.ETH)
    plan = plan_case1(_payload(100), Chain.ETH)
    head = embed.link_and_submit(plan, led)
    assert plan.txids == [head]
    assert led.get_tx(head).prev is None
    assert led.get_tx(head).data[0] == embed.MAGIC


def test_case2_inline_txid_offset():
    led = SimLedger(Chain.BTC)
    plan = plan_case2(_payload(1612), URL, Chain.BTC)
    head = embed.link_and_submit(plan, led)
    first, second = plan.txids
    assert head == second
    data = led.get_tx(head).data
    assert data[0] & FLAG_INLINE and data[1:33] == first


def test_case1_walk_21():
    led = SimLedger(Chain.BTC)
    payload = _payload(1612)
    plan = plan_case1(payload, Chain.BTC)
    head = embed.link_and_submit(plan, led)
    txids, bodies, _ = embed.walk(head, led)
    assert txids == plan.txids and len(set(txids)) == 21
    assert b"".join(bodies) == payload
    assert embed.extract_payload(head, led) == (Mode.CASE1, payload)


def test_walk_detects_cycle():
    class Loop:
        def get_tx(self, txid):
            from trustmark.harness import SimTx
            return SimTx(txid, 0, bytes([embed.MAGIC | FLAG_INLINE]) + txid + b"x")
    with pytest.raises(IntegrityError):
        embed.walk(bytes(32), Loop())


def test_walk_rejects_foreign_data():
    led = SimLedger(Chain.BTC)
    txid = led.submit_tx(b"hello")
    with pytest.raises(DecodeError):
        embed.walk(txid, led)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=4096), st.sampled_from(list(Chain)))
def test_roundtrip_all_lengths(length, chain):
    payload = _payload(length, length)
    led, store = SimLedger(chain), SimStorage()
    head = embed.link_and_submit(plan_case1(payload, chain), led)
    assert embed.extract_payload(head, led) == (Mode.CASE1, payload)
    ref = store.put(payload, RefKind.IPFS_PATH)
    head = embed.link_and_submit(plan_case2(payload, ref, chain), led)
    assert embed.extract_payload(head, led, store) == (Mode.CASE2, payload)


def test_roundtrip_boundaries():
    for chain in Chain:
        cap = embed.profile(chain).max_chunk
        lengths = [1, 2, 4096] + ([cap - 2, cap - 1, cap, 2 * (cap - 1), 2 * cap - 1] if cap else [])
        for n in lengths:
            led = SimLedger(chain)
            payload = _payload(n, n)
            head = embed.link_and_submit(plan_case1(payload, chain), led)
            assert embed.extract_payload(head, led)[1] == payload


def test_case2_detects_every_bit_flip():
    payload = _payload(300)
    led, store = SimLedger(Chain.NEM), SimStorage()
    ref = store.put(payload, RefKind.URL)
    head = embed.link_and_submit(plan_case2(payload, ref, Chain.NEM), led)
    for bit in range(len(payload) * 8):
        bad = bytearray(payload)
        bad[bit // 8] ^= 1 << (bit % 8)
        store.objects[ref.ref] = bytes(bad)
        with pytest.raises(IntegrityError):
            embed.extract_payload(head, led, store)
    store.objects[ref.ref] = payload
    assert embed.extract_payload(head, led, store)[1] == payload


def test_case2_storage_unavailable():
    payload = _payload(50)
    led, store = SimLedger(Chain.BTC), SimStorage()
    ref = store.put(payload)
    head = embed.link_and_submit(plan_case2(payload, ref, Chain.BTC), led)
    with pytest.raises(MissingError):
        embed.extract_payload(head, led, SimStorage())
    with pytest.raises(UsageError):
        embed.extract_payload(head, led, None)


def test_oversized_chunk_rejected_by_ledger():
    plan = plan_case1(_payload(200), Chain.ETH)
    with pytest.raises(LedgerRejected) as err:
        embed.link_and_submit(plan, SimLedger(Chain.BTC))
    assert err.value.index == 0


# -- fees ----------------------------------------------------------------------

def test_nem_fees_published_points():
    assert estimate_fee(Chain.NEM, [98]).amount == Decimal("0.25")
    assert estimate_fee(Chain.NEM, [80]).amount == Decimal("0.20")


def test_nem_fee_monotone_steps():
    prev = estimate_fee(Chain.NEM, [0]).amount
    for n in range(1, 1025):
        fee = estimate_fee(Chain.NEM, [n]).amount
        assert fee >= prev
        # piecewise constant: only steps right after a multiple of 32
        assert (fee != prev) == (n % 32 == 1)
        prev = fee


def test_btc_fee():
    assert estimate_fee(Chain.BTC, [80] * 21).amount == Decimal("0.042")
    cfg = FeeConfig(btc_per_tx=Decimal("0.001"))
    assert estimate_fee(Chain.BTC, [80] * 21, cfg).amount == Decimal("0.021")


def test_eth_gas():
    assert estimate_fee(Chain.ETH, [bytes(10)]).amount == 21000 + 40
    assert estimate_fee(Chain.ETH, [b"\x01" * 10]).amount == 21000 + 160
    assert estimate_fee(Chain.ETH, [1619]).amount == 21000 + 16 * 1619
    q = estimate_fee("eth", [_payload(1619)])
    assert abs(q.amount - 46888) / Decimal(46888) < Decimal("0.01")
    assert q.unit == "gas" and q.tx_count == 1
