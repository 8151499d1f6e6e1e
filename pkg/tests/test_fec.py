import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from pajscc.errors import CorruptIndex, InvalidSpec
from pajscc.fec import DecodeFailure, FecBlockSpec, decode, encode
from pajscc import gf256


def payloads(k, size, seed=0):
    rnd = random.Random(seed)
    return [bytes(rnd.randrange(256) for _ in range(size)) for _ in range(k)]


def test_gf_tables():
    for a in range(1, 256):
        assert gf256.mul(a, gf256.inv(a)) == 1
    # cross-check the table against carry-less multiplication mod 0x11d
    def slow(a, b):
        r = 0
        while b:
            if b & 1:
                r ^= a
            a <<= 1
            if a & 0x100:
                a ^= 0x11D
            b >>= 1
        return r
    rnd = random.Random(1)
    for _ in range(2000):
        a, b = rnd.randrange(256), rnd.randrange(256)
        assert gf256.mul(a, b) == slow(a, b) == gf256.MUL[a, b]


def test_identity_when_no_parity():
    spec = FecBlockSpec(3, 3, 8)
    src = payloads(3, 8)
    block = encode(src, spec)
    assert [p for _, p in block.packets] == src


def test_repetition_code_k1_n3():
    spec = FecBlockSpec(1, 3, 16)
    src = payloads(1, 16, seed=3)
    block = encode(src, spec)
    for pkt in block.packets:
        assert decode([pkt], spec) == src


def test_k4_n6_every_subset():
    spec = FecBlockSpec(4, 6, 32)
    src = payloads(4, 32, seed=4)
    block = encode(src, spec)
    subsets = list(itertools.combinations(block.packets, 4))
    assert len(subsets) == 15
    for sub in subsets:
        assert decode(list(sub), spec) == src


def test_k4_n6_three_received_fails_with_systematic_credit():
    spec = FecBlockSpec(4, 6, 8)
    block = encode(payloads(4, 8), spec)
    for sub in itertools.combinations(block.packets, 3):
        with pytest.raises(DecodeFailure) as err:
            decode(list(sub), spec)
        idx = {i for i, _ in sub}
        assert err.value.recovered_sources == idx & {0, 1, 2, 3}
        assert all(err.value.recovered[i] == dict(block.packets)[i] for i in err.value.recovered)


def test_parity_only_recovery():
    spec = FecBlockSpec(2, 4, 10)
    src = payloads(2, 10, seed=9)
    block = encode(src, spec)
    assert decode([block.packets[2], block.packets[3]], spec) == src


def test_all_received():
    spec = FecBlockSpec(5, 9, 4)
    src = payloads(5, 4)
    assert decode(encode(src, spec).packets, spec) == src


@pytest.mark.parametrize("n", range(1, 9))
def test_exhaustive_round_trip_small(n):
    for k in range(1, n + 1):
        spec = FecBlockSpec(k, n, 3)
        src = payloads(k, 3, seed=n * 31 + k)
        block = encode(src, spec)
        for sub in itertools.combinations(block.packets, k):
            assert decode(list(sub), spec) == src


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 40), st.randoms(use_true_random=False))
def test_systematic_and_order_insensitive(k, extra, rnd):
    n = min(255, k + extra)
    spec = FecBlockSpec(k, n, 6)
    src = [bytes(rnd.randrange(256) for _ in range(6)) for _ in range(k)]
    block = encode(src, spec)
    assert [p for _, p in block.packets[:k]] == src
    chosen = rnd.sample(block.packets, k)
    assert decode(chosen, spec) == src
    rnd.shuffle(chosen)
    assert decode(chosen, spec) == src


def test_large_block():
    spec = FecBlockSpec(100, 255, 64)
    src = payloads(100, 64, seed=7)
    block = encode(src, spec)
    rnd = random.Random(0)
    assert decode(rnd.sample(block.packets, 100), spec) == src
    assert decode(block.packets[155:], spec) == src


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        FecBlockSpec(4, 256, 10)
    with pytest.raises(InvalidSpec):
        FecBlockSpec(5, 4, 10)
    with pytest.raises(InvalidSpec):
        FecBlockSpec(0, 4, 10)
    with pytest.raises(InvalidSpec):
        encode([b"abc", b"ab"], FecBlockSpec(2, 3, 3))
    with pytest.raises(InvalidSpec):
        encode([b"abc"], FecBlockSpec(2, 3, 3))


def test_corrupt_indices():
    spec = FecBlockSpec(2, 3, 2)
    block = encode([b"ab", b"cd"], spec)
    with pytest.raises(CorruptIndex):
        decode([block.packets[0], block.packets[0]], spec)
    with pytest.raises(CorruptIndex):
        decode([(3, b"xx"), block.packets[0]], spec)
    with pytest.raises(CorruptIndex):
        decode([(-1, b"xx")], spec)


def test_code_rate_properties():
    spec = FecBlockSpec(16, 24, 100)
    assert spec.code_rate == pytest.approx(2 / 3)
    assert spec.expansion == 1.5
