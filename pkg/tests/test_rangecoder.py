import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhvc.errors import BitstreamExhausted
from mhvc.rangecoder import RangeDecoder, RangeEncoder, new_models


def _round_trip(bits, n_models=4, idx_of=lambda i: 0):
    enc = RangeEncoder()
    models = new_models(n_models)
    for i, b in enumerate(bits):
        enc.encode_bit(models, idx_of(i), b)
    payload = enc.finish()
    dec = RangeDecoder(payload)
    models2 = new_models(n_models)
    out = [dec.decode_bit(models2, idx_of(i)) for i in range(len(bits))]
    return payload, out


def test_empty_round_trip():
    payload, out = _round_trip([])
    assert out == []
    assert len(payload) == 4  # flush only


def test_large_random_skewed_round_trip():
    rng = np.random.default_rng(42)
    bits = (rng.random(100_000) < 0.15).astype(int).tolist()
    payload, out = _round_trip(bits, n_models=4, idx_of=lambda i: i % 4)
    assert out == bits


def test_all_zeros_compress_hard():
    enc = RangeEncoder()
    models = new_models(1)
    n = 100_000
    for _ in range(n):
        enc.encode_bit(models, 0, 0)
    payload = enc.finish()
    assert len(payload) * 8 / n < 0.1


def test_bypass_round_trip():
    rng = np.random.default_rng(7)
    bits = (rng.random(5000) < 0.5).astype(int).tolist()
    enc = RangeEncoder()
    for b in bits:
        enc.encode_bypass(b)
    payload = enc.finish()
    dec = RangeDecoder(payload)
    assert [dec.decode_bypass() for _ in bits] == bits


def test_mixed_context_and_bypass():
    rng = np.random.default_rng(3)
    kinds = rng.integers(0, 2, 2000)
    bits = rng.integers(0, 2, 2000)
    enc = RangeEncoder()
    models = new_models(2)
    for k, b in zip(kinds, bits):
        if k:
            enc.encode_bypass(int(b))
        else:
            enc.encode_bit(models, int(b) & 1, int(b))
    payload = enc.finish()
    dec = RangeDecoder(payload)
    models2 = new_models(2)
    for k, b in zip(kinds, bits):
        got = dec.decode_bypass() if k else dec.decode_bit(models2, int(b) & 1)
        assert got == int(b)


def test_truncated_payload_exhausts():
    bits = [1, 0] * 4000
    payload, _ = _round_trip(bits)
    dec = RangeDecoder(payload[: len(payload) // 2])
    models = new_models(4)
    with pytest.raises(BitstreamExhausted):
        for _ in bits:
            dec.decode_bit(models, 0)


def test_too_short_for_init_exhausts():
    with pytest.raises(BitstreamExhausted):
        RangeDecoder(b"\x00\x01")


def test_deterministic_payload():
    bits = [0, 1, 1, 0, 1] * 100
    p1, _ = _round_trip(bits)
    p2, _ = _round_trip(bits)
    assert p1 == p2


@given(bits=st.lists(st.integers(0, 1), max_size=400))
@settings(max_examples=50, deadline=None)
def test_any_stream_round_trips(bits):
    _, out = _round_trip(bits, n_models=2, idx_of=lambda i: i % 2)
    assert out == bits
