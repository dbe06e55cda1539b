"""Carry-less adaptive binary range coder shared by all codec backends.

Subbotin-style 32-bit range coder with byte-wise renormalization.  Symbols
are binary; each is coded against a 12-bit adaptive probability model
(probability of zero, shift-5 adaptation).  Encoding is fully deterministic
and ``decode(encode(s)) == s`` for any symbol stream.
"""

from __future__ import annotations

from numba import njit

from .errors import BitstreamExhausted

_TOP = 1 << 24
_BOT = 1 << 16
_MASK32 = (1 << 32) - 1

_PROB_BITS = 12
_PROB_ONE = 1 << _PROB_BITS
_PROB_INIT = _PROB_ONE // 2
_ADAPT_SHIFT = 5
_PROB_MIN = 31
_PROB_MAX = _PROB_ONE - _PROB_MIN


def new_models(count: int) -> list[int]:
    """Fresh adaptive contexts; each entry is the probability of a zero bit."""
    return [_PROB_INIT] * count


class RangeEncoder:
    """Encodes a binary symbol stream into a self-contained byte payload."""

    def __init__(self):
        self.low = 0
        self.range = _MASK32
        self.out = bytearray()

    def encode_bit(self, models: list[int], idx: int, bit: int) -> None:
        p0 = models[idx]
        split = (self.range >> _PROB_BITS) * p0
        if bit:
            self.low += split
            self.range -= split
            p0 -= p0 >> _ADAPT_SHIFT
            if p0 < _PROB_MIN:
                p0 = _PROB_MIN
        else:
            self.range = split
            p0 += (_PROB_ONE - p0) >> _ADAPT_SHIFT
            if p0 > _PROB_MAX:
                p0 = _PROB_MAX
        models[idx] = p0
        # Renormalize: emit settled top bytes; force the range across a
        # carry boundary when it gets too small (carry-less trick).
        low = self.low
        rng = self.range
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass
            elif rng < _BOT:
                rng = -low & (_BOT - 1)
            else:
                break
            self.out.append((low >> 24) & 0xFF)
            low = (low << 8) & _MASK32
            rng = (rng << 8) & _MASK32
        self.low = low
        self.range = rng

    def encode_bypass(self, bit: int) -> None:
        """Code one bit at fixed probability 1/2 (no adaptation)."""
        split = (self.range >> 1)
        if bit:
            self.low += split
            self.range -= split
        else:
            self.range = split
        low = self.low
        rng = self.range
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass
            elif rng < _BOT:
                rng = -low & (_BOT - 1)
            else:
                break
            self.out.append((low >> 24) & 0xFF)
            low = (low << 8) & _MASK32
            rng = (rng << 8) & _MASK32
        self.low = low
        self.range = rng

    def finish(self) -> bytes:
        low = self.low
        for _ in range(4):
            self.out.append((low >> 24) & 0xFF)
            low = (low << 8) & _MASK32
        return bytes(self.out)


class RangeDecoder:
    """Mirror of :class:`RangeEncoder` over an in-memory payload."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.low = 0
        self.range = _MASK32
        self.code = 0
        for _ in range(4):
            self.code = (self.code << 8) | self._byte()

    def _byte(self) -> int:
        if self.pos >= len(self.data):
            raise BitstreamExhausted("range decoder ran out of payload bytes")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def decode_bit(self, models: list[int], idx: int) -> int:
        p0 = models[idx]
        split = (self.range >> _PROB_BITS) * p0
        if self.code - self.low < split:
            bit = 0
            self.range = split
            p0 += (_PROB_ONE - p0) >> _ADAPT_SHIFT
            if p0 > _PROB_MAX:
                p0 = _PROB_MAX
        else:
            bit = 1
            self.low += split
            self.range -= split
            p0 -= p0 >> _ADAPT_SHIFT
            if p0 < _PROB_MIN:
                p0 = _PROB_MIN
        models[idx] = p0
        low = self.low
        rng = self.range
        code = self.code
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass
            elif rng < _BOT:
                rng = -low & (_BOT - 1)
            else:
                break
            code = ((code << 8) & _MASK32) | self._byte()
            low = (low << 8) & _MASK32
            rng = (rng << 8) & _MASK32
        self.low = low
        self.range = rng
        self.code = code
        return bit

    def decode_bypass(self) -> int:
        split = (self.range >> 1)
        if self.code - self.low < split:
            bit = 0
            self.range = split
        else:
            bit = 1
            self.low += split
            self.range -= split
        low = self.low
        rng = self.range
        code = self.code
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass
            elif rng < _BOT:
                rng = -low & (_BOT - 1)
            else:
                break
            code = ((code << 8) & _MASK32) | self._byte()
            low = (low << 8) & _MASK32
            rng = (rng << 8) & _MASK32
        self.low = low
        self.range = rng
        self.code = code
        return bit


def encode_bits(pairs) -> bytes:
    """Encode (model_index, bit) pairs with a fresh model bank sized on demand."""
    enc = RangeEncoder()
    models = []
    for idx, bit in pairs:
        while idx >= len(models):
            models.append(_PROB_INIT)
        enc.encode_bit(models, idx, bit)
    return enc.finish()


def decode_bits(data: bytes, indices) -> list[int]:
    """Decode one bit per model index in ``indices`` (fresh model bank)."""
    dec = RangeDecoder(data)
    models = []
    out = []
    for idx in indices:
        while idx >= len(models):
            models.append(_PROB_INIT)
        out.append(dec.decode_bit(models, idx))
    return out


# ---------------------------------------------------------------------------
# Jitted primitives for hot syntax loops.  Same algorithm as the classes
# above, restated over scalar state so numba can inline it; a unit test pins
# both implementations to byte-identical output.

PROB_INIT = _PROB_INIT
MODEL_DTYPE_INIT = _PROB_INIT


@njit(cache=True, inline="always")
def rc_enc_bit(low, rng, pos, out, models, idx, bit):  # pragma: no cover - jitted
    p0 = models[idx]
    split = (rng >> _PROB_BITS) * p0
    if bit:
        low += split
        rng -= split
        p0 -= p0 >> _ADAPT_SHIFT
        if p0 < _PROB_MIN:
            p0 = _PROB_MIN
    else:
        rng = split
        p0 += (_PROB_ONE - p0) >> _ADAPT_SHIFT
        if p0 > _PROB_MAX:
            p0 = _PROB_MAX
    models[idx] = p0
    while True:
        if (low ^ (low + rng)) < _TOP:
            pass
        elif rng < _BOT:
            rng = (-low) & (_BOT - 1)
        else:
            break
        out[pos] = (low >> 24) & 0xFF
        pos += 1
        low = (low << 8) & _MASK32
        rng = (rng << 8) & _MASK32
    return low, rng, pos


@njit(cache=True, inline="always")
def rc_enc_bypass(low, rng, pos, out, bit):  # pragma: no cover - jitted
    split = rng >> 1
    if bit:
        low += split
        rng -= split
    else:
        rng = split
    while True:
        if (low ^ (low + rng)) < _TOP:
            pass
        elif rng < _BOT:
            rng = (-low) & (_BOT - 1)
        else:
            break
        out[pos] = (low >> 24) & 0xFF
        pos += 1
        low = (low << 8) & _MASK32
        rng = (rng << 8) & _MASK32
    return low, rng, pos


@njit(cache=True, inline="always")
def rc_enc_flush(low, pos, out):  # pragma: no cover - jitted
    for _ in range(4):
        out[pos] = (low >> 24) & 0xFF
        pos += 1
        low = (low << 8) & _MASK32
    return pos


@njit(cache=True, inline="always")
def rc_dec_bit(low, rng, code, pos, data, models, idx):  # pragma: no cover - jitted
    p0 = models[idx]
    split = (rng >> _PROB_BITS) * p0
    if code - low < split:
        bit = 0
        rng = split
        p0 += (_PROB_ONE - p0) >> _ADAPT_SHIFT
        if p0 > _PROB_MAX:
            p0 = _PROB_MAX
    else:
        bit = 1
        low += split
        rng -= split
        p0 -= p0 >> _ADAPT_SHIFT
        if p0 < _PROB_MIN:
            p0 = _PROB_MIN
    models[idx] = p0
    while True:
        if (low ^ (low + rng)) < _TOP:
            pass
        elif rng < _BOT:
            rng = (-low) & (_BOT - 1)
        else:
            break
        # Reads past the payload clamp to zero; the wrapper turns the
        # resulting position overrun into a decode error.
        byte = data[pos] if pos < data.shape[0] else 0
        code = ((code << 8) & _MASK32) | byte
        pos += 1
        low = (low << 8) & _MASK32
        rng = (rng << 8) & _MASK32
    return low, rng, code, pos, bit


@njit(cache=True, inline="always")
def rc_dec_bypass(low, rng, code, pos, data):  # pragma: no cover - jitted
    split = rng >> 1
    if code - low < split:
        bit = 0
        rng = split
    else:
        bit = 1
        low += split
        rng -= split
    while True:
        if (low ^ (low + rng)) < _TOP:
            pass
        elif rng < _BOT:
            rng = (-low) & (_BOT - 1)
        else:
            break
        byte = data[pos] if pos < data.shape[0] else 0
        code = ((code << 8) & _MASK32) | byte
        pos += 1
        low = (low << 8) & _MASK32
        rng = (rng << 8) & _MASK32
    return low, rng, code, pos, bit
