"""Deterministic classical coding backends: intra, masked conditional residual,
and quarter-pel motion-vector coding, all over the shared range coder.

Transforms run in 32-bit-style fixed point (13-bit basis, int64 accumulators,
round-half-up shifts), so encoder-local and standalone-decoder
reconstructions are bit-identical on every platform.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import BitstreamExhausted, CodecError, DimensionMismatch
from .flow import FlowField
from .frameio import Frame, frame_from_stack
from .rangecoder import (
    PROB_INIT,
    RangeDecoder,
    RangeEncoder,
    new_models,
    rc_dec_bit,
    rc_dec_bypass,
    rc_enc_bit,
    rc_enc_bypass,
    rc_enc_flush,
)

BLOCK = 8
MOTION_BLOCK = 16

_DCT_BITS = 13
_DCT_SCALE = 1 << _DCT_BITS
_COEFF_BITS = 2 * _DCT_BITS  # forward output scale


class QualityLevel(enum.Enum):
    """Frame quality tags; each maps to a quantization-step multiplier."""

    INTRA = "intra"
    PSTAR = "pstar"
    Q1 = "q1"
    Q2 = "q2"
    Q3 = "q3"


#: Step multipliers: smaller multiplier => finer quantization => better quality.
#: Ordering Q3 < Q2 < Q1 makes higher quality levels decode better, with the
#: post-intra PSTAR frames finest of all.
QUALITY_STEP_MULT = {
    QualityLevel.INTRA: 0.9,
    QualityLevel.PSTAR: 0.65,
    QualityLevel.Q3: 0.8,
    QualityLevel.Q2: 1.0,
    QualityLevel.Q1: 1.25,
}

LAMBDA_MIN = 228.0
LAMBDA_MAX = 1626.0

#: The four operating points.  Base steps were calibrated once on a synthetic
#: textured clip so that lambda*MSE and frame bits have comparable magnitude;
#: they are committed constants, never refit at runtime.
LAMBDA_POINTS = (228, 512, 1024, 1626)
BASE_STEP_BY_LAMBDA = {228: 24.0, 512: 15.0, 1024: 10.0, 1626: 7.0}


@dataclass(frozen=True)
class RatePoint:
    """Lagrange multiplier plus the base quantization step it operates at."""

    lam: float
    base_step: float

    def __post_init__(self):
        if not (LAMBDA_MIN <= self.lam <= LAMBDA_MAX):
            raise ValueError(f"lambda {self.lam} outside [{LAMBDA_MIN}, {LAMBDA_MAX}]")
        if self.base_step <= 0:
            raise ValueError("base step must be positive")

    def step(self, quality: QualityLevel) -> float:
        return self.base_step * QUALITY_STEP_MULT[quality]

    def denom(self, quality: QualityLevel) -> int:
        return max(1, round(self.step(quality) * (1 << _COEFF_BITS)))


def rate_point(lam: int) -> RatePoint:
    if lam not in BASE_STEP_BY_LAMBDA:
        raise ValueError(f"unknown rate point {lam}; pick one of {LAMBDA_POINTS}")
    return RatePoint(float(lam), BASE_STEP_BY_LAMBDA[lam])


def rate_index(lam: int) -> int:
    return LAMBDA_POINTS.index(lam)


def _dct_matrix() -> np.ndarray:
    t = np.empty((BLOCK, BLOCK))
    for i in range(BLOCK):
        c = math.sqrt(1.0 / BLOCK) if i == 0 else math.sqrt(2.0 / BLOCK)
        for j in range(BLOCK):
            t[i, j] = c * math.cos((2 * j + 1) * i * math.pi / (2 * BLOCK))
    return np.round(t * _DCT_SCALE).astype(np.int64)


_T = _dct_matrix()
_TT = np.ascontiguousarray(_T.T)


def _zigzag_order() -> np.ndarray:
    order = []
    for s in range(2 * BLOCK - 1):
        ys = range(min(s, BLOCK - 1), -1, -1) if s % 2 == 0 else range(max(0, s - BLOCK + 1), min(s, BLOCK - 1) + 1)
        for y in ys:
            x = s - y
            if 0 <= x < BLOCK:
                order.append(y * BLOCK + x)
    return np.array(order, np.int64)


ZIGZAG = _zigzag_order()

# Significance contexts are banded by zigzag position.
_SIG_BAND = np.zeros(64, np.int64)
for _pos in range(64):
    if _pos == 0:
        _SIG_BAND[_pos] = 0
    elif _pos <= 2:
        _SIG_BAND[_pos] = 1
    elif _pos <= 5:
        _SIG_BAND[_pos] = 2
    elif _pos <= 9:
        _SIG_BAND[_pos] = 3
    elif _pos <= 20:
        _SIG_BAND[_pos] = 4
    else:
        _SIG_BAND[_pos] = 5

# Model bank layout for coefficient payloads.
_M_BLOCKNZ = 0          # +channel (3)
_M_SIG = 3              # +band (6)
_M_PREFIX = 9           # +bit index, capped (12)
_M_MORE = 21
_N_COEFF_MODELS = 22

_EG_PREFIX_CAP = 11
_EG_MAX_PREFIX = 40


def _round_shift(v: np.ndarray, bits: int) -> np.ndarray:
    return (v + (1 << (bits - 1))) >> bits


def _blocks_from_plane(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return (
        plane.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(-1, BLOCK, BLOCK)
    )


def _plane_from_blocks(blocks: np.ndarray, h: int, w: int) -> np.ndarray:
    return (
        blocks.reshape(h // BLOCK, w // BLOCK, BLOCK, BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(h, w)
    )


def forward_transform(blocks: np.ndarray) -> np.ndarray:
    """Batched 8x8 fixed-point DCT; output carries a 2^26 scale factor."""
    return _T @ blocks.astype(np.int64) @ _TT


def inverse_transform(coeffs: np.ndarray) -> np.ndarray:
    # Scale bookkeeping: coeffs carry 2^26; each basis multiply adds 2^13.
    s1 = _round_shift(_TT @ coeffs.astype(np.int64), _DCT_BITS)
    return _round_shift(s1 @ _T, _COEFF_BITS + _DCT_BITS)


def quantize(coeffs: np.ndarray, denom: int) -> np.ndarray:
    mag = (np.abs(coeffs) + denom // 2) // denom
    return (np.sign(coeffs) * mag).astype(np.int64)


def dequantize(levels: np.ndarray, denom: int) -> np.ndarray:
    return levels.astype(np.int64) * denom


def _encode_eg0(enc: RangeEncoder, models, base: int, value: int) -> None:
    n = value + 1
    q = n.bit_length() - 1
    for i in range(q):
        enc.encode_bit(models, base + min(i, _EG_PREFIX_CAP), 1)
    enc.encode_bit(models, base + min(q, _EG_PREFIX_CAP), 0)
    for i in range(q - 1, -1, -1):
        enc.encode_bypass((n >> i) & 1)


def _encode_levels(enc: RangeEncoder, models, zz_levels: np.ndarray, channel_of: np.ndarray) -> None:
    """Entropy-code zigzagged levels, one row per 8x8 block."""
    nonzero_rows = np.any(zz_levels != 0, axis=1)
    for b in range(zz_levels.shape[0]):
        ch = int(channel_of[b])
        if not nonzero_rows[b]:
            enc.encode_bit(models, _M_BLOCKNZ + ch, 0)
            continue
        enc.encode_bit(models, _M_BLOCKNZ + ch, 1)
        row = zz_levels[b]
        nz_positions = np.flatnonzero(row)
        last = int(nz_positions[-1])
        for pos in range(last + 1):
            lev = int(row[pos])
            if lev == 0:
                enc.encode_bit(models, _M_SIG + int(_SIG_BAND[pos]), 0)
                continue
            enc.encode_bit(models, _M_SIG + int(_SIG_BAND[pos]), 1)
            _encode_eg0(enc, models, _M_PREFIX, abs(lev) - 1)
            enc.encode_bypass(1 if lev < 0 else 0)
            if pos < 63:
                enc.encode_bit(models, _M_MORE, 1 if pos < last else 0)


def _decode_levels(dec: RangeDecoder, models, n_blocks: int, channel_of: np.ndarray) -> np.ndarray:
    out = np.zeros((n_blocks, 64), np.int64)
    for b in range(n_blocks):
        ch = int(channel_of[b])
        if not dec.decode_bit(models, _M_BLOCKNZ + ch):
            continue
        row = out[b]
        for pos in range(64):
            if not dec.decode_bit(models, _M_SIG + int(_SIG_BAND[pos])):
                continue
            q = 0
            while dec.decode_bit(models, _M_PREFIX + min(q, _EG_PREFIX_CAP)):
                q += 1
                if q > _EG_MAX_PREFIX:
                    raise CodecError("corrupt exp-Golomb prefix")
            n = 1 << q
            for i in range(q - 1, -1, -1):
                n |= dec.decode_bypass() << i
            mag = n  # = (|level|-1) + 1
            sign = dec.decode_bypass()
            row[pos] = -mag if sign else mag
            if pos < 63 and not dec.decode_bit(models, _M_MORE):
                break
    return out


@njit(cache=True)
def _kernel_encode_levels(zz, channel_of, out):  # pragma: no cover - jitted
    """Jitted twin of :func:`_encode_levels` (same payload, byte for byte)."""
    models = np.full(_N_COEFF_MODELS, PROB_INIT, np.int64)
    low = 0
    rng = 0xFFFFFFFF
    pos = 0
    for b in range(zz.shape[0]):
        ch = channel_of[b]
        row = zz[b]
        last = -1
        for p in range(63, -1, -1):
            if row[p] != 0:
                last = p
                break
        if last < 0:
            low, rng, pos = rc_enc_bit(low, rng, pos, out, models, _M_BLOCKNZ + ch, 0)
            continue
        low, rng, pos = rc_enc_bit(low, rng, pos, out, models, _M_BLOCKNZ + ch, 1)
        for p in range(last + 1):
            lev = row[p]
            if lev == 0:
                low, rng, pos = rc_enc_bit(low, rng, pos, out, models, _M_SIG + _SIG_BAND[p], 0)
                continue
            low, rng, pos = rc_enc_bit(low, rng, pos, out, models, _M_SIG + _SIG_BAND[p], 1)
            mag = lev if lev > 0 else -lev
            n = mag  # = (|level|-1) + 1
            q = 0
            while (n >> (q + 1)) != 0:
                q += 1
            for i in range(q):
                cap = i if i < _EG_PREFIX_CAP else _EG_PREFIX_CAP
                low, rng, pos = rc_enc_bit(low, rng, pos, out, models, _M_PREFIX + cap, 1)
            capq = q if q < _EG_PREFIX_CAP else _EG_PREFIX_CAP
            low, rng, pos = rc_enc_bit(low, rng, pos, out, models, _M_PREFIX + capq, 0)
            for i in range(q - 1, -1, -1):
                low, rng, pos = rc_enc_bypass(low, rng, pos, out, (n >> i) & 1)
            low, rng, pos = rc_enc_bypass(low, rng, pos, out, 1 if lev < 0 else 0)
            if p < 63:
                low, rng, pos = rc_enc_bit(low, rng, pos, out, models, _M_MORE, 1 if p < last else 0)
    pos = rc_enc_flush(low, pos, out)
    return pos


@njit(cache=True)
def _kernel_decode_levels(data, n_real, n_blocks, channel_of, zz):  # pragma: no cover - jitted
    """Jitted twin of :func:`_decode_levels`; returns (bytes consumed, error)."""
    models = np.full(_N_COEFF_MODELS, PROB_INIT, np.int64)
    low = 0
    rng = 0xFFFFFFFF
    code = 0
    pos = 0
    err = 0
    for _ in range(4):
        byte = data[pos] if pos < data.shape[0] else 0
        code = (code << 8) | byte
        pos += 1
    for b in range(n_blocks):
        ch = channel_of[b]
        low, rng, code, pos, bit = rc_dec_bit(low, rng, code, pos, data, models, _M_BLOCKNZ + ch)
        if not bit:
            continue
        for p in range(64):
            low, rng, code, pos, sig = rc_dec_bit(low, rng, code, pos, data, models, _M_SIG + _SIG_BAND[p])
            if not sig:
                continue
            q = 0
            while True:
                cap = q if q < _EG_PREFIX_CAP else _EG_PREFIX_CAP
                low, rng, code, pos, bit = rc_dec_bit(low, rng, code, pos, data, models, _M_PREFIX + cap)
                if not bit:
                    break
                q += 1
                if q > _EG_MAX_PREFIX:
                    return pos, 1
            n = 1 << q
            for i in range(q - 1, -1, -1):
                low, rng, code, pos, bit = rc_dec_bypass(low, rng, code, pos, data)
                n |= bit << i
            low, rng, code, pos, sign = rc_dec_bypass(low, rng, code, pos, data)
            zz[b, p] = -n if sign else n
            if p < 63:
                low, rng, code, pos, bit = rc_dec_bit(low, rng, code, pos, data, models, _M_MORE)
                if not bit:
                    break
    if pos > n_real:
        err = 1
    return pos, err


def _code_stack(stack: np.ndarray, denom: int) -> tuple[bytes, np.ndarray]:
    """Transform-code a signed (3, H, W) stack; returns payload and the
    dequantized reconstruction (also (3, H, W) int64, unclamped)."""
    _, h, w = stack.shape
    if h % BLOCK or w % BLOCK:
        raise DimensionMismatch(f"dimensions must be divisible by {BLOCK}")
    all_blocks = []
    channel_of = []
    for c in range(3):
        blocks = _blocks_from_plane(stack[c])
        all_blocks.append(blocks)
        channel_of.append(np.full(blocks.shape[0], c, np.int64))
    blocks = np.concatenate(all_blocks)
    channel_of = np.concatenate(channel_of)
    coeffs = forward_transform(blocks)
    levels = quantize(coeffs, denom)
    zz = np.ascontiguousarray(levels.reshape(-1, 64)[:, ZIGZAG])

    payload = encode_levels_payload(zz, channel_of)

    rec_blocks = inverse_transform(dequantize(levels, denom))
    per = rec_blocks.shape[0] // 3
    rec = np.stack([_plane_from_blocks(rec_blocks[c * per:(c + 1) * per], h, w) for c in range(3)])
    return payload, rec


def encode_levels_payload(zz: np.ndarray, channel_of: np.ndarray) -> bytes:
    """Entropy-code zigzagged level rows into a self-contained payload."""
    qmax = int(np.abs(zz).max()).bit_length() if zz.size else 1
    per_coeff_bits = 8 * (qmax + 2) + qmax + 24
    buf = np.empty(zz.shape[0] * (64 * per_coeff_bits // 8 + 8) + 64, np.uint8)
    n = _kernel_encode_levels(zz, channel_of, buf)
    return buf[:n].tobytes()


def decode_levels_payload(data: bytes, n_blocks: int, channel_of: np.ndarray) -> np.ndarray:
    arr = np.frombuffer(data, np.uint8)
    zz = np.zeros((n_blocks, 64), np.int64)
    pos, err = _kernel_decode_levels(arr, len(data), n_blocks, channel_of, zz)
    if err:
        raise CodecError("corrupt coefficient payload")
    if pos > len(data):
        raise BitstreamExhausted("coefficient payload shorter than its content")
    return zz


def _decode_stack(data: bytes, h: int, w: int, denom: int) -> np.ndarray:
    per = (h // BLOCK) * (w // BLOCK)
    channel_of = np.repeat(np.arange(3, dtype=np.int64), per)
    zz = decode_levels_payload(data, 3 * per, channel_of)
    levels = np.zeros_like(zz)
    levels[:, ZIGZAG] = zz
    rec_blocks = inverse_transform(dequantize(levels.reshape(-1, BLOCK, BLOCK), denom))
    return np.stack([_plane_from_blocks(rec_blocks[c * per:(c + 1) * per], h, w) for c in range(3)])


def encode_intra(frame: Frame, rate: RatePoint) -> tuple[bytes, Frame]:
    """8x8 DCT intra coder.  Decoding the payload reproduces the returned
    reconstruction bit-exactly."""
    denom = rate.denom(QualityLevel.INTRA)
    stack = frame.stack() - 128
    payload, rec = _code_stack(stack, denom)
    return payload, frame_from_stack(rec + 128, frame.colorspace)


def decode_intra(data: bytes, width: int, height: int, rate: RatePoint) -> Frame:
    denom = rate.denom(QualityLevel.INTRA)
    rec = _decode_stack(data, height, width, denom)
    return frame_from_stack(rec + 128)


def masked_predictor(x_c: Frame, mask) -> np.ndarray:
    """Soft-mask-weighted predictor m*x_c, fixed point round-half-up."""
    m = mask.m.astype(np.int64)
    return ((m[None, :, :] * x_c.stack().astype(np.int64) + 128) >> 8).astype(np.int32)


def encode_inter(x_t: Frame, x_c: Frame, mask, quality: QualityLevel, rate: RatePoint) -> tuple[bytes, Frame]:
    """Masked conditional residual coder: codes ``x_t - m*x_c`` at the quality
    level's step and reconstructs ``clamp(residual + m*x_c)``."""
    if (x_t.height, x_t.width) != (x_c.height, x_c.width) or mask.m.shape != (x_t.height, x_t.width):
        raise DimensionMismatch("frame/predictor/mask sizes differ")
    denom = rate.denom(quality)
    mx = masked_predictor(x_c, mask)
    residual = x_t.stack() - mx
    payload, rec = _code_stack(residual, denom)
    return payload, frame_from_stack(rec + mx, x_t.colorspace)


def decode_inter(data: bytes, x_c: Frame, mask, quality: QualityLevel, rate: RatePoint) -> Frame:
    denom = rate.denom(quality)
    mx = masked_predictor(x_c, mask)
    rec = _decode_stack(data, x_c.height, x_c.width, denom)
    return frame_from_stack(rec + mx)


# ---------------------------------------------------------------------------
# Motion-vector coding

_M_MV_PREFIX_U = 0   # 10 models
_M_MV_PREFIX_V = 10  # 10 models
_N_MV_MODELS = 20
_MV_PREFIX_CAP = 9


def _zigzag_signed(v: int) -> int:
    return 2 * v if v >= 0 else -2 * v - 1


def _unzigzag_signed(z: int) -> int:
    return z // 2 if z % 2 == 0 else -(z + 1) // 2


def _mv_grid(flow: FlowField) -> tuple[np.ndarray, np.ndarray]:
    """One vector per 16x16 block, sampled at the block's top-left corner."""
    u = flow.u[::MOTION_BLOCK, ::MOTION_BLOCK]
    v = flow.v[::MOTION_BLOCK, ::MOTION_BLOCK]
    return u.copy(), v.copy()


def _median_pred(cands: list[int]) -> int:
    cands = sorted(cands)
    n = len(cands)
    if n == 3:
        return cands[1]
    if n == 2:
        return (cands[0] + cands[1] + 1) // 2
    return cands[0]


def _predict_vector(dec_u, dec_v, by, bx, nby, nbx, prev_u, prev_v):
    cu, cv = [], []
    if bx > 0:
        cu.append(int(dec_u[by, bx - 1]))
        cv.append(int(dec_v[by, bx - 1]))
    if by > 0:
        cu.append(int(dec_u[by - 1, bx]))
        cv.append(int(dec_v[by - 1, bx]))
        if bx + 1 < nbx:
            cu.append(int(dec_u[by - 1, bx + 1]))
            cv.append(int(dec_v[by - 1, bx + 1]))
    if cu:
        return _median_pred(cu), _median_pred(cv)
    if prev_u is not None:
        return int(prev_u[by, bx]), int(prev_v[by, bx])
    return 0, 0


def _dense_from_grid(gu: np.ndarray, gv: np.ndarray, h: int, w: int) -> FlowField:
    u = np.repeat(np.repeat(gu, MOTION_BLOCK, axis=0), MOTION_BLOCK, axis=1)[:h, :w]
    v = np.repeat(np.repeat(gv, MOTION_BLOCK, axis=0), MOTION_BLOCK, axis=1)[:h, :w]
    return FlowField(np.ascontiguousarray(u.astype(np.int32)), np.ascontiguousarray(v.astype(np.int32)))


def _encode_one_flow(enc, models, flow: FlowField, prev: FlowField | None) -> FlowField:
    gu, gv = _mv_grid(flow)
    nby, nbx = gu.shape
    prev_u = prev_v = None
    if prev is not None:
        prev_u, prev_v = _mv_grid(prev)
    dec_u = np.zeros_like(gu)
    dec_v = np.zeros_like(gv)
    for by in range(nby):
        for bx in range(nbx):
            pu, pv = _predict_vector(dec_u, dec_v, by, bx, nby, nbx, prev_u, prev_v)
            du = int(gu[by, bx]) - pu
            dv = int(gv[by, bx]) - pv
            _encode_eg0_mv(enc, models, _M_MV_PREFIX_U, _zigzag_signed(du))
            _encode_eg0_mv(enc, models, _M_MV_PREFIX_V, _zigzag_signed(dv))
            dec_u[by, bx] = pu + du
            dec_v[by, bx] = pv + dv
    return _dense_from_grid(dec_u, dec_v, flow.height, flow.width)


def _encode_eg0_mv(enc, models, base, value):
    n = value + 1
    q = n.bit_length() - 1
    for i in range(q):
        enc.encode_bit(models, base + min(i, _MV_PREFIX_CAP), 1)
    enc.encode_bit(models, base + min(q, _MV_PREFIX_CAP), 0)
    for i in range(q - 1, -1, -1):
        enc.encode_bypass((n >> i) & 1)


def _decode_eg0_mv(dec, models, base):
    q = 0
    while dec.decode_bit(models, base + min(q, _MV_PREFIX_CAP)):
        q += 1
        if q > _EG_MAX_PREFIX:
            raise CodecError("corrupt motion prefix")
    n = 1 << q
    for i in range(q - 1, -1, -1):
        n |= dec.decode_bypass() << i
    return n - 1


def _decode_one_flow(dec, models, h: int, w: int, prev: FlowField | None) -> FlowField:
    nby = (h + MOTION_BLOCK - 1) // MOTION_BLOCK
    nbx = (w + MOTION_BLOCK - 1) // MOTION_BLOCK
    prev_u = prev_v = None
    if prev is not None:
        prev_u, prev_v = _mv_grid(prev)
    dec_u = np.zeros((nby, nbx), np.int32)
    dec_v = np.zeros((nby, nbx), np.int32)
    for by in range(nby):
        for bx in range(nbx):
            pu, pv = _predict_vector(dec_u, dec_v, by, bx, nby, nbx, prev_u, prev_v)
            du = _unzigzag_signed(_decode_eg0_mv(dec, models, _M_MV_PREFIX_U))
            dv = _unzigzag_signed(_decode_eg0_mv(dec, models, _M_MV_PREFIX_V))
            dec_u[by, bx] = pu + du
            dec_v[by, bx] = pv + dv
    return _dense_from_grid(dec_u, dec_v, h, w)


def encode_motion_session(flows: list[FlowField], aux: FlowField | None) -> tuple[bytes, list[FlowField]]:
    """Code one or more flow fields into a single payload.

    Flow i is predicted blockwise (median of left/top/top-right decoded
    neighbors, falling back to the collocated vector of the previous flow in
    the chain: ``aux`` for the first flow, the previously decoded flow in
    this session after that, then zero).  Decoding is bit-exact.
    """
    enc = RangeEncoder()
    models = new_models(_N_MV_MODELS)
    decoded = []
    prev = aux
    for f in flows:
        d = _encode_one_flow(enc, models, f, prev)
        decoded.append(d)
        prev = d
    return enc.finish(), decoded


def decode_motion_session(data: bytes, count: int, width: int, height: int,
                          aux: FlowField | None) -> list[FlowField]:
    dec = RangeDecoder(data)
    models = new_models(_N_MV_MODELS)
    out = []
    prev = aux
    for _ in range(count):
        d = _decode_one_flow(dec, models, height, width, prev)
        out.append(d)
        prev = d
    return out


def encode_motion(flow: FlowField, prev_decoded_flow: FlowField | None,
                  rate: RatePoint | None = None) -> tuple[bytes, FlowField]:
    """Single-flow wrapper around :func:`encode_motion_session`.

    ``rate`` is accepted for interface uniformity with the other coders but
    unused: vectors are coded losslessly at quarter-pel precision.
    """
    payload, decoded = encode_motion_session([flow], prev_decoded_flow)
    return payload, decoded[0]


def decode_motion(data: bytes, width: int, height: int,
                  prev_decoded_flow: FlowField | None,
                  rate: RatePoint | None = None) -> FlowField:
    return decode_motion_session(data, 1, width, height, prev_decoded_flow)[0]
