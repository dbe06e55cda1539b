"""Long/short-term temporal prediction: multi-scale pyramids, spatial gates,
convex fusion, predictor synthesis, and the soft mask for conditional
residual coding.

Everything here reads only decoder-available data (warped references and the
decoded flow), so both codec sides compute bit-identical gates, predictors
and masks.  Gates and masks are stored in 1/256 fixed point so the fusion
arithmetic is exact integer work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .flow import QPEL, FlowField
from .frameio import Frame, frame_from_stack

#: Fixed-point one for gates and masks (1/256 units).
GATE_ONE = 256

PYRAMID_SCALES = (1, 2, 4)


@dataclass(frozen=True)
class FusionParams:
    """Constants of the gating and masking proxies (one config block)."""

    gate_tau: float = 8.0       # sample units; decay of agreement -> gate
    gate_window: int = 5        # square window of the local difference mean
    gate_floor: float = 0.05    # minimum long-term weight
    mask_beta: float = 0.5      # divergence sensitivity of the soft mask
    mask_floor: float = 0.25    # minimum predictor weight


DEFAULT_FUSION = FusionParams()


@dataclass(frozen=True, eq=False)
class Pyramid:
    """Three (3, H/i, W/i) int32 rasters at scales 1, 2, 4."""

    levels: tuple

    def __post_init__(self):
        if len(self.levels) != 3:
            raise DimensionMismatch("pyramid needs exactly 3 levels")
        h, w = self.levels[0].shape[1:]
        for lv, scale in zip(self.levels, PYRAMID_SCALES):
            if lv.shape != (3, h // scale, w // scale):
                raise DimensionMismatch("pyramid level has wrong shape")


@dataclass(frozen=True, eq=False)
class GateField:
    """Per-scale long-term reliability weights in [0, GATE_ONE]."""

    levels: tuple

    def __post_init__(self):
        for lv in self.levels:
            if lv.min() < 0 or lv.max() > GATE_ONE:
                raise ValueError("gate values must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class SoftMask:
    """Per-pixel predictor weights in [0, GATE_ONE], shared across channels."""

    m: np.ndarray

    def __post_init__(self):
        if self.m.min() < 0 or self.m.max() > GATE_ONE:
            raise ValueError("mask values must lie in [0, 1]")


def _pool2(a: np.ndarray) -> np.ndarray:
    c, h, w = a.shape
    s = a.astype(np.int64).reshape(c, h // 2, 2, w // 2, 2).sum(axis=(2, 4))
    return ((s + 2) >> 2).astype(np.int32)


def build_pyramid(source) -> Pyramid:
    """Full/half/quarter resolution rasters by repeated 2x2 mean pooling
    (round-half-up).  Accepts a Frame or a (3, H, W) integer stack."""
    stack = source.stack() if isinstance(source, Frame) else np.asarray(source, np.int32)
    h, w = stack.shape[1:]
    if h % 4 or w % 4:
        raise DimensionMismatch("pyramid needs dimensions divisible by 4")
    half = _pool2(stack)
    quarter = _pool2(half)
    return Pyramid((stack.astype(np.int32), half, quarter))


def _box_mean(a: np.ndarray, window: int) -> np.ndarray:
    """Windowed mean with edge replication, via an integral image."""
    r = window // 2
    pad = np.pad(a, r, mode="edge").astype(np.float64)
    ii = np.zeros((pad.shape[0] + 1, pad.shape[1] + 1))
    ii[1:, 1:] = pad.cumsum(0).cumsum(1)
    h, w = a.shape
    s = ii[window:window + h, window:window + w] - ii[:h, window:window + w] \
        - ii[window:window + h, :w] + ii[:h, :w]
    return s / (window * window)


def predict_gates(warped_key: Pyramid, warped_pre: Pyramid,
                  params: FusionParams = DEFAULT_FUSION) -> GateField:
    """Agreement-driven reliability gates.

    At each scale the windowed mean absolute difference d between the two
    warped references drives ``gate = 1 - (1 - floor) * (1 - exp(-d/tau))``:
    perfect agreement trusts the long-term reference fully (gate == 1);
    strong disagreement (dis-occlusion, failed long-range motion) falls to
    the floor, handing the region to the short-term reference.
    """
    levels = []
    for k, p in zip(warped_key.levels, warped_pre.levels):
        if k.shape != p.shape:
            raise DimensionMismatch("pyramids disagree in shape")
        d = _box_mean(np.abs(k.astype(np.int64) - p.astype(np.int64)).mean(axis=0), params.gate_window)
        gate = 1.0 - (1.0 - params.gate_floor) * (1.0 - np.exp(-d / params.gate_tau))
        g = np.floor(gate * GATE_ONE + 0.5).astype(np.int32)
        levels.append(np.clip(g, 0, GATE_ONE))
    return GateField(tuple(levels))


def fuse(f_key: Pyramid, f_pre: Pyramid, gates: GateField) -> Pyramid:
    """Elementwise convex combination per scale:
    ``gate * key + (1 - gate) * pre`` in exact fixed point."""
    out = []
    for k, p, g in zip(f_key.levels, f_pre.levels, gates.levels):
        if k.shape != p.shape or g.shape != k.shape[1:]:
            raise DimensionMismatch("fusion operand shapes differ")
        if g.min() < 0 or g.max() > GATE_ONE:
            raise ValueError("gate values must lie in [0, 1]")
        g64 = g.astype(np.int64)[None, :, :]
        mixed = (g64 * k.astype(np.int64) + (GATE_ONE - g64) * p.astype(np.int64) + GATE_ONE // 2) >> 8
        out.append(mixed.astype(np.int32))
    return Pyramid(tuple(out))


def smooth_gate(gates: GateField) -> np.ndarray:
    """Cross-scale gate consistency: the full-resolution gate averaged with
    the nearest-neighbor upsampled half- and quarter-scale gates."""
    g1 = gates.levels[0].astype(np.int64)
    g2 = np.repeat(np.repeat(gates.levels[1], 2, 0), 2, 1).astype(np.int64)
    g4 = np.repeat(np.repeat(gates.levels[2], 4, 0), 4, 1).astype(np.int64)
    return ((g1 + g2 + g4 + 1) // 3).astype(np.int32)


def synthesize_predictor(warped_key: Pyramid, warped_pre: Pyramid, gates: GateField) -> Frame:
    """Temporal predictor: scale-1 fusion under the cross-scale smoothed gate,
    clamped to the sample range."""
    g = smooth_gate(gates)
    k = warped_key.levels[0].astype(np.int64)
    p = warped_pre.levels[0].astype(np.int64)
    if k.shape != p.shape or g.shape != k.shape[1:]:
        raise DimensionMismatch("predictor operand shapes differ")
    g64 = g.astype(np.int64)[None, :, :]
    mixed = (g64 * k + (GATE_ONE - g64) * p + GATE_ONE // 2) >> 8
    return frame_from_stack(mixed)


def predict_mask(x_c: Frame, flow: FlowField, params: FusionParams = DEFAULT_FUSION) -> SoftMask:
    """Soft mask from local flow divergence.

    Smooth motion keeps the mask at 1 (pure residual coding against the full
    predictor); strong flow discontinuities pull it toward the floor.  ``x_c``
    enters the signature for parity with the decoder-side inputs; the proxy
    formula depends on the flow alone.
    """
    if (x_c.height, x_c.width) != (flow.height, flow.width):
        raise DimensionMismatch("predictor and flow sizes differ")
    u = flow.u.astype(np.float64) / QPEL
    v = flow.v.astype(np.float64) / QPEL
    du_dx = np.gradient(u, axis=1)
    dv_dy = np.gradient(v, axis=0)
    div = np.abs(du_dx + dv_dy)
    m = np.clip(1.0 - params.mask_beta * div, params.mask_floor, 1.0)
    mq = np.clip(np.floor(m * GATE_ONE + 0.5).astype(np.int32), 0, GATE_ONE)
    return SoftMask(mq)


def gate_to_gray(level: np.ndarray) -> np.ndarray:
    """Map a [0, GATE_ONE] map to a uint8 grayscale raster for debug dumps."""
    return np.clip((level.astype(np.int64) * 255 + GATE_ONE // 2) >> 8, 0, 255).astype(np.uint8)


def dump_gray_png(level: np.ndarray, path) -> None:
    from PIL import Image

    Image.fromarray(gate_to_gray(level), mode="L").save(path)
