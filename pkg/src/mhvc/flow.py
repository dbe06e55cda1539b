"""Dense backward warping, flow accumulation, block-matching estimation, rescaling.

All flow values are stored in signed quarter-pel fixed point (int32, four
units per pixel).  Every operation here is pure integer arithmetic with
round-half-up rounding, so encoder- and decoder-side results are bit
identical.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit, prange

from .errors import DimensionMismatch, TruncatedFile
from .frameio import Frame, frame_from_stack

#: Quarter-pel denominator: flow value 4 == one pixel of displacement.
QPEL = 4

FLOW_MAGIC = b"QFL1"


@dataclass(frozen=True, eq=False)
class FlowField:
    """Dense per-pixel motion map, quarter-pel fixed point."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for a in (self.u, self.v):
            if a.ndim != 2 or a.dtype != np.int32:
                raise DimensionMismatch("flow components must be 2-D int32")
        if self.u.shape != self.v.shape:
            raise DimensionMismatch("u and v must match in shape")
        for name in ("u", "v"):
            a = getattr(self, name)
            if a.flags.writeable:
                a = a.copy()
                a.setflags(write=False)
                object.__setattr__(self, name, a)

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def height(self) -> int:
        return self.u.shape[0]

    def tobytes(self) -> bytes:
        return self.u.tobytes() + self.v.tobytes()


def zero_flow(width: int, height: int) -> FlowField:
    z = np.zeros((height, width), np.int32)
    return FlowField(z, z.copy())


def constant_flow(width: int, height: int, u_qpel: int, v_qpel: int) -> FlowField:
    return FlowField(
        np.full((height, width), u_qpel, np.int32),
        np.full((height, width), v_qpel, np.int32),
    )


def _warp_plane(plane: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Bilinear backward warp of one integer plane by a quarter-pel flow.

    Sampling coordinates are clamped to the image border; interpolation runs
    in 1/16 weights with round-half-up, exact for zero fractional offsets.
    """
    h, w = plane.shape
    ys, xs = np.mgrid[0:h, 0:w]
    px = np.clip(xs * QPEL + u, 0, (w - 1) * QPEL)
    py = np.clip(ys * QPEL + v, 0, (h - 1) * QPEL)
    x0 = px >> 2
    y0 = py >> 2
    fx = px & 3
    fy = py & 3
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    p = plane.astype(np.int64)
    acc = (
        p[y0, x0] * ((4 - fx) * (4 - fy))
        + p[y0, x1] * (fx * (4 - fy))
        + p[y1, x0] * ((4 - fx) * fy)
        + p[y1, x1] * (fx * fy)
    )
    return ((acc + 8) >> 4).astype(np.int64)


def backward_warp(image, flow: FlowField):
    """Warp a :class:`Frame` or :class:`FlowField` by ``flow`` (backward sampling).

    ``output(p) = bilinear_sample(input, p + flow(p))`` with border clamp.
    Returns the same type as ``image``.
    """
    if isinstance(image, Frame):
        if (image.height, image.width) != (flow.height, flow.width):
            raise DimensionMismatch("frame and flow sizes differ")
        planes = [_warp_plane(p.astype(np.int64), flow.u, flow.v) for p in image.planes]
        return frame_from_stack(np.stack(planes), image.colorspace)
    if isinstance(image, FlowField):
        if image.u.shape != flow.u.shape:
            raise DimensionMismatch("flow field sizes differ")
        wu = _warp_plane(image.u.astype(np.int64), flow.u, flow.v).astype(np.int32)
        wv = _warp_plane(image.v.astype(np.int64), flow.u, flow.v).astype(np.int32)
        return FlowField(wu, wv)
    raise TypeError(f"cannot warp {type(image).__name__}")


def warp_stack(stack: np.ndarray, flow: FlowField) -> np.ndarray:
    """Backward-warp a (C, H, W) integer stack; returns int32 (no clamp to 255)."""
    if stack.shape[1:] != flow.u.shape:
        raise DimensionMismatch("stack and flow sizes differ")
    return np.stack([_warp_plane(c.astype(np.int64), flow.u, flow.v) for c in stack]).astype(np.int32)


def accumulate_flow(f_acc_old: FlowField, f_t: FlowField) -> FlowField:
    """Compose flows across one frame step.

    ``f_acc_old`` maps frame t-1 coordinates to a key frame; ``f_t`` maps
    frame t to t-1.  The result, ``f_t + warp(f_acc_old, f_t)``, maps frame t
    coordinates to the key frame, re-quantized to quarter-pel by the warp.
    """
    if f_acc_old.u.shape != f_t.u.shape:
        raise DimensionMismatch("flow field sizes differ")
    warped = backward_warp(f_acc_old, f_t)
    return FlowField((f_t.u + warped.u).astype(np.int32), (f_t.v + warped.v).astype(np.int32))


@dataclass(frozen=True)
class MotionSearchParams:
    """Exhaustive integer search followed by quarter-pel refinement."""

    block_size: int = 16
    search_range: int = 24

    def __post_init__(self):
        if self.block_size < 1 or self.search_range < 0:
            raise ValueError("invalid motion search parameters")


@njit(cache=True, parallel=True)
def _block_search(tgt, ref, block, srange, out_uv):  # pragma: no cover - jitted
    nch, h, w = tgt.shape
    nbx = (w + block - 1) // block
    nby = (h + block - 1) // block
    for bi in prange(nby * nbx):
        by = bi // nbx
        bx = bi % nbx
        y0 = by * block
        x0 = bx * block
        y1 = min(y0 + block, h)
        x1 = min(x0 + block, w)
        best_sad = np.int64(1) << 60
        best_du = 0
        best_dv = 0
        best_mag = 1 << 30
        for dv in range(-srange, srange + 1):
            for du in range(-srange, srange + 1):
                sad = np.int64(0)
                stop = False
                for y in range(y0, y1):
                    yy = y + dv
                    if yy < 0:
                        yy = 0
                    elif yy >= h:
                        yy = h - 1
                    for x in range(x0, x1):
                        xx = x + du
                        if xx < 0:
                            xx = 0
                        elif xx >= w:
                            xx = w - 1
                        for c in range(nch):
                            d = tgt[c, y, x] - ref[c, yy, xx]
                            sad += d if d >= 0 else -d
                    if sad > best_sad:
                        stop = True
                        break
                if stop:
                    continue
                mag = (du if du >= 0 else -du) + (dv if dv >= 0 else -dv)
                if sad < best_sad or (
                    sad == best_sad
                    and (mag < best_mag or (mag == best_mag and (dv < best_dv or (dv == best_dv and du < best_du))))
                ):
                    best_sad = sad
                    best_du = du
                    best_dv = dv
                    best_mag = mag
        out_uv[by, bx, 0] = best_du
        out_uv[by, bx, 1] = best_dv


@njit(cache=True, parallel=True)
def _qpel_refine(tgt, ref, block, srange, int_uv, out_uv):  # pragma: no cover - jitted
    nch, h, w = tgt.shape
    nbx = (w + block - 1) // block
    nby = (h + block - 1) // block
    lim = srange * QPEL
    for bi in prange(nby * nbx):
        by = bi // nbx
        bx = bi % nbx
        y0 = by * block
        x0 = bx * block
        y1 = min(y0 + block, h)
        x1 = min(x0 + block, w)
        base_u = int_uv[by, bx, 0] * QPEL
        base_v = int_uv[by, bx, 1] * QPEL
        best_sad = np.int64(1) << 60
        best_u = base_u
        best_v = base_v
        best_mag = 1 << 30
        for qv in range(-3, 4):
            cv = base_v + qv
            if cv < -lim or cv > lim:
                continue
            for qu in range(-3, 4):
                cu = base_u + qu
                if cu < -lim or cu > lim:
                    continue
                sad = np.int64(0)
                stop = False
                for y in range(y0, y1):
                    py = y * QPEL + cv
                    if py < 0:
                        py = 0
                    elif py > (h - 1) * QPEL:
                        py = (h - 1) * QPEL
                    iy = py >> 2
                    fy = py & 3
                    y2 = iy + 1 if iy + 1 < h else h - 1
                    for x in range(x0, x1):
                        px = x * QPEL + cu
                        if px < 0:
                            px = 0
                        elif px > (w - 1) * QPEL:
                            px = (w - 1) * QPEL
                        ix = px >> 2
                        fx = px & 3
                        x2 = ix + 1 if ix + 1 < w else w - 1
                        w00 = (4 - fx) * (4 - fy)
                        w01 = fx * (4 - fy)
                        w10 = (4 - fx) * fy
                        w11 = fx * fy
                        for c in range(nch):
                            val = (
                                ref[c, iy, ix] * w00
                                + ref[c, iy, x2] * w01
                                + ref[c, y2, ix] * w10
                                + ref[c, y2, x2] * w11
                                + 8
                            ) >> 4
                            d = tgt[c, y, x] - val
                            sad += d if d >= 0 else -d
                    if sad > best_sad:
                        stop = True
                        break
                if stop:
                    continue
                mag = (cu if cu >= 0 else -cu) + (cv if cv >= 0 else -cv)
                if sad < best_sad or (
                    sad == best_sad
                    and (mag < best_mag or (mag == best_mag and (cv < best_v or (cv == best_v and cu < best_u))))
                ):
                    best_sad = sad
                    best_u = cu
                    best_v = cv
                    best_mag = mag
        out_uv[by, bx, 0] = best_u
        out_uv[by, bx, 1] = best_v


def estimate_flow(target: Frame, reference: Frame, params: MotionSearchParams = MotionSearchParams()) -> FlowField:
    """Blockwise exhaustive SAD search, refined to quarter-pel.

    Each block's vector is the SAD argmin over +-search_range integer
    displacements (summed over all channels, border-clamped sampling), then
    refined over a +-3 quarter-pel window with bilinear interpolation.  Ties
    prefer smaller |u|+|v|, then smaller v, then smaller u, so flat content
    yields the zero vector.  The winning vector is replicated densely over
    its block.
    """
    if (target.height, target.width) != (reference.height, reference.width):
        raise DimensionMismatch("target and reference sizes differ")
    tgt = target.stack()
    ref = reference.stack()
    h, w = target.height, target.width
    block = params.block_size
    nbx = (w + block - 1) // block
    nby = (h + block - 1) // block
    int_uv = np.zeros((nby, nbx, 2), np.int32)
    _block_search(tgt, ref, block, params.search_range, int_uv)
    q_uv = np.zeros((nby, nbx, 2), np.int32)
    _qpel_refine(tgt, ref, block, params.search_range, int_uv, q_uv)
    u = np.repeat(np.repeat(q_uv[:, :, 0], block, axis=0), block, axis=1)[:h, :w]
    v = np.repeat(np.repeat(q_uv[:, :, 1], block, axis=0), block, axis=1)[:h, :w]
    return FlowField(np.ascontiguousarray(u), np.ascontiguousarray(v))


def rescale_flow(flow: FlowField, factor: int) -> FlowField:
    """Average-pool by ``factor`` and shrink displacements by the same factor."""
    if factor not in (2, 4):
        raise ValueError("factor must be 2 or 4")
    h, w = flow.u.shape
    if h % factor or w % factor:
        raise DimensionMismatch(f"dimensions must be divisible by {factor}")
    div = factor * factor * factor
    half = div // 2

    def pool(a):
        s = a.astype(np.int64).reshape(h // factor, factor, w // factor, factor).sum(axis=(1, 3))
        return ((s + half) // div).astype(np.int32)

    return FlowField(pool(flow.u), pool(flow.v))


def write_flow(flow: FlowField, path) -> None:
    """Flat binary dump: magic, u32 width, u32 height, interleaved int32 u,v."""
    with open(path, "wb") as fh:
        fh.write(FLOW_MAGIC)
        fh.write(struct.pack("<II", flow.width, flow.height))
        inter = np.empty((flow.height, flow.width, 2), np.int32)
        inter[:, :, 0] = flow.u
        inter[:, :, 1] = flow.v
        fh.write(inter.tobytes())


def read_flow(path) -> FlowField:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != FLOW_MAGIC:
        raise TruncatedFile("not a flow dump")
    w, h = struct.unpack_from("<II", data, 4)
    need = 12 + w * h * 8
    if len(data) < need:
        raise TruncatedFile("flow dump shorter than header promises")
    inter = np.frombuffer(data, np.int32, w * h * 2, 12).reshape(h, w, 2)
    return FlowField(inter[:, :, 0].copy(), inter[:, :, 1].copy())
