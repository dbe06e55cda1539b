"""Raw video ingestion, BT.601 color conversion, PNG sequence I/O, and PSNR."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DimensionMismatch, TruncatedFile, WrongColorspace

RGB444 = "rgb444"
YUV444 = "yuv444"
YUV420 = "yuv420"

#: PSNR reported for bit-identical frames instead of infinity.
PSNR_CAP_DB = 100.0

# Limited-range BT.601 (YCbCr -> RGB), 8-bit fractional fixed point.
# R = (298*(Y-16) + 409*(V-128) + 128) >> 8, etc.  Round-half-up via the
# +128 bias; all intermediates fit 32-bit.
_BT601_Y = 298
_BT601_RV = 409
_BT601_GU = 100
_BT601_GV = 208
_BT601_BU = 516

#: Filename pattern used by the PNG sequence reader/writer.
PNG_PATTERN = "frame_{:05d}.png"
_PNG_RE = re.compile(r"frame_(\d+)\.png$")


@dataclass(frozen=True, eq=False)
class Frame:
    """One planar image raster; the unit of coding and reference.

    ``planes`` holds three 2-D uint8 arrays.  Under YUV420 the two chroma
    planes are half-size in both dimensions; otherwise all planes are
    full-size.  Arrays are marked read-only so decoded frames can be shared
    as immutable snapshots.
    """

    planes: tuple
    colorspace: str

    def __post_init__(self):
        if len(self.planes) != 3:
            raise DimensionMismatch("frame needs exactly 3 planes")
        frozen = []
        for p in self.planes:
            if p.dtype != np.uint8 or p.ndim != 2:
                raise DimensionMismatch("planes must be 2-D uint8 rasters")
            p = p.copy() if p.flags.writeable else p
            p.setflags(write=False)
            frozen.append(p)
        object.__setattr__(self, "planes", tuple(frozen))
        h, w = self.planes[0].shape
        if w <= 0 or h <= 0:
            raise DimensionMismatch("frame dimensions must be positive")
        if self.colorspace == YUV420:
            if w % 2 or h % 2:
                raise DimensionMismatch("YUV420 needs even dimensions")
            want = (h // 2, w // 2)
            if self.planes[1].shape != want or self.planes[2].shape != want:
                raise DimensionMismatch("YUV420 chroma planes must be half-size")
        elif self.colorspace in (RGB444, YUV444):
            for p in self.planes[1:]:
                if p.shape != (h, w):
                    raise DimensionMismatch("full-resolution planes must match luma size")
        else:
            raise WrongColorspace(f"unknown colorspace {self.colorspace!r}")

    @property
    def width(self) -> int:
        return self.planes[0].shape[1]

    @property
    def height(self) -> int:
        return self.planes[0].shape[0]

    def stack(self) -> np.ndarray:
        """Planes as one (3, H, W) int32 array (full-resolution colorspaces only)."""
        if self.colorspace == YUV420:
            raise WrongColorspace("cannot stack subsampled planes")
        return np.stack([p.astype(np.int32) for p in self.planes])

    def tobytes(self) -> bytes:
        return b"".join(p.tobytes() for p in self.planes)


def frame_from_stack(stack: np.ndarray, colorspace: str = RGB444) -> Frame:
    """Build a frame from a (3, H, W) integer array, clamping to [0, 255]."""
    arr = np.clip(stack, 0, 255).astype(np.uint8)
    return Frame((arr[0], arr[1], arr[2]), colorspace)


def frames_equal(a: Frame, b: Frame) -> bool:
    return (
        a.colorspace == b.colorspace
        and all(x.shape == y.shape and np.array_equal(x, y) for x, y in zip(a.planes, b.planes))
    )


def read_yuv420(path, width: int, height: int, max_frames: int | None = None) -> list[Frame]:
    """Read planar I420 8-bit frames in display order.

    Returns ``min(max_frames, frames-in-file)`` frames.  A file smaller than
    one frame raises :class:`TruncatedFile`; a size that is not a whole
    number of frames (and smaller than ``max_frames`` of them) raises
    :class:`DimensionMismatch`.
    """
    if width <= 0 or height <= 0 or width % 2 or height % 2:
        raise DimensionMismatch("YUV420 needs positive even frame dimensions")
    frame_size = width * height * 3 // 2
    data = Path(path).read_bytes()
    if len(data) < frame_size:
        raise TruncatedFile(
            f"{path}: {len(data)} bytes is less than one {width}x{height} frame ({frame_size} bytes)"
        )
    available = len(data) // frame_size
    if max_frames is None or available < max_frames:
        if len(data) % frame_size:
            raise DimensionMismatch(
                f"{path}: size {len(data)} is not a multiple of the {frame_size}-byte frame size"
            )
        count = available
    else:
        count = max_frames
    ysize = width * height
    csize = ysize // 4
    frames = []
    for i in range(count):
        base = i * frame_size
        y = np.frombuffer(data, np.uint8, ysize, base).reshape(height, width)
        u = np.frombuffer(data, np.uint8, csize, base + ysize).reshape(height // 2, width // 2)
        v = np.frombuffer(data, np.uint8, csize, base + ysize + csize).reshape(height // 2, width // 2)
        frames.append(Frame((y, u, v), YUV420))
    return frames


def write_yuv420(path, frames) -> None:
    """Write frames (YUV420) as a raw planar I420 file."""
    with open(path, "wb") as fh:
        for f in frames:
            if f.colorspace != YUV420:
                raise WrongColorspace("write_yuv420 expects YUV420 frames")
            fh.write(f.tobytes())


def yuv420_to_rgb(frame: Frame) -> Frame:
    """Limited-range BT.601 conversion with nearest-neighbor chroma upsampling.

    Pure integer arithmetic (round-half-up), so outputs are identical across
    platforms and runs.
    """
    if frame.colorspace != YUV420:
        raise WrongColorspace(f"expected YUV420, got {frame.colorspace}")
    y = frame.planes[0].astype(np.int32)
    # Nearest-neighbor replication of the half-size chroma planes.
    u = np.repeat(np.repeat(frame.planes[1].astype(np.int32), 2, axis=0), 2, axis=1)
    v = np.repeat(np.repeat(frame.planes[2].astype(np.int32), 2, axis=0), 2, axis=1)
    c = y - 16
    d = u - 128
    e = v - 128
    r = (_BT601_Y * c + _BT601_RV * e + 128) >> 8
    g = (_BT601_Y * c - _BT601_GU * d - _BT601_GV * e + 128) >> 8
    b = (_BT601_Y * c + _BT601_BU * d + 128) >> 8
    return frame_from_stack(np.stack([r, g, b]), RGB444)


def psnr_rgb(a: Frame, b: Frame) -> float:
    """PSNR in dB with MSE averaged over all three channels.

    Identical frames return :data:`PSNR_CAP_DB` instead of infinity.
    """
    if a.colorspace == YUV420 or b.colorspace == YUV420:
        raise WrongColorspace("psnr_rgb needs full-resolution frames")
    if a.colorspace != b.colorspace or a.planes[0].shape != b.planes[0].shape:
        raise DimensionMismatch("psnr_rgb operands must match in size and colorspace")
    diff = a.stack().astype(np.float64) - b.stack().astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return 10.0 * math.log10(255.0 * 255.0 / mse)


def mse_rgb(a: Frame, b: Frame) -> float:
    """Mean squared error over all three channels (the distortion used in RD costs)."""
    if a.planes[0].shape != b.planes[0].shape:
        raise DimensionMismatch("mse_rgb operands must match in size")
    diff = a.stack().astype(np.float64) - b.stack().astype(np.float64)
    return float(np.mean(diff * diff))


def write_png(frame: Frame, path) -> None:
    if frame.colorspace != RGB444:
        raise WrongColorspace("PNG writer expects RGB444 frames")
    arr = np.stack(frame.planes, axis=-1)
    Image.fromarray(arr, mode="RGB").save(path)


def read_png(path) -> Frame:
    arr = np.asarray(Image.open(path).convert("RGB"))
    return Frame((arr[..., 0].copy(), arr[..., 1].copy(), arr[..., 2].copy()), RGB444)


def write_png_sequence(frames, directory) -> list[Path]:
    """Write frames as ``frame_00000.png``, ``frame_00001.png``, ... under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, f in enumerate(frames):
        p = directory / PNG_PATTERN.format(i)
        write_png(f, p)
        paths.append(p)
    return paths


def read_png_sequence(directory) -> list[Frame]:
    """Read a ``frame_<index>.png`` sequence sorted by the zero-padded index."""
    directory = Path(directory)
    indexed = []
    for p in directory.iterdir():
        m = _PNG_RE.search(p.name)
        if m:
            indexed.append((int(m.group(1)), p))
    if not indexed:
        raise TruncatedFile(f"no frame_*.png files under {directory}")
    return [read_png(p) for _, p in sorted(indexed)]
