"""Deterministic synthetic clips for tests, experiments, and the trace CLI.

Textures are sums of seeded 2-D sinusoids evaluated analytically on a shifted
coordinate grid, so clips with global sub-pixel motion are exact and
repeatable across runs.
"""

from __future__ import annotations

import numpy as np

from .frameio import RGB444, YUV420, Frame


def _texture(xs: np.ndarray, ys: np.ndarray, rng: np.random.Generator,
             waves: int = 6, amplitude: float = 38.0) -> np.ndarray:
    out = np.full(xs.shape, 128.0)
    for _ in range(waves):
        fx = rng.uniform(0.02, 0.25)
        fy = rng.uniform(0.02, 0.25)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        amp = rng.uniform(0.4, 1.0) * amplitude
        out += amp * np.sin(2.0 * np.pi * (fx * xs + fy * ys) + phase)
    return out


def moving_texture_clip(width: int, height: int, frames: int,
                        dx: float = 1.0, dy: float = 0.0,
                        seed: int = 7) -> list[Frame]:
    """RGB clip of a textured pattern under constant global motion.

    Frame t equals frame t-1 shifted by (dx, dy) pixels; the true backward
    flow of every frame is the constant (-dx, -dy).
    """
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    clip = []
    for t in range(frames):
        planes = []
        for c in range(3):
            rng_c = np.random.default_rng(seed * 1000 + c)
            vals = _texture(xs - t * dx, ys - t * dy, rng_c)
            planes.append(np.clip(np.round(vals), 0, 255).astype(np.uint8))
        clip.append(Frame(tuple(planes), RGB444))
    return clip


def noise_block_clip(width: int, height: int, frames: int, seed: int = 11,
                     smooth: int = 8) -> list[Frame]:
    """Blockwise-smooth random frames (no temporal coherence) for randomized
    selection and round-trip tests."""
    rng = np.random.default_rng(seed)
    clip = []
    for _ in range(frames):
        planes = []
        for _c in range(3):
            coarse = rng.integers(0, 256, size=(height // smooth, width // smooth))
            plane = np.repeat(np.repeat(coarse, smooth, 0), smooth, 1).astype(np.uint8)
            planes.append(plane)
        clip.append(Frame(tuple(planes), RGB444))
    return clip


def mixed_shift_clip(width: int, height: int, frames: int, seed: int = 99,
                     sigma: float = 9.0, noise_rows: int | None = None) -> list[Frame]:
    """Two stacked textured regions, each under constant global shift.

    The upper band is a static noise field panning at (1.0, 0.25) px/frame
    (detail that decays under repeated sub-pixel interpolation); the lower
    band is a busy wave texture panning at (1.0, 0.5).  Useful for studying
    temporal quality behavior of different reference structures at
    comparable bitrates.
    """
    rng = np.random.default_rng(seed)
    noise_h = noise_rows if noise_rows is not None else (height * 3) // 4
    wave_h = height - noise_h
    big = rng.normal(0, sigma, (3, noise_h + 256, width + 256))
    waves = [(rng.uniform(0.05, 0.25), rng.uniform(0.05, 0.25),
              rng.uniform(0.0, 2.0 * np.pi), rng.uniform(15, 38)) for _ in range(8)]
    ys, xs = np.mgrid[0:wave_h, 0:width].astype(np.float64)
    out = []
    for t in range(frames):
        ox, oy = 64 + t * 1.0, 64 + t * 0.25
        x0, y0 = int(np.floor(ox)), int(np.floor(oy))
        fx, fy = ox - x0, oy - y0
        sl = big[:, y0:y0 + noise_h + 1, x0:x0 + width + 1]
        top = ((1 - fx) * (1 - fy) * sl[:, :noise_h, :width]
               + fx * (1 - fy) * sl[:, :noise_h, 1:width + 1]
               + (1 - fx) * fy * sl[:, 1:noise_h + 1, :width]
               + fx * fy * sl[:, 1:noise_h + 1, 1:width + 1]) + 128
        planes = []
        for c in range(3):
            bot = np.full((wave_h, width), 128.0)
            for fxw, fyw, ph, amp in waves:
                bot += amp * np.sin(2 * np.pi * (fxw * (xs - t * 1.0) + fyw * (ys - t * 0.5)) + ph + 2 * c)
            planes.append(np.clip(np.round(np.vstack([top[c], bot])), 0, 255).astype(np.uint8))
        out.append(Frame(tuple(planes), RGB444))
    return out


def moving_texture_yuv_clip(width: int, height: int, frames: int,
                            dx: float = 1.0, dy: float = 0.0,
                            seed: int = 7) -> list[Frame]:
    """YUV420 variant: textured luma under global motion, smooth chroma."""
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    cys, cxs = np.mgrid[0:height // 2, 0:width // 2].astype(np.float64)
    clip = []
    for t in range(frames):
        rng_y = np.random.default_rng(seed * 1000)
        rng_u = np.random.default_rng(seed * 1000 + 1)
        rng_v = np.random.default_rng(seed * 1000 + 2)
        y = np.clip(np.round(16 + (219 / 255) * _texture(xs - t * dx, ys - t * dy, rng_y)), 16, 235)
        u = np.clip(np.round(128 + 0.15 * (_texture(cxs - t * dx / 2, cys - t * dy / 2, rng_u) - 128)), 16, 240)
        v = np.clip(np.round(128 + 0.15 * (_texture(cxs - t * dx / 2, cys - t * dy / 2, rng_v) - 128)), 16, 240)
        clip.append(Frame((y.astype(np.uint8), u.astype(np.uint8), v.astype(np.uint8)), YUV420))
    return clip
