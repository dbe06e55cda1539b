"""Rate-distortion evaluation: bpp, BD-rate, per-frame PSNR profiles, sweeps."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .blockcodec import rate_point
from .frameio import psnr_rgb
from .scheduler import GopConfig, decode_sequence, encode_sequence


@dataclass(frozen=True)
class RdCurve:
    """One rate-distortion curve: (bpp, psnr) points sorted by increasing bpp."""

    label: str
    points: tuple  # of (bpp, psnr_db)

    def __post_init__(self):
        bpps = [p[0] for p in self.points]
        if any(b <= 0 for b in bpps):
            raise ValueError("bpp values must be strictly positive")
        if any(b2 <= b1 for b1, b2 in zip(bpps, bpps[1:])):
            raise ValueError("points must be sorted by strictly increasing bpp")

    @property
    def bpp(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def psnr(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


def compute_bpp(total_bits: int, width: int, height: int, frames: int) -> float:
    if width <= 0 or height <= 0 or frames <= 0:
        raise ValueError("dimensions and frame count must be positive")
    if total_bits < 0:
        raise ValueError("bit count must be non-negative")
    return total_bits / (width * height * frames)


def _fit_log_rate(curve: RdCurve) -> np.ndarray:
    return np.polyfit(curve.psnr, np.log10(curve.bpp), 3)


def bd_rate(test: RdCurve, anchor: RdCurve) -> float:
    """Average bitrate difference of ``test`` against ``anchor`` in percent.

    Cubic fit of log10(bpp) over PSNR per curve, integrated analytically over
    the common PSNR interval; negative numbers mean the test curve needs less
    rate at equal quality.
    """
    if len(test.points) < 4 or len(anchor.points) < 4:
        raise ValueError("BD-rate needs at least 4 points per curve")
    lo = max(test.psnr.min(), anchor.psnr.min())
    hi = min(test.psnr.max(), anchor.psnr.max())
    if hi <= lo:
        raise ValueError("curves have no overlapping PSNR range")
    p_test = np.polyint(_fit_log_rate(test))
    p_anchor = np.polyint(_fit_log_rate(anchor))
    int_test = np.polyval(p_test, hi) - np.polyval(p_test, lo)
    int_anchor = np.polyval(p_anchor, hi) - np.polyval(p_anchor, lo)
    avg_diff = (int_test - int_anchor) / (hi - lo)
    return float((10.0 ** avg_diff - 1.0) * 100.0)


def psnr_profile(stats) -> tuple[np.ndarray, float]:
    """Per-frame (t, psnr) series plus the least-squares PSNR trend over the
    inter-coded frames (the temporal cascading-error indicator)."""
    series = np.array([(s.index, s.psnr) for s in stats], dtype=np.float64)
    inter = [(s.index, s.psnr) for s in stats if s.frame_type != "I"]
    if len(inter) >= 2:
        xs = np.array([p[0] for p in inter], dtype=np.float64)
        ys = np.array([p[1] for p in inter], dtype=np.float64)
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = 0.0
    return series, slope


@dataclass
class SweepCell:
    label: str
    lam: int
    structure_tag: str
    bpp: float
    psnr: float


@dataclass
class SweepResult:
    cells: list
    curves: dict
    bd_rows: list  # (test_label, anchor_label, bdrate_pct)


def _run_cell(frames, config: GopConfig, lam: int) -> SweepCell:
    cfg = replace(config, rate=rate_point(lam))
    enc = encode_sequence(frames, cfg)
    dec = decode_sequence(enc.stream)
    w, h = frames[0].width, frames[0].height
    bpp = compute_bpp(len(enc.stream) * 8, w, h, len(frames))
    mean_psnr = float(np.mean([psnr_rgb(a, b) for a, b in zip(frames, dec.frames)]))
    tag = cfg.structure.tag
    return SweepCell(f"{tag}", lam, tag, bpp, mean_psnr)


def rd_sweep(frames, config_for, lambdas, structures, anchor: str, jobs: int = 1) -> SweepResult:
    """One full encode+decode per (lambda, structure); emits curves and
    BD-rates against the anchor structure.

    ``config_for(tag)`` must return the :class:`GopConfig` for a structure
    tag (rate is overridden per cell).  Cells are independent; with
    ``jobs > 1`` they run concurrently and results are merged in a fixed
    order, so output is deterministic regardless of the job cap.
    """
    tasks = [(tag, lam) for tag in structures for lam in sorted(lambdas)]

    def run(task):
        tag, lam = task
        return _run_cell(frames, config_for(tag), lam)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(run, tasks))
    else:
        cells = [run(t) for t in tasks]

    curves = {}
    for tag in structures:
        pts = sorted((c.bpp, c.psnr) for c in cells if c.structure_tag == tag)
        curves[tag] = RdCurve(tag, tuple(pts))
    bd_rows = []
    if anchor not in curves:
        raise ValueError(f"anchor structure {anchor!r} not in sweep")
    for tag in structures:
        bd_rows.append((tag, anchor, bd_rate(curves[tag], curves[anchor])))
    return SweepResult(cells, curves, bd_rows)


POINTS_CSV_FIELDS = ("label", "lambda", "bpp", "psnr")
BD_CSV_FIELDS = ("test", "anchor", "bdrate_pct")


def write_sweep_csv(result: SweepResult, points_path, bd_path) -> None:
    with open(points_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(POINTS_CSV_FIELDS)
        for c in result.cells:
            w.writerow([c.label, c.lam, f"{c.bpp:.8f}", f"{c.psnr:.6f}"])
    with open(bd_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BD_CSV_FIELDS)
        for test, anchor, pct in result.bd_rows:
            w.writerow([test, anchor, f"{pct:.4f}"])


def write_sweep_json(result: SweepResult, path) -> None:
    payload = {
        "points": [
            {"label": c.label, "lambda": c.lam, "bpp": c.bpp, "psnr": c.psnr}
            for c in result.cells
        ],
        "bd_rates": [
            {"test": t, "anchor": a, "bdrate_pct": pct} for t, a, pct in result.bd_rows
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
