"""Frame-role assignment, the frame coding loop, online key-frame selection,
and the standalone decoder.

The coding loop per P frame: estimate flow against the newest decoded frame,
code it, enumerate hypothesis pairs from the buffer, fully trial-encode every
pair (motion + gated fusion + masked conditional residual), pick the pair
minimizing ``lambda * MSE + record bits``, and update the buffer with the
winning reconstruction.  The decoder mirrors the buffer rules and the
prediction path exactly, so reconstructions and buffer state are bit-equal
on both sides.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import blockcodec
from .bitstream import FrameRecord, StreamHeader, StreamReader, record_size_bits, write_stream
from .blockcodec import QualityLevel, RatePoint, rate_index
from .errors import DimensionMismatch, KeyIndexOutOfRange, PayloadTruncated
from .flow import FlowField, MotionSearchParams, accumulate_flow, estimate_flow, warp_stack
from .frameio import Frame, mse_rgb, psnr_rgb
from .fusion import DEFAULT_FUSION, FusionParams, build_pyramid, predict_gates, predict_mask, synthesize_predictor
from .refbuffer import DecodedFrameBuffer, HypothesisPair
from .structures import PredictionStructure

_QUALITY_PATTERN_TAIL = QualityLevel.Q3  # mini-GOP-final frames, marked long-term keys


@dataclass(frozen=True)
class GopConfig:
    """Complete encoding configuration for one sequence.

    Fusion and mask constants are deliberately not configurable here: the
    bitstream does not carry them, so both codec sides use the build
    constants in :mod:`mhvc.fusion`.
    """

    structure: PredictionStructure
    rate: RatePoint
    intra_period: int = 32       # 0 = infinite (single leading intra frame)
    mini_gop: int = 4
    pstar_period: int = 32       # boosted-quality refresh spacing in infinite mode
    search: MotionSearchParams = field(default_factory=MotionSearchParams)

    def __post_init__(self):
        if self.mini_gop < 2:
            raise ValueError("mini_gop must be at least 2")
        if self.intra_period < 0:
            raise ValueError("intra_period must be 0 (infinite) or positive")
        if self.intra_period and self.intra_period % self.mini_gop:
            raise ValueError("a finite intra_period must be a multiple of mini_gop")
        if self.intra_period == 0 and self.pstar_period < 2:
            raise ValueError("pstar_period must be at least 2")


@dataclass(frozen=True)
class FrameRole:
    frame_type: str  # "I" | "P*" | "P"
    quality: QualityLevel
    is_long_term_key: bool


def _minigop_quality(pos: int, mini_gop: int) -> QualityLevel:
    if pos == mini_gop - 1:
        return _QUALITY_PATTERN_TAIL
    return QualityLevel.Q1 if pos % 2 == 0 else QualityLevel.Q2


def assign_roles(t: int, config: GopConfig) -> FrameRole:
    """Pure function of (t, config).

    Finite intra period: an intra frame opens every period, its successor is
    the boosted P* frame, and the remaining frames cycle the nested mini-GOP
    quality pattern (alternating Q1/Q2, closing on a Q3 long-term key).
    Infinite mode: one leading intra frame, then P* frames every
    ``pstar_period`` frames with the same pattern in between.
    """
    if t < 0:
        raise ValueError("frame index must be non-negative")
    if config.intra_period > 0:
        off = t % config.intra_period
        if off == 0:
            return FrameRole("I", QualityLevel.INTRA, True)
        if off == 1:
            return FrameRole("P*", QualityLevel.PSTAR, True)
        pos = (off - 2) % config.mini_gop
    else:
        if t == 0:
            return FrameRole("I", QualityLevel.INTRA, True)
        off = (t - 1) % config.pstar_period
        if off == 0:
            return FrameRole("P*", QualityLevel.PSTAR, True)
        pos = (off - 1) % config.mini_gop
    q = _minigop_quality(pos, config.mini_gop)
    return FrameRole("P", q, pos == config.mini_gop - 1)


def role_from_record(frame_type: str, quality: QualityLevel) -> bool:
    """Whether a decoded frame enters the long-term section (decoder side)."""
    return frame_type in ("I", "P*") or quality == _QUALITY_PATTERN_TAIL


@dataclass
class CandidateTrial:
    """Everything produced by fully encoding one hypothesis pair."""

    motion_payload: bytes
    residual_payload: bytes
    flow_dec: FlowField
    recon: Frame
    mse: float
    bits: int
    cost: float


@dataclass
class FrameStats:
    index: int
    frame_type: str
    quality: str
    bits: int
    psnr: float
    key_index: int | None
    buffer_digest: str
    candidate_costs: tuple = ()


@dataclass
class EncodeResult:
    stream: bytes
    stats: list
    recons: list


@dataclass
class DecodeResult:
    frames: list
    digests: list
    header: StreamHeader


def _needs_extra_flow(pair: HypothesisPair) -> bool:
    return pair.key.kind == "short" and pair.key.lag >= 2


def _hypothesis_flow(ref, f_dec: FlowField, extra_dec: FlowField | None) -> FlowField:
    if ref.kind == "long":
        return accumulate_flow(ref.acc_flow, f_dec)
    if ref.lag >= 2:
        return extra_dec
    return f_dec


def _predict_from_pair(pair: HypothesisPair, f_dec: FlowField, extra_dec: FlowField | None,
                       fusion: FusionParams):
    """The decoder-computable prediction path shared by both codec sides."""
    flow_pre = _hypothesis_flow(pair.pre, f_dec, extra_dec)
    flow_key = _hypothesis_flow(pair.key, f_dec, extra_dec)
    warped_pre = warp_stack(pair.pre.frame.stack(), flow_pre)
    warped_key = warp_stack(pair.key.frame.stack(), flow_key)
    pyr_pre = build_pyramid(warped_pre)
    pyr_key = build_pyramid(warped_key)
    gates = predict_gates(pyr_key, pyr_pre, fusion)
    x_c = synthesize_predictor(pyr_key, pyr_pre, gates)
    mask = predict_mask(x_c, f_dec, fusion)
    return x_c, mask


def _encode_candidate(x_t: Frame, pair: HypothesisPair, f_est: FlowField,
                      extra_est: FlowField | None, aux: FlowField | None,
                      quality: QualityLevel, config: GopConfig) -> CandidateTrial:
    flows = [f_est]
    if _needs_extra_flow(pair):
        flows.append(extra_est)
    motion_payload, decs = blockcodec.encode_motion_session(flows, aux)
    f_dec = decs[0]
    extra_dec = decs[1] if len(decs) > 1 else None
    x_c, mask = _predict_from_pair(pair, f_dec, extra_dec, DEFAULT_FUSION)
    residual_payload, recon = blockcodec.encode_inter(x_t, x_c, mask, quality, config.rate)
    mse = mse_rgb(x_t, recon)
    bits = record_size_bits(len(motion_payload), len(residual_payload))
    cost = config.rate.lam * mse + bits
    return CandidateTrial(motion_payload, residual_payload, f_dec, recon, mse, bits, cost)


@dataclass
class SelectionResult:
    index: int
    trials: list
    costs: tuple


def select_key_online(x_t: Frame, buffer: DecodedFrameBuffer, candidates: list,
                      quality: QualityLevel, config: GopConfig,
                      f_est: FlowField | None = None, jobs: int = 1) -> SelectionResult:
    """Exhaustive per-frame RD selection.

    Every candidate pair is fully encoded and scored with
    ``lambda * MSE(x_t, recon) + total record bits``; the argmin wins, ties
    broken by the smallest candidate index (newest-first enumeration).
    """
    if not candidates:
        raise ValueError("candidate list is empty")
    if f_est is None:
        f_est = estimate_flow(x_t, buffer.short[0].frame, config.search)
    extra_by_lag: dict[int, FlowField] = {}
    for pair in candidates:
        if _needs_extra_flow(pair) and pair.key.lag not in extra_by_lag:
            extra_by_lag[pair.key.lag] = estimate_flow(x_t, pair.key.frame, config.search)

    def run(pair):
        extra = extra_by_lag.get(pair.key.lag) if _needs_extra_flow(pair) else None
        return _encode_candidate(x_t, pair, f_est, extra, buffer.last_flow, quality, config)

    if jobs > 1 and len(candidates) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(run, candidates))
    else:
        trials = [run(p) for p in candidates]
    costs = tuple(t.cost for t in trials)
    best = min(range(len(trials)), key=lambda k: (costs[k], k))
    return SelectionResult(best, trials, costs)


def encode_sequence(frames: list, config: GopConfig, jobs: int = 1) -> EncodeResult:
    """Encode display-order RGB frames into a container stream.

    Every frame's record carries its own rate; the global header is charged
    to the sequence.  Returned stats include the encoder-local buffer digest
    after each frame for decoder cross-checks.
    """
    if not frames:
        raise ValueError("need at least one frame")
    # The stream carries only the rate-point index, so the encoder must run
    # at one of the committed operating points or the decoder would requantize
    # at the wrong step.
    expected = blockcodec.rate_point(int(config.rate.lam))
    if config.rate != expected:
        raise ValueError(
            f"sequence coding requires a committed rate point; "
            f"lambda {config.rate.lam} with base step {config.rate.base_step} is not one")
    w, h = frames[0].width, frames[0].height
    if w % 8 or h % 8 or w % 4 or h % 4:
        raise DimensionMismatch("frame dimensions must be divisible by 8")
    for f in frames:
        if (f.width, f.height) != (w, h):
            raise DimensionMismatch("all frames must share one size")

    structure = config.structure
    buf = DecodedFrameBuffer(w, h, structure)
    records = []
    stats = []
    recons = []
    for t, x_t in enumerate(frames):
        role = assign_roles(t, config)
        if role.frame_type == "I":
            payload, recon = blockcodec.encode_intra(x_t, config.rate)
            rec = FrameRecord("I", QualityLevel.INTRA, None, None, payload)
            flow_dec = None
            key_index = None
            costs = ()
        else:
            f_est = estimate_flow(x_t, buf.short[0].frame, config.search)
            pairs = buf.candidates(structure)
            sel = select_key_online(x_t, buf, pairs, role.quality, config, f_est=f_est, jobs=jobs)
            best = sel.trials[sel.index]
            key_index = sel.index if structure.adaptive else None
            rec = FrameRecord(role.frame_type, role.quality, key_index,
                              best.motion_payload, best.residual_payload)
            recon = best.recon
            flow_dec = best.flow_dec
            costs = sel.costs
        buf.on_frame_decoded(recon, flow_dec, role.is_long_term_key, role.quality, t)
        records.append(rec)
        recons.append(recon)
        stats.append(FrameStats(
            index=t,
            frame_type=role.frame_type,
            quality=role.quality.value,
            bits=rec.size_bits(),
            psnr=psnr_rgb(x_t, recon),
            key_index=key_index,
            buffer_digest=buf.digest(),
            candidate_costs=costs,
        ))
    header = StreamHeader(
        width=w,
        height=h,
        frame_count=len(frames),
        structure_tag=structure.tag,
        intra_period=config.intra_period,
        mini_gop=config.mini_gop,
        pstar_period=config.pstar_period,
        n_long=structure.n_long,
        rate_index=rate_index(int(config.rate.lam)),
    )
    return EncodeResult(write_stream(header, records), stats, recons)


def decode_sequence(data: bytes) -> DecodeResult:
    """Standalone decoder; reconstructions are bit-identical to the encoder's.

    On a truncated stream the raised :class:`PayloadTruncated` carries every
    frame decoded before the damage.
    """
    reader = StreamReader(data)
    header = reader.header
    structure = reader.structure
    rate = blockcodec.rate_point(header.rate_lambda)
    buf = DecodedFrameBuffer(header.width, header.height, structure)
    frames: list[Frame] = []
    digests: list[str] = []
    for t in range(header.frame_count):
        try:
            rec = reader.read_record()
        except PayloadTruncated as e:
            raise PayloadTruncated(str(e), decoded_frames=frames) from None
        if rec.frame_type == "I":
            recon = blockcodec.decode_intra(rec.residual_payload, header.width, header.height, rate)
            flow_dec = None
        else:
            pairs = buf.candidates(structure)
            k = rec.key_index if rec.key_index is not None else 0
            if k >= len(pairs):
                raise KeyIndexOutOfRange(
                    f"frame {t} signals candidate {k} but only {len(pairs)} exist")
            pair = pairs[k]
            count = 2 if _needs_extra_flow(pair) else 1
            decs = blockcodec.decode_motion_session(
                rec.flow_payload, count, header.width, header.height, buf.last_flow)
            f_dec = decs[0]
            extra_dec = decs[1] if len(decs) > 1 else None
            x_c, mask = _predict_from_pair(pair, f_dec, extra_dec, DEFAULT_FUSION)
            recon = blockcodec.decode_inter(rec.residual_payload, x_c, mask, rec.quality, rate)
            flow_dec = f_dec
        buf.on_frame_decoded(recon, flow_dec, role_from_record(rec.frame_type, rec.quality),
                             rec.quality, t)
        frames.append(recon)
        digests.append(buf.digest())
    reader.finish()
    return DecodeResult(frames, digests, header)


STATS_CSV_FIELDS = ("frame", "role", "quality", "bits", "psnr", "chosen_key_index")


def write_stats_csv(stats, path) -> None:
    """Per-frame stats in the documented CSV schema (PSNR fixed to 6 decimals)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STATS_CSV_FIELDS)
        for s in stats:
            w.writerow([
                s.index,
                s.frame_type,
                s.quality,
                s.bits,
                f"{s.psnr:.6f}",
                "" if s.key_index is None else s.key_index,
            ])
