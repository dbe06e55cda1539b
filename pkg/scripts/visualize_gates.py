#!/usr/bin/env python3
"""Dump the full-resolution gate map and soft mask of one coded frame as
grayscale PNGs (white = trust the long-term reference / keep the predictor).

Builds a clip with a dis-occlusion band (a strip whose motion differs from
the global pan) so the spatial structure of the gates is visible.
"""

import argparse
from pathlib import Path

from mhvc import blockcodec
from mhvc.blockcodec import rate_point
from mhvc.flow import MotionSearchParams, warp_stack, accumulate_flow
from mhvc.fusion import build_pyramid, dump_gray_png, predict_gates, predict_mask, synthesize_predictor
from mhvc.scheduler import GopConfig, encode_sequence, decode_sequence
from mhvc.refbuffer import DecodedFrameBuffer
from mhvc.structures import get_structure
from mhvc.synthetic import moving_texture_clip
from mhvc.frameio import Frame, RGB444


def band_motion_clip(size: int, frames: int, seed: int) -> list:
    """Global pan with a counter-moving horizontal band (dis-occlusion)."""
    base = moving_texture_clip(size, size, frames, dx=1.0, dy=0.0, seed=seed)
    band = moving_texture_clip(size, size, frames, dx=-2.0, dy=0.0, seed=seed + 1)
    lo, hi = size // 2 - size // 8, size // 2 + size // 8
    out = []
    for b, s in zip(base, band):
        planes = []
        for pb, ps in zip(b.planes, s.planes):
            p = pb.copy()
            p[lo:hi, :] = ps[lo:hi, :]
            planes.append(p)
        out.append(Frame(tuple(planes), RGB444))
    return out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--size", type=int, default=128)
    parser.add_argument("--frame", type=int, default=6, help="coding frame to visualize")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out-dir", default="gate_vis")
    args = parser.parse_args()

    clip = band_motion_clip(args.size, args.frame + 1, args.seed)
    cfg = GopConfig(structure=get_structure("ls"), rate=rate_point(1626),
                    intra_period=32, search=MotionSearchParams(16, 8))
    enc = encode_sequence(clip, cfg)

    # rebuild the prediction inputs for the requested frame from decoded state
    buf = DecodedFrameBuffer(args.size, args.size, cfg.structure)
    dec = decode_sequence(enc.stream)
    from mhvc.bitstream import read_stream
    from mhvc.scheduler import role_from_record
    _, records = read_stream(enc.stream)
    flow_prev = None
    for t in range(args.frame):
        rec = records[t]
        if rec.frame_type == "I":
            flow = None
        else:
            flow = blockcodec.decode_motion_session(
                rec.flow_payload, 1, args.size, args.size, buf.last_flow)[0]
        buf.on_frame_decoded(dec.frames[t], flow,
                             role_from_record(rec.frame_type, rec.quality), rec.quality, t)

    rec = records[args.frame]
    f_dec = blockcodec.decode_motion_session(
        rec.flow_payload, 1, args.size, args.size, buf.last_flow)[0]
    pair = buf.candidates()[rec.key_index or 0]
    flow_key = accumulate_flow(pair.key.acc_flow, f_dec) if pair.key.kind == "long" else f_dec
    warped_pre = warp_stack(pair.pre.frame.stack(), f_dec)
    warped_key = warp_stack(pair.key.frame.stack(), flow_key)
    gates = predict_gates(build_pyramid(warped_key), build_pyramid(warped_pre))
    x_c = synthesize_predictor(build_pyramid(warped_key), build_pyramid(warped_pre), gates)
    mask = predict_mask(x_c, f_dec)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_gray_png(gates.levels[0], out / f"gate_frame{args.frame:03d}.png")
    dump_gray_png(mask.m, out / f"mask_frame{args.frame:03d}.png")
    print(f"gate mean {gates.levels[0].mean() / 256:.3f}, mask mean {mask.m.mean() / 256:.3f}")
    print(f"wrote {out}/gate_frame{args.frame:03d}.png and mask_frame{args.frame:03d}.png")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
