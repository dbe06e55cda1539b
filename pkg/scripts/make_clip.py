#!/usr/bin/env python3
"""Generate deterministic synthetic test clips (raw I420 or PNG sequences)."""

import argparse
from pathlib import Path

from mhvc.frameio import write_png_sequence, write_yuv420
from mhvc.synthetic import mixed_shift_clip, moving_texture_clip, moving_texture_yuv_clip


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--kind", choices=("texture", "mixed", "texture-yuv"), default="texture",
                        help="clip generator")
    parser.add_argument("--width", type=int, default=128)
    parser.add_argument("--height", type=int, default=128)
    parser.add_argument("--frames", type=int, default=96)
    parser.add_argument("--dx", type=float, default=1.0, help="horizontal shift per frame (px)")
    parser.add_argument("--dy", type=float, default=0.25, help="vertical shift per frame (px)")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", required=True,
                        help=".yuv path (raw I420) or a directory for a PNG sequence")
    args = parser.parse_args()

    if args.kind == "texture-yuv":
        clip = moving_texture_yuv_clip(args.width, args.height, args.frames,
                                       dx=args.dx, dy=args.dy, seed=args.seed)
    elif args.kind == "mixed":
        clip = mixed_shift_clip(args.width, args.height, args.frames, seed=args.seed)
    else:
        clip = moving_texture_clip(args.width, args.height, args.frames,
                                   dx=args.dx, dy=args.dy, seed=args.seed)

    out = Path(args.out)
    if out.suffix == ".yuv":
        if args.kind != "texture-yuv":
            parser.error("raw .yuv output needs --kind texture-yuv")
        write_yuv420(out, clip)
    else:
        write_png_sequence(clip, out)
    print(f"wrote {args.frames} frames to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
