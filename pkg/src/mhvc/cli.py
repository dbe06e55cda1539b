"""Command-line entry point: encode, decode, eval, sweep, account,
trace-buffer, inspect.

Exit codes: 0 success, 2 usage errors, 3 I/O errors, 4 codec errors.  No
environment variables are consulted and there is no hidden randomness, so
identical flags always produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import blockcodec, evalrd, frameio, scheduler
from .errors import CodecError
from .flow import MotionSearchParams, zero_flow
from .refbuffer import ACCOUNT_PRESETS, DecodedFrameBuffer, account_preset
from .scheduler import GopConfig, assign_roles
from .structures import STRUCTURE_ORDER, get_structure

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CODEC = 4

_CONFIG_KEYS = {
    "input", "width", "height", "frames", "structure", "lambda", "out", "stats",
    "intra_period", "mini_gop", "pstar_period", "n_long", "block_size",
    "search_range", "lambdas", "structures", "anchor", "out_prefix", "jobs", "json",
}


def _read_config_file(path: str) -> dict:
    """Line-oriented key=value config; '#' starts a comment; unknown keys are rejected."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = val
    return values


def _apply_config_defaults(args: argparse.Namespace, cfg: dict, mapping: dict) -> None:
    """Fill argparse values from a config file; explicit flags win."""
    for key, (attr, conv) in mapping.items():
        if key in cfg and getattr(args, attr, None) in (None, ()):
            setattr(args, attr, conv(cfg[key]))


def _load_input_frames(path: str, width: int | None, height: int | None,
                       max_frames: int | None):
    p = Path(path)
    if p.is_dir():
        frames = frameio.read_png_sequence(p)
        if max_frames is not None:
            frames = frames[:max_frames]
        return frames
    if width is None or height is None:
        raise ValueError("raw .yuv input needs --width and --height")
    raw = frameio.read_yuv420(p, width, height, max_frames)
    return [frameio.yuv420_to_rgb(f) for f in raw]


def _gop_config(args) -> GopConfig:
    structure = get_structure(args.structure, args.n_long)
    rate = blockcodec.rate_point(args.lam)
    search = MotionSearchParams(block_size=args.block_size, search_range=args.search_range)
    return GopConfig(
        structure=structure,
        rate=rate,
        intra_period=args.intra_period,
        mini_gop=args.mini_gop,
        pstar_period=args.pstar_period,
        search=search,
    )


def _cmd_encode(args) -> int:
    if args.config:
        cfg = _read_config_file(args.config)
        _apply_config_defaults(args, cfg, {
            "input": ("input", str),
            "width": ("width", int),
            "height": ("height", int),
            "frames": ("frames", int),
            "n_long": ("n_long", int),
            "out": ("out", str),
            "stats": ("stats", str),
        })
    if args.input is None or args.out is None:
        raise ValueError("encode needs --input and --out (flags or config file)")
    max_frames = args.frames if args.frames is not None else 96
    frames = _load_input_frames(args.input, args.width, args.height, max_frames)
    config = _gop_config(args)
    result = scheduler.encode_sequence(frames, config, jobs=args.jobs)
    Path(args.out).write_bytes(result.stream)
    if args.stats:
        scheduler.write_stats_csv(result.stats, args.stats)
    bpp = evalrd.compute_bpp(len(result.stream) * 8, frames[0].width, frames[0].height, len(frames))
    mean_psnr = float(np.mean([s.psnr for s in result.stats]))
    print(f"encoded {len(frames)} frames: {len(result.stream)} bytes, "
          f"{bpp:.6f} bpp, {mean_psnr:.3f} dB mean PSNR")
    return 0


def _cmd_decode(args) -> int:
    data = Path(args.inp).read_bytes()
    result = scheduler.decode_sequence(data)
    frameio.write_png_sequence(result.frames, args.out_dir)
    print(f"decoded {len(result.frames)} frames into {args.out_dir}")
    return 0


def _cmd_eval(args) -> int:
    recon = frameio.read_png_sequence(args.recon)
    orig = _load_input_frames(args.orig, args.width, args.height, len(recon))
    if len(orig) < len(recon):
        raise CodecError("original clip has fewer frames than the reconstruction")
    rows = []
    for i, (a, b) in enumerate(zip(orig, recon)):
        rows.append((i, frameio.psnr_rgb(a, b)))
    with open(args.csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("frame", "psnr"))
        for i, p in rows:
            w.writerow((i, f"{p:.6f}"))
    mean = float(np.mean([p for _, p in rows]))
    print(f"evaluated {len(rows)} frames, mean PSNR {mean:.3f} dB -> {args.csv}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _read_config_file(args.config)
    required = ("input", "lambdas", "structures", "anchor", "out_prefix")
    missing = [k for k in required if k not in cfg]
    if missing:
        raise ValueError(f"sweep config is missing keys: {', '.join(missing)}")
    width = int(cfg["width"]) if "width" in cfg else None
    height = int(cfg["height"]) if "height" in cfg else None
    max_frames = int(cfg["frames"]) if "frames" in cfg else None
    frames = _load_input_frames(cfg["input"], width, height, max_frames)
    lambdas = [int(x) for x in cfg["lambdas"].split(",") if x.strip()]
    structures = [s.strip() for s in cfg["structures"].split(",") if s.strip()]
    intra_period = int(cfg.get("intra_period", 32))
    mini_gop = int(cfg.get("mini_gop", 4))
    pstar_period = int(cfg.get("pstar_period", 32))
    search = MotionSearchParams(
        block_size=int(cfg.get("block_size", 16)),
        search_range=int(cfg.get("search_range", 24)),
    )
    jobs = int(cfg.get("jobs", args.jobs))

    def config_for(tag: str) -> GopConfig:
        return GopConfig(
            structure=get_structure(tag),
            rate=blockcodec.rate_point(lambdas[0]),
            intra_period=intra_period,
            mini_gop=mini_gop,
            pstar_period=pstar_period,
            search=search,
        )

    result = evalrd.rd_sweep(frames, config_for, lambdas, structures, cfg["anchor"], jobs=jobs)
    prefix = cfg["out_prefix"]
    points_path = f"{prefix}_points.csv"
    bd_path = f"{prefix}_bdrate.csv"
    evalrd.write_sweep_csv(result, points_path, bd_path)
    if cfg.get("json", "").lower() in ("1", "true", "yes"):
        evalrd.write_sweep_json(result, f"{prefix}.json")
    print(f"sweep wrote {points_path} and {bd_path}")
    return 0


def _cmd_account(args) -> int:
    total = account_preset(args.preset)
    print(f"{total:g}")
    if args.verbose:
        for item in ACCOUNT_PRESETS[args.preset]:
            print(f"  {item.label}: {item.channels} ch x {float(item.fraction):g} area")
    return 0


def _cmd_trace_buffer(args) -> int:
    """Run the role schedule against the buffer with placeholder frames and
    zero flows; emits the golden-trace format (one line per decoded frame)."""
    structure = get_structure(args.structure, args.n_long)
    config = GopConfig(
        structure=structure,
        rate=blockcodec.rate_point(1626),
        intra_period=args.intra_period,
        mini_gop=args.mini_gop,
        pstar_period=args.pstar_period,
    )
    side = 16
    buf = DecodedFrameBuffer(side, side, structure)
    for t in range(args.frames):
        role = assign_roles(t, config)
        plane = np.full((side, side), t % 256, np.uint8)
        frame = frameio.Frame((plane, plane.copy(), plane.copy()), frameio.RGB444)
        flow = None if role.frame_type == "I" else zero_flow(side, side)
        buf.on_frame_decoded(frame, flow, role.is_long_term_key, role.quality, t)
        print(buf.trace_line(t))
    return 0


def _cmd_inspect(args) -> int:
    data = Path(args.inp).read_bytes()
    from .bitstream import StreamReader

    reader = StreamReader(data)
    h = reader.header
    print(f"magic=MHLV version=1 {h.width}x{h.height} frames={h.frame_count}")
    print(f"structure={h.structure_tag} intra_period={h.intra_period or 'infinite'} "
          f"mini_gop={h.mini_gop} pstar_period={h.pstar_period} n_long={h.n_long} "
          f"lambda={h.rate_lambda}")
    print(f"{'frame':>5} {'type':>4} {'quality':>7} {'key':>3} {'flow_bytes':>10} {'res_bytes':>9} {'bits':>8}")
    for t in range(h.frame_count):
        rec = reader.read_record()
        flow_len = len(rec.flow_payload) if rec.flow_payload is not None else 0
        key = "-" if rec.key_index is None else str(rec.key_index)
        print(f"{t:>5} {rec.frame_type:>4} {rec.quality.value:>7} {key:>3} "
              f"{flow_len:>10} {len(rec.residual_payload):>9} {rec.size_bits():>8}")
    reader.finish()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhvc",
        description="Multi-hypothesis long/short-term reference video codec testbed.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("encode", formatter_class=fmt,
                       help="encode a raw .yuv file or PNG directory into a .mhlv stream")
    p.add_argument("--input", default=None, help="input .yuv file (I420) or PNG sequence directory")
    p.add_argument("--width", type=int, default=None, help="frame width (required for .yuv input)")
    p.add_argument("--height", type=int, default=None, help="frame height (required for .yuv input)")
    p.add_argument("--frames", type=int, default=None,
                   help="maximum number of frames to encode (default: 96)")
    p.add_argument("--structure", default="ls", choices=STRUCTURE_ORDER, help="prediction structure")
    p.add_argument("--lambda", dest="lam", type=int, default=1626,
                   choices=blockcodec.LAMBDA_POINTS, help="rate point")
    p.add_argument("--out", default=None, help="output .mhlv path")
    p.add_argument("--stats", default=None, help="optional per-frame stats CSV path")
    p.add_argument("--intra-period", dest="intra_period", type=int, default=32,
                   help="intra period (0 = infinite)")
    p.add_argument("--mini-gop", dest="mini_gop", type=int, default=4, help="mini-GOP length")
    p.add_argument("--pstar-period", dest="pstar_period", type=int, default=32,
                   help="boosted-frame spacing under an infinite intra period")
    p.add_argument("--n-long", dest="n_long", type=int, default=None,
                   help="long-term key slots (default: per structure)")
    p.add_argument("--block-size", dest="block_size", type=int, default=16,
                   help="motion estimation block size")
    p.add_argument("--search-range", dest="search_range", type=int, default=24,
                   help="motion search range in integer pixels")
    p.add_argument("--jobs", type=int, default=1, help="concurrent candidate encodes")
    p.add_argument("--config", default=None, help="optional key=value config file")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", formatter_class=fmt, help="decode a .mhlv stream to PNG frames")
    p.add_argument("--in", dest="inp", required=True, help="input .mhlv path")
    p.add_argument("--out-dir", dest="out_dir", required=True, help="output PNG directory")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("eval", formatter_class=fmt,
                       help="per-frame PSNR of a reconstruction against the original clip")
    p.add_argument("--orig", required=True, help="original .yuv file or PNG directory")
    p.add_argument("--width", type=int, default=None, help="original width (for .yuv)")
    p.add_argument("--height", type=int, default=None, help="original height (for .yuv)")
    p.add_argument("--recon", required=True, help="reconstructed PNG directory")
    p.add_argument("--csv", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", formatter_class=fmt,
                       help="full RD sweep over rate points and structures from a config file")
    p.add_argument("--config", required=True, help="key=value sweep configuration")
    p.add_argument("--jobs", type=int, default=1, help="concurrent sweep cells")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("account", formatter_class=fmt,
                       help="decoded-frame-buffer size of a codec preset, in full-resolution maps")
    p.add_argument("--preset", required=True, choices=sorted(ACCOUNT_PRESETS),
                   help="buffer configuration preset")
    p.add_argument("--verbose", action="store_true", help="list the accounted items")
    p.set_defaults(func=_cmd_account)

    p = sub.add_parser("trace-buffer", formatter_class=fmt,
                       help="print the buffer evolution trace for a scripted schedule")
    p.add_argument("--frames", type=int, default=12, help="number of scheduled frames")
    p.add_argument("--structure", default="ls", choices=STRUCTURE_ORDER, help="prediction structure")
    p.add_argument("--n-long", dest="n_long", type=int, default=None,
                   help="long-term key slots (default: per structure)")
    p.add_argument("--intra-period", dest="intra_period", type=int, default=32,
                   help="intra period (0 = infinite)")
    p.add_argument("--mini-gop", dest="mini_gop", type=int, default=4, help="mini-GOP length")
    p.add_argument("--pstar-period", dest="pstar_period", type=int, default=32,
                   help="boosted-frame spacing under an infinite intra period")
    p.set_defaults(func=_cmd_trace_buffer)

    p = sub.add_parser("inspect", formatter_class=fmt,
                       help="print the stream header and per-frame record table")
    p.add_argument("--in", dest="inp", required=True, help="input .mhlv path")
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CodecError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODEC
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
