"""Multi-hypothesis long/short-term reference video codec testbed.

Deterministic classical backends (fixed-point DCT, adaptive range coding,
block-matching motion) under an explicit decoded-frame-buffer reference
scheme: flow accumulation to long-term key frames, spatially gated fusion of
two hypotheses, masked conditional residual coding, and online RD selection
of the long-term reference.
"""

__version__ = "0.1.0"

from .blockcodec import LAMBDA_POINTS, QualityLevel, RatePoint, rate_point
from .errors import CodecError
from .evalrd import RdCurve, bd_rate, compute_bpp, psnr_profile, rd_sweep
from .flow import FlowField, MotionSearchParams, accumulate_flow, backward_warp, estimate_flow, rescale_flow
from .frameio import Frame, psnr_rgb, read_yuv420, yuv420_to_rgb
from .fusion import GateField, Pyramid, SoftMask, build_pyramid, fuse, predict_gates, predict_mask, synthesize_predictor
from .refbuffer import DecodedFrameBuffer, HypothesisPair, buffer_account
from .scheduler import GopConfig, assign_roles, decode_sequence, encode_sequence, select_key_online
from .structures import STRUCTURES, PredictionStructure, get_structure

__all__ = [
    "CodecError",
    "DecodedFrameBuffer",
    "FlowField",
    "Frame",
    "GateField",
    "GopConfig",
    "HypothesisPair",
    "LAMBDA_POINTS",
    "MotionSearchParams",
    "PredictionStructure",
    "Pyramid",
    "QualityLevel",
    "RatePoint",
    "RdCurve",
    "STRUCTURES",
    "SoftMask",
    "accumulate_flow",
    "assign_roles",
    "backward_warp",
    "bd_rate",
    "buffer_account",
    "build_pyramid",
    "compute_bpp",
    "decode_sequence",
    "encode_sequence",
    "estimate_flow",
    "fuse",
    "get_structure",
    "predict_gates",
    "predict_mask",
    "psnr_profile",
    "psnr_rgb",
    "rate_point",
    "rd_sweep",
    "read_yuv420",
    "rescale_flow",
    "select_key_online",
    "synthesize_predictor",
    "yuv420_to_rgb",
]
