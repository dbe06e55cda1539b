"""The explicit decoded frame buffer.

A short-term section of recent decoded frames plus the most recent decoded
flow, and a long-term FIFO of key frames, each carrying the accumulated flow
that maps the *previous decoded frame's* coordinates to that key.  Both codec
sides run the identical update rules, so buffer state stays bit-equal under
a bit-exact coder.
"""

from __future__ import annotations

import hashlib
import zlib
from dataclasses import dataclass
from fractions import Fraction

from .blockcodec import QualityLevel
from .errors import DimensionMismatch, InsufficientReferences
from .flow import FlowField, accumulate_flow, zero_flow
from .frameio import Frame
from .structures import PredictionStructure


@dataclass(frozen=True)
class LongTermEntry:
    """A buffered key frame with its incrementally maintained accumulated flow."""

    frame: Frame
    acc_flow: FlowField
    quality: QualityLevel
    frame_index: int


@dataclass(frozen=True)
class ShortEntry:
    frame: Frame
    frame_index: int


@dataclass(frozen=True)
class HypothesisRef:
    """One temporal prediction hypothesis drawn from the buffer.

    Short references with lag 1 reuse the frame's coded flow; larger lags
    need their own estimated-and-coded flow.  Long references carry the
    accumulated flow to compose with the frame's coded flow.
    """

    kind: str  # "short" | "long"
    frame: Frame
    frame_index: int
    lag: int = 1
    acc_flow: FlowField | None = None
    quality: QualityLevel | None = None


@dataclass(frozen=True)
class HypothesisPair:
    """The two hypotheses fused per frame: ``pre`` is the primary short-range
    side, ``key`` the secondary side weighted by the gates."""

    pre: HypothesisRef
    key: HypothesisRef


class DecodedFrameBuffer:
    """Sequentially owned by the coding loop; snapshots handed to candidate
    encoders are immutable (entries are frozen, arrays read-only)."""

    def __init__(self, width: int, height: int, structure: PredictionStructure):
        self.width = width
        self.height = height
        self.structure = structure
        self.short: list[ShortEntry] = []   # newest first
        self.long: list[LongTermEntry] = [] # oldest -> newest
        self.last_flow: FlowField | None = None

    def clone(self) -> "DecodedFrameBuffer":
        c = DecodedFrameBuffer(self.width, self.height, self.structure)
        c.short = list(self.short)
        c.long = list(self.long)
        c.last_flow = self.last_flow
        return c

    def on_frame_decoded(self, frame: Frame, flow: FlowField | None, mark_as_key: bool,
                         quality: QualityLevel, frame_index: int) -> None:
        """Apply the per-decode update in fixed order:

        1. compose every long entry's accumulated flow with the new decoded
           flow (skipped for intra frames, which carry none);
        2. push the frame onto the short-term section and store the flow as
           the motion-codec auxiliary state;
        3. insert a fresh long-term entry (zero accumulated flow) when the
           frame is marked as a key, evicting the oldest when full.

        The ordering guarantees a key's accumulated flow is never composed
        with the flow that decoded the key itself.
        """
        if (frame.height, frame.width) != (self.height, self.width):
            raise DimensionMismatch("decoded frame size does not match buffer configuration")
        if flow is not None and (flow.height, flow.width) != (self.height, self.width):
            raise DimensionMismatch("decoded flow size does not match buffer configuration")
        if flow is not None:
            self.long = [
                LongTermEntry(e.frame, accumulate_flow(e.acc_flow, flow), e.quality, e.frame_index)
                for e in self.long
            ]
        self.short.insert(0, ShortEntry(frame, frame_index))
        del self.short[self.structure.short_depth:]
        self.last_flow = flow
        if mark_as_key:
            self.long.append(LongTermEntry(frame, zero_flow(self.width, self.height), quality, frame_index))
            del self.long[:-self.structure.n_long]

    # -- candidate enumeration ------------------------------------------------

    def _short_ref(self, lag: int) -> HypothesisRef | None:
        if lag <= len(self.short):
            e = self.short[lag - 1]
            return HypothesisRef("short", e.frame, e.frame_index, lag=lag)
        return None

    def _long_ref(self, entry: LongTermEntry) -> HypothesisRef:
        return HypothesisRef("long", entry.frame, entry.frame_index,
                             acc_flow=entry.acc_flow, quality=entry.quality)

    def candidates(self, structure: PredictionStructure | None = None) -> list[HypothesisPair]:
        """Hypothesis pairs for the next coding frame, enumerated newest-first.

        Until the structure's required references exist, missing slots fall
        back to the newest available reference (a short-short style start-up),
        so the list is never empty once one frame is decoded.  The decoder
        derives the identical list from its own buffer state.
        """
        structure = structure or self.structure
        if not self.short:
            raise InsufficientReferences("no decoded frames buffered yet")
        newest = self._short_ref(1)
        tag = structure.tag
        if tag == "ss":
            return [HypothesisPair(newest, newest)]
        if tag == "ls":
            key = self._long_ref(self.long[-1]) if self.long else newest
            return [HypothesisPair(newest, key)]
        if tag == "ls+":
            if not self.long:
                return [HypothesisPair(newest, newest)]
            return [HypothesisPair(newest, self._long_ref(e)) for e in reversed(self.long)]
        if tag == "tp":
            second = self._short_ref(2) or newest
            return [HypothesisPair(newest, second)]
        if tag == "tp+":
            cands = [r for r in (self._short_ref(2), self._short_ref(3)) if r is not None]
            if not cands:
                cands = [newest]
            return [HypothesisPair(newest, c) for c in cands]
        if tag == "ll":
            if not self.long:
                return [HypothesisPair(newest, newest)]
            first = self._long_ref(self.long[-1])
            second = self._long_ref(self.long[-2]) if len(self.long) >= 2 else first
            return [HypothesisPair(first, second)]
        raise ValueError(f"unknown structure {tag!r}")

    # -- introspection ---------------------------------------------------------

    def digest(self) -> str:
        """SHA-256 over the full buffer state (frames, flows, accumulated flows)."""
        h = hashlib.sha256()
        for e in self.short:
            h.update(e.frame_index.to_bytes(4, "little", signed=True))
            h.update(e.frame.tobytes())
        h.update(b"|flow|")
        if self.last_flow is not None:
            h.update(self.last_flow.tobytes())
        for e in self.long:
            h.update(b"|long|")
            h.update(e.frame_index.to_bytes(4, "little", signed=True))
            h.update(e.quality.value.encode())
            h.update(e.frame.tobytes())
            h.update(e.acc_flow.tobytes())
        return h.hexdigest()

    def trace_line(self, t: int) -> str:
        """One golden-trace line: short indices, long indices, accumulated-flow checksums."""
        short = ",".join(str(e.frame_index) for e in self.short)
        long_ = ",".join(f"{e.frame_index}:{zlib.crc32(e.acc_flow.tobytes()):08x}" for e in self.long)
        return f"frame={t} short=[{short}] long=[{long_}]"


# ---------------------------------------------------------------------------
# Buffer-size accounting

@dataclass(frozen=True)
class BufferItem:
    """One stored item: a channel count at a fraction of full resolution."""

    label: str
    channels: int
    fraction: Fraction

    def __post_init__(self):
        if self.channels < 0:
            raise ValueError("channel count must be non-negative")
        if not 0 < self.fraction <= 1:
            raise ValueError("resolution fraction must lie in (0, 1]")


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(x))


def make_item(label: str, channels: int, fraction) -> BufferItem:
    return BufferItem(label, channels, _as_fraction(fraction))


def buffer_account(items) -> float:
    """Equivalent full-resolution map count: sum of channels x fractional area.

    Computed in exact rational arithmetic, then converted once to float, so
    decimal-specified presets reproduce their published totals exactly.
    """
    total = Fraction(0)
    for it in items:
        total += it.channels * it.fraction
    return float(total)


#: Buffer configurations of several codecs, in equivalent full-resolution maps.
ACCOUNT_PRESETS = {
    "mhlvc1": (
        make_item("reconstructed reference frames (2x RGB)", 6, 1),
        make_item("accumulated flow map", 2, 1),
        make_item("motion codec auxiliary state", 25, Fraction(1, 4)),
    ),
    "mhlvc2": (
        make_item("reconstructed reference frames (3x RGB)", 9, 1),
        make_item("flow maps (2x)", 4, 1),
        make_item("motion codec auxiliary state", 25, Fraction(1, 4)),
    ),
    "dcvcfm": (
        make_item("propagated feature maps", 48, 1),
        make_item("reconstructed frame", 3, 1),
        make_item("latent prior", 12, Fraction(1, 16)),
    ),
    "tcm": (
        make_item("propagated feature maps", 48, 1),
        make_item("reconstructed frame", 3, 1),
        make_item("flow maps (2x)", 4, 1),
    ),
    "dcvchem": (
        make_item("propagated feature maps", 64, 1),
        make_item("reconstructed frame", 3, 1),
        make_item("latent prior equivalent", 63, Fraction(1, 100)),
    ),
}


def account_preset(name: str) -> float:
    if name not in ACCOUNT_PRESETS:
        raise ValueError(f"unknown preset {name!r}; pick one of {', '.join(sorted(ACCOUNT_PRESETS))}")
    return buffer_account(ACCOUNT_PRESETS[name])
