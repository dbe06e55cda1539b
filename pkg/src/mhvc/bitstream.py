"""Container format: global header, per-frame records with the signaled
reference choice, and length-delimited payloads.

All multi-byte integers are little-endian; every record is byte-aligned.
``read(write(x)) == x`` field-for-field, and bit accounting is exact: the
stream length equals the header size plus the sum of record sizes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .blockcodec import LAMBDA_POINTS, QualityLevel
from .errors import KeyIndexOutOfRange, MalformedHeader, PayloadTruncated, UnknownVersion
from .structures import PredictionStructure, structure_from_id, structure_id

MAGIC = b"MHLV"
VERSION = 1

_HEADER = struct.Struct("<4sBHHIBHBHBB")

FRAME_TYPES = ("I", "P*", "P")
_QUALITY_ORDER = (
    QualityLevel.INTRA,
    QualityLevel.PSTAR,
    QualityLevel.Q3,
    QualityLevel.Q2,
    QualityLevel.Q1,
)


@dataclass(frozen=True)
class StreamHeader:
    width: int
    height: int
    frame_count: int
    structure_tag: str
    intra_period: int  # 0 = infinite
    mini_gop: int
    pstar_period: int
    n_long: int
    rate_index: int

    def structure(self) -> PredictionStructure:
        return structure_from_id(structure_id(self.structure_tag), self.n_long)

    @property
    def rate_lambda(self) -> int:
        return LAMBDA_POINTS[self.rate_index]


@dataclass(frozen=True)
class FrameRecord:
    frame_type: str               # "I" | "P*" | "P"
    quality: QualityLevel
    key_index: int | None         # None unless the structure signals a choice
    flow_payload: bytes | None    # absent for intra frames
    residual_payload: bytes

    def __post_init__(self):
        if self.frame_type not in FRAME_TYPES:
            raise ValueError(f"bad frame type {self.frame_type!r}")
        if (self.frame_type == "I") != (self.flow_payload is None):
            raise ValueError("flow payload present iff the frame is inter-coded")

    def size_bytes(self) -> int:
        n = 1 + 4 + len(self.residual_payload)
        if self.flow_payload is not None:
            n += 4 + len(self.flow_payload)
        return n

    def size_bits(self) -> int:
        return 8 * self.size_bytes()


def record_size_bits(flow_len: int | None, residual_len: int) -> int:
    """Size a record before building it (used for RD costs during trials)."""
    n = 1 + 4 + residual_len
    if flow_len is not None:
        n += 4 + flow_len
    return 8 * n


def header_size_bytes() -> int:
    return _HEADER.size


def _serialize_record(rec: FrameRecord, signal_bits: int) -> bytes:
    if signal_bits > 3:
        raise ValueError("signal field does not fit the record header byte")
    b0 = (FRAME_TYPES.index(rec.frame_type) << 6) | (_QUALITY_ORDER.index(rec.quality) << 3)
    if signal_bits:
        ki = rec.key_index or 0
        if ki >= (1 << signal_bits):
            raise KeyIndexOutOfRange(f"key index {ki} needs more than {signal_bits} bits")
        b0 |= ki << (3 - signal_bits)
    parts = [bytes([b0])]
    if rec.flow_payload is not None:
        parts.append(struct.pack("<I", len(rec.flow_payload)))
        parts.append(rec.flow_payload)
    parts.append(struct.pack("<I", len(rec.residual_payload)))
    parts.append(rec.residual_payload)
    return b"".join(parts)


def write_stream(header: StreamHeader, records) -> bytes:
    records = list(records)
    if header.frame_count != len(records):
        raise ValueError("frame_count does not match the number of records")
    structure = header.structure()
    out = [
        _HEADER.pack(
            MAGIC,
            VERSION,
            header.width,
            header.height,
            header.frame_count,
            structure_id(header.structure_tag),
            header.intra_period,
            header.mini_gop,
            header.pstar_period,
            header.n_long,
            header.rate_index,
        )
    ]
    for rec in records:
        out.append(_serialize_record(rec, structure.signal_bits))
    return b"".join(out)


class StreamReader:
    """Incremental reader: header first, then one record per call, so a
    truncated stream still yields every record before the damage."""

    def __init__(self, data: bytes):
        if len(data) < _HEADER.size:
            raise MalformedHeader("stream shorter than the global header")
        magic, version, w, h, count, sid, intra, mini, pstar, n_long, rate_idx = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise MalformedHeader(f"bad magic {magic!r}")
        if version != VERSION:
            raise UnknownVersion(f"cannot decode version {version}")
        try:
            structure = structure_from_id(sid, n_long)
        except ValueError as e:
            raise MalformedHeader(str(e)) from None
        if rate_idx >= len(LAMBDA_POINTS):
            raise MalformedHeader(f"bad rate index {rate_idx}")
        self.header = StreamHeader(w, h, count, structure.tag, intra, mini, pstar, n_long, rate_idx)
        self.structure = structure
        self.data = data
        self.pos = _HEADER.size
        self.records_read = 0

    def _take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise PayloadTruncated(f"stream ends inside {what}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def read_record(self) -> FrameRecord:
        if self.records_read >= self.header.frame_count:
            raise MalformedHeader("no records left to read")
        b0 = self._take(1, "record header")[0]
        tbits = (b0 >> 6) & 3
        if tbits >= len(FRAME_TYPES):
            raise MalformedHeader(f"bad frame type bits in record {self.records_read}")
        ftype = FRAME_TYPES[tbits]
        qidx = (b0 >> 3) & 7
        if qidx >= len(_QUALITY_ORDER):
            raise MalformedHeader(f"bad quality bits in record {self.records_read}")
        quality = _QUALITY_ORDER[qidx]
        sb = self.structure.signal_bits
        key_index = None
        if sb and ftype != "I":
            key_index = (b0 >> (3 - sb)) & ((1 << sb) - 1)
            if key_index >= self.structure.candidate_count:
                raise KeyIndexOutOfRange(
                    f"record {self.records_read} signals candidate {key_index} "
                    f"of {self.structure.candidate_count}"
                )
        flow = None
        if ftype != "I":
            (flow_len,) = struct.unpack("<I", self._take(4, "flow length"))
            flow = self._take(flow_len, "flow payload")
        (res_len,) = struct.unpack("<I", self._take(4, "residual length"))
        residual = self._take(res_len, "residual payload")
        self.records_read += 1
        return FrameRecord(ftype, quality, key_index, flow, residual)

    def finish(self) -> None:
        """Call after the last record; trailing bytes are a header-level fault."""
        if self.pos != len(self.data):
            raise MalformedHeader(f"{len(self.data) - self.pos} trailing bytes after the last record")


def read_stream(data: bytes) -> tuple[StreamHeader, list[FrameRecord]]:
    reader = StreamReader(data)
    records = [reader.read_record() for _ in range(reader.header.frame_count)]
    reader.finish()
    return reader.header, records
