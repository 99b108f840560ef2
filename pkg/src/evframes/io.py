"""Bit-exact event stream serialization: csv text and evb binary records.

csv: UTF-8 lines "t,x,y,p" with p in {1,-1}, optional header line "t,x,y,p".
evb: header `magic "EVB1" | width u16 | height u16 | record count u64`,
then 16-byte little-endian records `t u64 | x u16 | y u16 | p i8 | 3 zero pad`.
"""

from __future__ import annotations

import struct

import numpy as np

from .events import (
    MAX_TIMESTAMP,
    EventStream,
    OutOfBoundsError,
    Polarity,
    SensorGeometry,
    StreamFormatError,
)

EVB_MAGIC = b"EVB1"
EVB_HEADER = struct.Struct("<4sHHQ")
EVB_RECORD = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "i1"), ("pad", "V3")])

CSV_HEADER = "t,x,y,p"


def load_stream(source, format: str, geometry: SensorGeometry | None = None,
                default_polarity: Polarity | None = None) -> EventStream:
    """Parse a byte sequence into a validated, stable time-sorted EventStream.

    `geometry` is authoritative for coordinate validation; for evb it may be
    None to adopt the geometry recorded in the file header. `default_polarity`
    maps polarity-less records (3-column csv rows, p=0 evb bytes) onto a fixed
    polarity instead of rejecting them.
    """
    if format == "csv":
        if geometry is None:
            raise ValueError("csv streams carry no geometry; pass one explicitly")
        return _load_csv(source, geometry, default_polarity)
    if format == "evb":
        return _load_evb(source, geometry, default_polarity)
    raise ValueError(f"unknown stream format {format!r}")


def write_stream(stream: EventStream, format: str) -> bytes:
    """Serialize a stream; load_stream(write_stream(s, f), f, s.geometry) == s."""
    if format == "csv":
        lines = [CSV_HEADER]
        lines.extend(
            f"{int(t)},{int(x)},{int(y)},{int(p)}"
            for t, x, y, p in zip(stream.t, stream.x, stream.y, stream.p)
        )
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "evb":
        rec = np.zeros(len(stream), dtype=EVB_RECORD)
        rec["t"] = stream.t
        rec["x"] = stream.x
        rec["y"] = stream.y
        rec["p"] = stream.p
        header = EVB_HEADER.pack(EVB_MAGIC, stream.geometry.width, stream.geometry.height,
                                 len(stream))
        return header + rec.tobytes()
    raise ValueError(f"unknown stream format {format!r}")


def _load_csv(source, geometry, default_polarity):
    text = source.decode("utf-8") if isinstance(source, (bytes, bytearray)) else source
    lines = text.splitlines()
    start = 0
    if lines and lines[0].strip().replace(" ", "").lower() in ("t,x,y,p", "t,x,y"):
        start = 1

    ts, xs, ys, ps = [], [], [], []
    for lineno in range(start, len(lines)):
        raw = lines[lineno].strip()
        if not raw:
            continue
        fields = raw.split(",")
        if len(fields) == 3 and default_polarity is not None:
            fields = fields + [str(int(default_polarity))]
        if len(fields) != 4:
            raise StreamFormatError(
                f"line {lineno + 1}: expected 4 comma-separated fields, got {len(fields)}"
            )
        try:
            t, x, y, p = (int(f) for f in fields)
        except ValueError:
            raise StreamFormatError(f"line {lineno + 1}: non-integer field in {raw!r}") from None
        if not 0 <= t <= MAX_TIMESTAMP:
            raise StreamFormatError(f"line {lineno + 1}: timestamp {t} overflows unsigned 64-bit")
        if p == 0 and default_polarity is not None:
            p = int(default_polarity)
        if p not in (1, -1):
            raise StreamFormatError(f"line {lineno + 1}: polarity must be 1 or -1, got {p}")
        if not (0 <= x < geometry.width and 0 <= y < geometry.height):
            raise OutOfBoundsError(f"line {lineno + 1}: coordinate ({x}, {y}) outside {geometry}")
        ts.append(t)
        xs.append(x)
        ys.append(y)
        ps.append(p)
    return EventStream.from_arrays(
        np.array(ts, dtype=np.uint64), np.array(xs, dtype=np.uint16),
        np.array(ys, dtype=np.uint16), np.array(ps, dtype=np.int8), geometry, sort=True,
    )


def _load_evb(source, geometry, default_polarity):
    buf = bytes(source)
    if len(buf) < EVB_HEADER.size:
        raise StreamFormatError(f"truncated evb header: {len(buf)} bytes")
    magic, width, height, count = EVB_HEADER.unpack_from(buf)
    if magic != EVB_MAGIC:
        raise StreamFormatError(f"bad evb magic {magic!r}")
    expected = EVB_HEADER.size + count * EVB_RECORD.itemsize
    if len(buf) != expected:
        raise StreamFormatError(f"evb size mismatch: header declares {count} records "
                                f"({expected} bytes), got {len(buf)} bytes")
    if geometry is None:
        geometry = SensorGeometry(width, height)

    rec = np.frombuffer(buf, dtype=EVB_RECORD, count=count, offset=EVB_HEADER.size)
    raw = np.frombuffer(buf, np.uint8, count * EVB_RECORD.itemsize,
                        offset=EVB_HEADER.size).reshape(count, EVB_RECORD.itemsize)
    bad = np.flatnonzero(raw[:, 13:16].any(axis=1))
    if bad.size:
        i = int(bad[0])
        raise StreamFormatError(
            f"malformed record at offset {EVB_HEADER.size + i * EVB_RECORD.itemsize}: "
            "nonzero pad bytes"
        )
    p = rec["p"].astype(np.int8)
    if default_polarity is not None:
        p = np.where(p == 0, np.int8(int(default_polarity)), p)
    bad = np.flatnonzero((p != 1) & (p != -1))
    if bad.size:
        i = int(bad[0])
        raise StreamFormatError(
            f"malformed record at offset {EVB_HEADER.size + i * EVB_RECORD.itemsize}: "
            f"invalid polarity {int(p[i])}"
        )
    x, y = rec["x"], rec["y"]
    bad = np.flatnonzero((x >= geometry.width) | (y >= geometry.height))
    if bad.size:
        i = int(bad[0])
        raise OutOfBoundsError(
            f"record at offset {EVB_HEADER.size + i * EVB_RECORD.itemsize}: "
            f"coordinate ({int(x[i])}, {int(y[i])}) outside {geometry}"
        )
    return EventStream.from_arrays(rec["t"], x, y, p, geometry, sort=True)
