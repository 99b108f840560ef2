"""On-disk formats around the core types.

EVF frame tensors: magic "EVF1" | channels u16 | H u16 | W u16, then
C*H*W little-endian float32, row-major within a channel, channel-major.

Trajectory csv: header "t,j0u,j0v,..." (2D) or "t,j0x,j0y,j0z,..." (3D),
one row per sample, floats serialized with round-trip precision.

Manifest: JSON with one entry per exported sample; every referenced path is
stored relative to the manifest file, so output trees relocate cleanly.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .events import SensorGeometry, StreamFormatError
from .keypoints import NUM_JOINTS
from .representation import (
    EC_CHANNELS,
    LNEC_CHANNELS,
    LNECS_CHANNELS,
    LNES_CHANNELS,
    LNEWCS_CHANNELS,
    Frame,
)

EVF_MAGIC = b"EVF1"
EVF_HEADER = struct.Struct("<4sHHH")

_REP_CHANNELS = {
    "ec": EC_CHANNELS,
    "lnes": LNES_CHANNELS,
    "lnec": LNEC_CHANNELS,
    "lnecs": LNECS_CHANNELS,
    "lnewcs": LNEWCS_CHANNELS,
}


def write_evf(frame: Frame) -> bytes:
    c, h, w = frame.data.shape
    header = EVF_HEADER.pack(EVF_MAGIC, c, h, w)
    return header + np.ascontiguousarray(frame.data, dtype="<f4").tobytes()


def read_evf(source) -> np.ndarray:
    """Decode EVF bytes into a (C, H, W) float32 array."""
    buf = bytes(source)
    if len(buf) < EVF_HEADER.size:
        raise StreamFormatError(f"truncated EVF header: {len(buf)} bytes")
    magic, c, h, w = EVF_HEADER.unpack_from(buf)
    if magic != EVF_MAGIC:
        raise StreamFormatError(f"bad EVF magic {magic!r}")
    expected = EVF_HEADER.size + c * h * w * 4
    if len(buf) != expected:
        raise StreamFormatError(
            f"EVF size mismatch: header declares {c}x{h}x{w} ({expected} bytes), "
            f"got {len(buf)}"
        )
    data = np.frombuffer(buf, dtype="<f4", count=c * h * w, offset=EVF_HEADER.size)
    return data.reshape(c, h, w).copy()


def read_evf_frame(source, representation: str) -> Frame:
    """Decode EVF bytes and attach channel semantics from the representation kind."""
    data = read_evf(source)
    channels = _REP_CHANNELS[representation]
    if data.shape[0] != len(channels):
        raise StreamFormatError(
            f"{representation} frames have {len(channels)} channels, file has {data.shape[0]}"
        )
    return Frame(data, channels, SensorGeometry(data.shape[2], data.shape[1]))


def write_trajectory(times, joints) -> bytes:
    """Serialize (T,) times and (T, 21, D) joints as csv text."""
    times = np.asarray(times)
    joints = np.asarray(joints, dtype=np.float64)
    if joints.ndim != 3 or joints.shape[1] != NUM_JOINTS or joints.shape[2] not in (2, 3):
        raise ValueError(f"expected (T, {NUM_JOINTS}, 2|3) joints, got {joints.shape}")
    axes = "uv" if joints.shape[2] == 2 else "xyz"
    header = "t," + ",".join(f"j{j}{a}" for j in range(NUM_JOINTS) for a in axes)
    lines = [header]
    for i in range(times.size):
        coords = ",".join(repr(float(v)) for v in joints[i].ravel())
        lines.append(f"{int(times[i])},{coords}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def read_trajectory(source) -> tuple[np.ndarray, np.ndarray]:
    """Parse trajectory csv into (times uint64, joints (T, 21, D) float64)."""
    text = source.decode("utf-8") if isinstance(source, (bytes, bytearray)) else source
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise StreamFormatError("empty trajectory file")
    n_cols = len(lines[0].split(","))
    if n_cols == 1 + NUM_JOINTS * 2:
        dim = 2
    elif n_cols == 1 + NUM_JOINTS * 3:
        dim = 3
    else:
        raise StreamFormatError(
            f"trajectory header has {n_cols} columns; expected {1 + NUM_JOINTS * 2} (2D) "
            f"or {1 + NUM_JOINTS * 3} (3D)"
        )
    start = 1 if lines[0].lstrip().startswith("t") else 0
    times, joints = [], []
    for lineno in range(start, len(lines)):
        fields = lines[lineno].split(",")
        if len(fields) != n_cols:
            raise StreamFormatError(f"line {lineno + 1}: expected {n_cols} fields, "
                                    f"got {len(fields)}")
        try:
            times.append(int(fields[0]))
            joints.append([float(v) for v in fields[1:]])
        except ValueError:
            raise StreamFormatError(f"line {lineno + 1}: non-numeric field") from None
    return (np.array(times, dtype=np.uint64),
            np.array(joints, dtype=np.float64).reshape(-1, NUM_JOINTS, dim))


@dataclass(frozen=True)
class ManifestEntry:
    """One exported training sample and everything needed to reproduce it."""

    segment_id: str
    source: str                       # stream path, relative to the manifest
    provenance: Optional[dict] = None
    representation: Optional[str] = None
    frame_path: Optional[str] = None
    keypoint_path: Optional[str] = None
    augment: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "id": self.segment_id,
            "source": self.source,
            "provenance": self.provenance,
            "representation": self.representation,
            "frame": self.frame_path,
            "keypoints": self.keypoint_path,
            "augment": self.augment,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ManifestEntry":
        return cls(
            segment_id=d["id"],
            source=d["source"],
            provenance=d.get("provenance"),
            representation=d.get("representation"),
            frame_path=d.get("frame"),
            keypoint_path=d.get("keypoints"),
            augment=d.get("augment"),
        )


def write_manifest(entries, path, seed: Optional[int] = None) -> None:
    """Write a manifest JSON, checking ids are unique and referenced files exist."""
    path = Path(path)
    seen = set()
    for entry in entries:
        if entry.segment_id in seen:
            raise ValueError(f"duplicate segment id {entry.segment_id!r}")
        seen.add(entry.segment_id)
        for ref in (entry.frame_path, entry.keypoint_path, entry.source):
            if ref is not None and not (path.parent / ref).exists():
                raise FileNotFoundError(f"manifest references missing file {ref!r}")
    doc = {
        "version": 1,
        "seed": seed,
        "entries": [e.to_dict() for e in entries],
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_manifest(path) -> list[ManifestEntry]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("version") != 1:
        raise StreamFormatError(f"unsupported manifest version {doc.get('version')!r}")
    return [ManifestEntry.from_dict(d) for d in doc["entries"]]
