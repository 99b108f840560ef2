"""Thin bindings dropping evframes exports into standard training loops.

The bridge holds no formula logic: frames come from EVF files or from the
core renderers, so every representation has exactly one implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from evframes import (
    EventStream,
    SensorGeometry,
    read_evf,
    read_manifest,
    read_trajectory,
    render,
    slice_time,
)
from evframes.representation import BinningMap

__all__ = ["SampleRecord", "iter_dataset", "render_segment"]
__version__ = "0.1.0"


@dataclass(frozen=True)
class SampleRecord:
    """One training sample: frame tensor, keypoint label, provenance metadata."""

    frame: np.ndarray               # (C, H, W) float32, bit-exact EVF contents
    keypoints: Optional[np.ndarray]  # (21, 2) or (21, 3) float64, or None
    meta: dict                       # id, provenance, representation, augment spec


def iter_dataset(manifest_path, shuffle_seed: Optional[int] = None) -> Iterator[SampleRecord]:
    """Yield every manifest entry exactly once per pass.

    Order is the manifest order, or a permutation determined entirely by
    `shuffle_seed`. Frames are decoded from the referenced EVF files untouched.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    entries = read_manifest(manifest_path)
    order = np.arange(len(entries))
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(len(entries))
    for i in order:
        entry = entries[int(i)]
        frame_file = base / entry.frame_path
        if not frame_file.exists():
            raise FileNotFoundError(f"manifest entry {entry.segment_id!r} references "
                                    f"missing frame {entry.frame_path!r}")
        frame = read_evf(frame_file.read_bytes())
        keypoints = None
        if entry.keypoint_path is not None:
            label_file = base / entry.keypoint_path
            if not label_file.exists():
                raise FileNotFoundError(f"manifest entry {entry.segment_id!r} references "
                                        f"missing labels {entry.keypoint_path!r}")
            _, joints = read_trajectory(label_file.read_bytes())
            keypoints = joints[0]
        yield SampleRecord(
            frame=frame,
            keypoints=keypoints,
            meta={
                "id": entry.segment_id,
                "source": entry.source,
                "provenance": entry.provenance,
                "representation": entry.representation,
                "augment": entry.augment,
            },
        )


def render_segment(events, kind: str, size,
                   sensor_size=None) -> np.ndarray:
    """Render an (N, 4) array of (t, x, y, p) rows through the core renderers.

    `size` is the output raster (width, height); `sensor_size` the input
    geometry when events should be binned down from a larger sensor (defaults
    to `size`). Output is bit-identical to the core library for the same
    events.
    """
    events = np.asarray(events)
    if events.ndim != 2 or events.shape[1] != 4:
        raise ValueError(f"expected an (N, 4) array of (t, x, y, p) rows, "
                         f"got shape {events.shape}")
    out_geom = SensorGeometry(int(size[0]), int(size[1]))
    in_geom = (out_geom if sensor_size is None
               else SensorGeometry(int(sensor_size[0]), int(sensor_size[1])))
    if events.size:
        # reject rows the narrowing casts below would silently wrap
        if events[:, 0].min() < 0:
            raise ValueError("negative timestamp in events array")
        if (events[:, 1].max() >= in_geom.width or events[:, 1].min() < 0
                or events[:, 2].max() >= in_geom.height or events[:, 2].min() < 0):
            raise ValueError(f"event coordinate outside sensor {in_geom}")
    stream = EventStream.from_arrays(
        events[:, 0].astype(np.uint64), events[:, 1].astype(np.uint16),
        events[:, 2].astype(np.uint16), events[:, 3].astype(np.int8),
        in_geom, sort=True,
    )
    end = int(stream.t[-1]) + 1 if len(stream) else 1
    segment = slice_time(stream, 0, end)
    return render(segment, kind, BinningMap(in_geom, out_geom)).data
