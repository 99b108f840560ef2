"""Windowing of event streams under three standards: fixed event count
(speed adaptive), fixed time length, and fixed active-pixel count, plus the
inference-time query window and ad-hoc time slices.

Batch segmentation is non-overlapping; overlapping queries go through
window_before. Segments are zero-copy views into the parent stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from .events import EventStream, SensorGeometry


class TailPolicy(Enum):
    DROP = "drop"
    EMIT_PARTIAL = "emit_partial"


@dataclass(frozen=True)
class ByCount:
    n: int


@dataclass(frozen=True)
class ByTime:
    dt: int  # microseconds


@dataclass(frozen=True)
class ByActivePixels:
    k: int
    truncated: bool = False  # closed at the max_events cap before reaching k


@dataclass(frozen=True)
class Window:
    n: int


Provenance = Union[ByCount, ByTime, ByActivePixels, Window]


@dataclass(frozen=True)
class Segment:
    """A contiguous window of an event stream with nominal [t_start, t_end) bounds.

    The nominal bounds are not the event min/max: how they are determined is
    part of each segmentation standard. Arrays are read-only views.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    t_start: int
    t_end: int
    geometry: SensorGeometry
    provenance: Optional[Provenance] = None

    def __post_init__(self):
        if self.t_start > self.t_end:
            raise ValueError(f"segment bounds reversed: [{self.t_start}, {self.t_end})")
        # events arrive time-sorted, so the endpoints bound every event
        if self.t.size and not (self.t_start <= int(self.t[0])
                                and int(self.t[-1]) < self.t_end):
            raise ValueError(
                f"events [{int(self.t[0])}, {int(self.t[-1])}] escape nominal bounds "
                f"[{self.t_start}, {self.t_end})"
            )

    def __len__(self):
        return self.t.size

    @property
    def is_empty(self) -> bool:
        return self.t.size == 0

    def active_pixel_count(self) -> int:
        """Distinct (x, y) coordinates touched by any event, polarity ignored."""
        if self.t.size == 0:
            return 0
        flat = self.y.astype(np.int64) * self.geometry.width + self.x
        return int(np.unique(flat).size)


def _view(stream: EventStream, lo: int, hi: int, t_start: int, t_end: int,
          provenance) -> Segment:
    return Segment(stream.t[lo:hi], stream.x[lo:hi], stream.y[lo:hi], stream.p[lo:hi],
                   t_start, t_end, stream.geometry, provenance)


def _count_bounds(stream, lo, hi):
    return int(stream.t[lo]), int(stream.t[hi - 1]) + 1


def slice_time(stream: EventStream, t0: int, t1: int) -> Segment:
    """All events with t0 <= t < t1 as a zero-copy view with bounds [t0, t1)."""
    if t0 > t1:
        raise ValueError(f"slice bounds reversed: [{t0}, {t1})")
    lo = int(np.searchsorted(stream.t, np.uint64(t0), side="left"))
    hi = int(np.searchsorted(stream.t, np.uint64(t1), side="left"))
    return _view(stream, lo, hi, t0, t1, None)


def segment_by_count(stream: EventStream, n: int,
                     tail: TailPolicy = TailPolicy.DROP) -> list[Segment]:
    """Consecutive non-overlapping segments of exactly n events each.

    The speed-adaptive standard: fast motion emits more events per unit time,
    so fixed-count windows cover a roughly speed-invariant motion range. A
    final short segment is emitted only under TailPolicy.EMIT_PARTIAL. Nominal
    bounds are [first event t, last event t + 1us).
    """
    if n < 1:
        raise ValueError("segment event count must be >= 1")
    total = len(stream)
    segments = []
    for lo in range(0, (total // n) * n, n):
        t0, t1 = _count_bounds(stream, lo, lo + n)
        segments.append(_view(stream, lo, lo + n, t0, t1, ByCount(n)))
    rem = total % n
    if rem and tail is TailPolicy.EMIT_PARTIAL:
        t0, t1 = _count_bounds(stream, total - rem, total)
        segments.append(_view(stream, total - rem, total, t0, t1, ByCount(n)))
    return segments


def segment_by_time(stream: EventStream, dt: int,
                    tail: TailPolicy = TailPolicy.DROP) -> list[Segment]:
    """Fixed-duration windows [t_first + i*dt, t_first + (i+1)*dt) tiling the stream span.

    Empty windows are emitted (they render to zero frames) so frame sequences
    keep uniform temporal spacing. The trailing window that extends past the
    last event is governed by `tail`; under EMIT_PARTIAL its nominal end is
    clipped to the span end.
    """
    if dt < 1:
        raise ValueError("window duration must be >= 1 microsecond")
    if len(stream) == 0:
        return []
    t_first = int(stream.t[0])
    span_end = int(stream.t[-1]) + 1
    n_windows = math.ceil((span_end - t_first) / dt)
    edges = t_first + dt * np.arange(n_windows + 1, dtype=np.int64)
    idx = np.searchsorted(stream.t, edges.astype(np.uint64), side="left")
    segments = []
    for w in range(n_windows):
        w_start, w_end = int(edges[w]), int(edges[w + 1])
        if w_end > span_end:  # trailing partial window
            if tail is TailPolicy.DROP:
                break
            w_end = span_end
        segments.append(_view(stream, int(idx[w]), int(idx[w + 1]), w_start, w_end, ByTime(dt)))
    return segments


def segment_by_active_pixels(stream: EventStream, k: int, max_events: int,
                             tail: TailPolicy = TailPolicy.DROP) -> list[Segment]:
    """Segments closed as soon as k distinct (x, y) pixels have fired.

    Polarity is ignored when counting pixels. Each segment is the shortest
    prefix of the remaining stream reaching k distinct coordinates; if
    max_events are consumed first the segment is closed there and flagged
    truncated (a static scene would otherwise never close a segment).
    """
    if k < 1:
        raise ValueError("active pixel count must be >= 1")
    if max_events < 1:
        raise ValueError("max_events must be >= 1")
    flat = stream.y.astype(np.int64) * stream.geometry.width + stream.x
    total = len(stream)
    segments = []
    lo = 0
    while lo < total:
        chunk = flat[lo:lo + max_events]
        uniq, first = np.unique(chunk, return_index=True)
        if uniq.size >= k:
            # index of the event where the k-th distinct pixel first appears
            end_rel = int(np.partition(first, k - 1)[k - 1])
            hi = lo + end_rel + 1
            t0, t1 = _count_bounds(stream, lo, hi)
            segments.append(_view(stream, lo, hi, t0, t1, ByActivePixels(k)))
        elif chunk.size == max_events:
            hi = lo + max_events
            t0, t1 = _count_bounds(stream, lo, hi)
            segments.append(_view(stream, lo, hi, t0, t1, ByActivePixels(k, truncated=True)))
        else:  # stream exhausted below both k and the cap
            if tail is TailPolicy.EMIT_PARTIAL:
                t0, t1 = _count_bounds(stream, lo, total)
                segments.append(_view(stream, lo, total, t0, t1, ByActivePixels(k)))
            break
        lo = hi
    return segments


def window_before(stream: EventStream, t_query: int, n: int) -> Segment:
    """The last min(n, available) events with t <= t_query.

    The inference-time query form of the fixed-count standard; consecutive
    queries may overlap. Empty if nothing precedes t_query.
    """
    if n < 1:
        raise ValueError("window event count must be >= 1")
    hi = int(np.searchsorted(stream.t, np.uint64(t_query), side="right"))
    lo = max(0, hi - n)
    if hi == lo:
        return _view(stream, lo, hi, t_query, t_query, Window(n))
    return _view(stream, lo, hi, int(stream.t[lo]), int(t_query) + 1, Window(n))


def provenance_to_dict(provenance: Optional[Provenance]) -> Optional[dict]:
    if provenance is None:
        return None
    if isinstance(provenance, ByCount):
        return {"kind": "count", "n": provenance.n}
    if isinstance(provenance, ByTime):
        return {"kind": "time", "dt_us": provenance.dt}
    if isinstance(provenance, ByActivePixels):
        return {"kind": "pixels", "k": provenance.k, "truncated": provenance.truncated}
    if isinstance(provenance, Window):
        return {"kind": "window", "n": provenance.n}
    raise TypeError(f"unknown provenance {provenance!r}")


def provenance_from_dict(d: Optional[dict]) -> Optional[Provenance]:
    if d is None:
        return None
    kind = d["kind"]
    if kind == "count":
        return ByCount(int(d["n"]))
    if kind == "time":
        return ByTime(int(d["dt_us"]))
    if kind == "pixels":
        return ByActivePixels(int(d["k"]), bool(d.get("truncated", False)))
    if kind == "window":
        return Window(int(d["n"]))
    raise ValueError(f"unknown provenance kind {kind!r}")
