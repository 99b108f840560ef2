"""Event data model: single events, sensor geometry, immutable event streams."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

import numpy as np

MAX_TIMESTAMP = int(np.iinfo(np.uint64).max)


class StreamFormatError(ValueError):
    """Malformed stream input: bad record, bad header, truncated data."""


class OutOfBoundsError(ValueError):
    """Event coordinate outside the declared sensor geometry."""


class Polarity(IntEnum):
    POS = 1
    NEG = -1


class Event(NamedTuple):
    t: int  # microseconds
    x: int
    y: int
    p: Polarity


@dataclass(frozen=True)
class SensorGeometry:
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(
                f"sensor geometry must be positive, got {self.width}x{self.height}"
            )

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def __str__(self):
        return f"{self.width}x{self.height}"


def _check_bounds(x, y, geometry):
    bad = np.flatnonzero((x >= geometry.width) | (y >= geometry.height))
    if bad.size:
        i = int(bad[0])
        raise OutOfBoundsError(
            f"event {i}: coordinate ({int(x[i])}, {int(y[i])}) outside {geometry}"
        )


class EventStream:
    """Immutable, time-sorted sequence of events on a fixed sensor geometry.

    Timestamps are integer microseconds (uint64). Arrays are copied at
    construction and frozen, so streams are safe to share across threads;
    downstream code may assume non-decreasing timestamps and in-bounds
    coordinates.
    """

    __slots__ = ("t", "x", "y", "p", "geometry")

    def __init__(self, t, x, y, p, geometry: SensorGeometry):
        t = np.array(t, dtype=np.uint64, copy=True)
        x = np.array(x, dtype=np.uint16, copy=True)
        y = np.array(y, dtype=np.uint16, copy=True)
        p = np.array(p, dtype=np.int8, copy=True)
        if t.ndim != 1 or not (t.shape == x.shape == y.shape == p.shape):
            raise ValueError("t, x, y, p must be 1-d arrays of equal length")
        if t.size and np.any(t[1:] < t[:-1]):
            raise ValueError(
                "timestamps must be non-decreasing; use EventStream.from_arrays(..., sort=True)"
            )
        _check_bounds(x, y, geometry)
        if p.size:
            bad = np.flatnonzero((p != 1) & (p != -1))
            if bad.size:
                i = int(bad[0])
                raise ValueError(f"event {i}: invalid polarity {int(p[i])}, expected 1 or -1")
        for a in (t, x, y, p):
            a.flags.writeable = False
        self.t = t
        self.x = x
        self.y = y
        self.p = p
        self.geometry = geometry

    @classmethod
    def from_arrays(cls, t, x, y, p, geometry: SensorGeometry, sort: bool = False):
        """Build a stream, optionally stable-sorting by timestamp first."""
        if sort:
            t = np.asarray(t, dtype=np.uint64)
            order = np.argsort(t, kind="stable")
            t = t[order]
            x = np.asarray(x, dtype=np.uint16)[order]
            y = np.asarray(y, dtype=np.uint16)[order]
            p = np.asarray(p, dtype=np.int8)[order]
        return cls(t, x, y, p, geometry)

    @classmethod
    def empty(cls, geometry: SensorGeometry):
        z = np.empty(0)
        return cls(z, z, z, z, geometry)

    def __len__(self):
        return self.t.size

    def __getitem__(self, i) -> Event:
        return Event(int(self.t[i]), int(self.x[i]), int(self.y[i]), Polarity(int(self.p[i])))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.p, other.p)
        )

    def __repr__(self):
        span = f", t=[{self.t[0]}, {self.t[-1]}]" if len(self) else ""
        return f"EventStream({len(self)} events, {self.geometry}{span})"
