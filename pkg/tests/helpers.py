"""Shared fixtures-in-spirit: seeded random streams and event-domain transforms."""

import numpy as np

from evframes import EventStream, SensorGeometry


def random_stream(seed, n, width=64, height=48, max_t=1_000_000):
    rng = np.random.default_rng(seed)
    geom = SensorGeometry(width, height)
    t = np.sort(rng.integers(0, max_t, n)).astype(np.uint64)
    x = rng.integers(0, width, n).astype(np.uint16)
    y = rng.integers(0, height, n).astype(np.uint16)
    p = (rng.integers(0, 2, n) * 2 - 1).astype(np.int8)
    return EventStream(t, x, y, p, geom)


def stream_from_tuples(rows, width=64, height=48):
    """rows: iterable of (t, x, y, p) kept in the given order (must be sorted)."""
    rows = list(rows)
    t = np.array([r[0] for r in rows], np.uint64)
    x = np.array([r[1] for r in rows], np.uint16)
    y = np.array([r[2] for r in rows], np.uint16)
    p = np.array([r[3] for r in rows], np.int8)
    return EventStream(t, x, y, p, SensorGeometry(width, height))


def rotate_events_90cw(stream, k):
    """Event-domain right-angle rotation matching the frame map (x,y)->(H-1-y,x)."""
    x = stream.x.astype(np.int64)
    y = stream.y.astype(np.int64)
    w, h = stream.geometry.width, stream.geometry.height
    for _ in range(k % 4):
        x, y = h - 1 - y, x
        w, h = h, w
    return EventStream(stream.t, x.astype(np.uint16), y.astype(np.uint16), stream.p,
                       SensorGeometry(w, h))


def crop_events(stream, x0, y0, w, h):
    """Keep events inside the rectangle and shift them to its origin."""
    keep = ((stream.x >= x0) & (stream.x < x0 + w)
            & (stream.y >= y0) & (stream.y < y0 + h))
    return EventStream(stream.t[keep], stream.x[keep] - x0, stream.y[keep] - y0,
                       stream.p[keep], SensorGeometry(w, h))
