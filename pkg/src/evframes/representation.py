"""Event-to-frame representations rendered from a segment in one streaming pass.

Channels come in polarity pairs, order fixed:
  EC     [EC+, EC-]           per-pixel event counts
  LNES   [LNES+, LNES-]       normalized timestamp of the latest event per pixel
  LNEC   [LNEC+, LNEC-]       counts divided by the global maximum count
  LNECS  [LNES+, LNES-, LNEC+, LNEC-]   channel concatenation
  LNEWCS [LNEWCS+, LNEWCS-]   elementwise product LNES * LNEC

Output resolution is reached by integer floor binning of coordinates; counts
are aggregated per bin, never interpolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import SensorGeometry

EC_CHANNELS = ("EC+", "EC-")
LNES_CHANNELS = ("LNES+", "LNES-")
LNEC_CHANNELS = ("LNEC+", "LNEC-")
LNECS_CHANNELS = LNES_CHANNELS + LNEC_CHANNELS
LNEWCS_CHANNELS = ("LNEWCS+", "LNEWCS-")

REPRESENTATIONS = ("ec", "lnes", "lnec", "lnecs", "lnewcs")


@dataclass(frozen=True)
class BinningMap:
    """Floor-scaling map from an input sensor geometry onto a coarser output raster."""

    in_geometry: SensorGeometry
    out_geometry: SensorGeometry

    def __post_init__(self):
        if (self.out_geometry.width > self.in_geometry.width
                or self.out_geometry.height > self.in_geometry.height):
            raise ValueError(
                f"output {self.out_geometry} exceeds input {self.in_geometry}"
            )

    @classmethod
    def identity(cls, geometry: SensorGeometry) -> "BinningMap":
        return cls(geometry, geometry)


@dataclass(frozen=True)
class Frame:
    """Multi-channel float32 raster holding one representation of one segment."""

    data: np.ndarray  # (channels, H, W) float32
    channel_semantics: tuple
    geometry_out: SensorGeometry

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.dtype != np.float32:
            raise ValueError("frame data must be a (C, H, W) float32 array")
        c, h, w = self.data.shape
        if c != len(self.channel_semantics):
            raise ValueError(
                f"{c} channels but {len(self.channel_semantics)} semantic labels"
            )
        if (w, h) != (self.geometry_out.width, self.geometry_out.height):
            raise ValueError(
                f"data is {w}x{h} but output geometry is {self.geometry_out}"
            )

    def channel(self, label: str) -> np.ndarray:
        return self.data[self.channel_semantics.index(label)]

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]


def bin_coordinates(x, y, binning: BinningMap):
    """Map sensor coordinates onto the output raster: floor(x*out_w/in_w), same for y.

    Accepts scalars or arrays; inputs must lie inside the input geometry.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if np.any(x >= binning.in_geometry.width) or np.any(y >= binning.in_geometry.height):
        raise ValueError(f"coordinate outside input geometry {binning.in_geometry}")
    xb = (x.astype(np.int64) * binning.out_geometry.width) // binning.in_geometry.width
    yb = (y.astype(np.int64) * binning.out_geometry.height) // binning.in_geometry.height
    if xb.ndim == 0:
        return int(xb), int(yb)
    return xb, yb


def _binned_flat(segment, binning):
    """Flat per-channel raster index (pol_offset*H*W + y*W + x) for every event."""
    if binning.in_geometry == binning.out_geometry:
        xb = segment.x.astype(np.int64)
        yb = segment.y.astype(np.int64)
    else:
        xb, yb = bin_coordinates(segment.x, segment.y, binning)
    w = binning.out_geometry.width
    h = binning.out_geometry.height
    off = (segment.p < 0).astype(np.int64)  # channel 0: positive, channel 1: negative
    return (off * h + yb) * w + xb


def _out_shape(binning):
    return 2, binning.out_geometry.height, binning.out_geometry.width


def event_count(segment, binning: BinningMap) -> Frame:
    """Per-binned-pixel, per-polarity event counts; sums to the segment size exactly."""
    c, h, w = _out_shape(binning)
    if len(segment) == 0:
        counts = np.zeros((c, h, w), np.float32)
    else:
        flat = _binned_flat(segment, binning)
        counts = np.bincount(flat, minlength=c * h * w).reshape(c, h, w).astype(np.float32)
    return Frame(counts, EC_CHANNELS, binning.out_geometry)


def lnes(segment, binning: BinningMap) -> Frame:
    """Locally normalized time surface: (t_latest_at_pixel - t_min) / (t_max - t_min).

    t_min/t_max are taken over the segment's events, not its nominal bounds.
    Inactive pixels are 0. When every event shares one timestamp (including
    single-event segments) the formula degenerates; all active pixels are then
    "latest" and take value 1.
    """
    c, h, w = _out_shape(binning)
    surface = np.zeros(c * h * w, np.float64)
    if len(segment) > 0:
        flat = _binned_flat(segment, binning)
        active = np.zeros(c * h * w, bool)
        active[flat] = True
        latest = np.zeros(c * h * w, np.uint64)
        latest[flat] = segment.t  # time-sorted input: last write per pixel wins
        t_min = segment.t[0]
        denom = float(segment.t[-1] - t_min)
        if denom == 0.0:
            surface[active] = 1.0
        else:
            surface[active] = (latest[active] - t_min) / denom
    return Frame(surface.reshape(c, h, w).astype(np.float32), LNES_CHANNELS,
                 binning.out_geometry)


def lnec(ec: Frame) -> Frame:
    """Counts divided by the global maximum over both polarity channels.

    A global rather than per-channel maximum keeps relative polarity
    magnitudes meaningful. All-zero input maps to all-zero output.
    """
    if ec.channel_semantics != EC_CHANNELS:
        raise ValueError(f"expected an EC frame, got channels {ec.channel_semantics}")
    peak = float(ec.data.max())
    if peak == 0.0:
        data = np.zeros_like(ec.data)
    else:
        data = (ec.data.astype(np.float64) / peak).astype(np.float32)
    return Frame(data, LNEC_CHANNELS, ec.geometry_out)


def lnecs(segment, binning: BinningMap) -> Frame:
    """Channel concatenation [LNES+, LNES-, LNEC+, LNEC-]."""
    surface = lnes(segment, binning)
    counts = lnec(event_count(segment, binning))
    data = np.concatenate([surface.data, counts.data], axis=0)
    return Frame(data, LNECS_CHANNELS, binning.out_geometry)


def lnewcs(segment, binning: BinningMap) -> Frame:
    """Elementwise product LNES * LNEC per polarity (2 channels)."""
    surface = lnes(segment, binning)
    counts = lnec(event_count(segment, binning))
    return Frame(surface.data * counts.data, LNEWCS_CHANNELS, binning.out_geometry)


def render(segment, kind: str, binning: BinningMap) -> Frame:
    """Render `segment` under the representation named by `kind`."""
    if kind == "ec":
        return event_count(segment, binning)
    if kind == "lnes":
        return lnes(segment, binning)
    if kind == "lnec":
        return lnec(event_count(segment, binning))
    if kind == "lnecs":
        return lnecs(segment, binning)
    if kind == "lnewcs":
        return lnewcs(segment, binning)
    raise ValueError(f"unknown representation {kind!r}; expected one of {REPRESENTATIONS}")
