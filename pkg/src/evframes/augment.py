"""Training-data augmentation: seeded noise suppression, view transforms with
label-consistent keypoint maps, and variable-length segment windows that make
slow-motion recordings stand in for fast ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .events import SensorGeometry
from .keypoints import KeypointSet
from .representation import EC_CHANNELS, Frame
from .segmentation import Segment, window_before

RIGHT_ANGLES = (0.0, 90.0, 180.0, 270.0)


@dataclass(frozen=True)
class AugmentSpec:
    """One sampled augmentation: all randomness is resolved, application is pure.

    rotation_deg multiples of 90 are exact pixel permutations; other angles
    fall back to nearest-neighbor resampling. crop is (x0, y0, w, h) in output
    pixels, applied after rotation. filter_size must be odd.
    """

    rotation_deg: float = 0.0
    crop: Optional[tuple] = None
    length_multiplier: float = 1.0
    noise_threshold: float = 0.0
    filter_size: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.length_multiplier <= 0:
            raise ValueError("length_multiplier must be positive")
        if self.noise_threshold < 0:
            raise ValueError("noise_threshold must be non-negative")
        if self.filter_size < 1 or self.filter_size % 2 == 0:
            raise ValueError(f"filter_size must be odd and positive, got {self.filter_size}")
        if self.crop is not None and len(self.crop) != 4:
            raise ValueError("crop must be (x0, y0, w, h)")

    def to_dict(self) -> dict:
        return {
            "rotation_deg": self.rotation_deg,
            "crop": list(self.crop) if self.crop is not None else None,
            "length_multiplier": self.length_multiplier,
            "noise_threshold": self.noise_threshold,
            "filter_size": self.filter_size,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentSpec":
        crop = d.get("crop")
        return cls(
            rotation_deg=float(d.get("rotation_deg", 0.0)),
            crop=tuple(int(v) for v in crop) if crop is not None else None,
            length_multiplier=float(d.get("length_multiplier", 1.0)),
            noise_threshold=float(d.get("noise_threshold", 0.0)),
            filter_size=int(d.get("filter_size", 3)),
            seed=int(d.get("seed", 0)),
        )


@dataclass(frozen=True)
class AugmentRanges:
    """Per-field sampling distributions for sample_augment.

    Point ranges (lo == hi, single choice) pin a field. noise_threshold_range
    defaults to counts in [0, 2]; crop_frac_range is the crop side length as a
    fraction of the frame, None disables cropping.
    """

    rotation_choices: Sequence[float] = RIGHT_ANGLES
    rotation_jitter_deg: float = 0.0
    crop_frac_range: Optional[tuple] = None
    length_multiplier_range: tuple = (1.0, 1.0)
    noise_threshold_range: tuple = (0.0, 2.0)
    filter_size_choices: Sequence[int] = (3,)

    def __post_init__(self):
        if len(self.rotation_choices) == 0 or len(self.filter_size_choices) == 0:
            raise ValueError("empty choice list")
        for name in ("length_multiplier_range", "noise_threshold_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: ({lo}, {hi})")
        if self.crop_frac_range is not None:
            lo, hi = self.crop_frac_range
            if not (0 < lo <= hi <= 1):
                raise ValueError(f"crop_frac_range must lie in (0, 1]: ({lo}, {hi})")


def _uniform(rng, lo, hi):
    return lo if lo == hi else float(rng.uniform(lo, hi))


def sample_augment(ranges: AugmentRanges, seed: int,
                   frame_geometry: Optional[SensorGeometry] = None) -> AugmentSpec:
    """Draw one AugmentSpec; identical (ranges, seed) always yields the same spec.

    The noise threshold is drawn per sample, which is what randomizes noise
    suppression across the training set. Crops need `frame_geometry` to place
    the rectangle.
    """
    rng = np.random.default_rng(seed)
    rotation = float(rng.choice(np.asarray(ranges.rotation_choices, dtype=np.float64)))
    if ranges.rotation_jitter_deg:
        rotation += float(rng.uniform(-ranges.rotation_jitter_deg, ranges.rotation_jitter_deg))
    crop = None
    if ranges.crop_frac_range is not None:
        if frame_geometry is None:
            raise ValueError("crop sampling requires frame_geometry")
        frac = _uniform(rng, *ranges.crop_frac_range)
        # rotation by 90/270 swaps the frame sides before the crop applies
        gw, gh = frame_geometry.width, frame_geometry.height
        if rotation % 180 == 90:
            gw, gh = gh, gw
        w = max(1, int(round(gw * frac)))
        h = max(1, int(round(gh * frac)))
        x0 = int(rng.integers(0, gw - w + 1))
        y0 = int(rng.integers(0, gh - h + 1))
        crop = (x0, y0, w, h)
    return AugmentSpec(
        rotation_deg=rotation,
        crop=crop,
        length_multiplier=_uniform(rng, *ranges.length_multiplier_range),
        noise_threshold=_uniform(rng, *ranges.noise_threshold_range),
        filter_size=int(rng.choice(np.asarray(ranges.filter_size_choices, dtype=np.int64))),
        seed=seed,
    )


def noise_mask(ec: Frame, filter_size: int, threshold: float) -> np.ndarray:
    """Boolean keep-mask (2, H, W): smoothed count strictly above the threshold.

    The count raster is convolved per polarity with a filter_size x filter_size
    mean kernel under zero padding (off-sensor area is event-free).
    """
    if filter_size < 1 or filter_size % 2 == 0:
        raise ValueError(f"filter size must be odd and positive, got {filter_size}")
    if ec.channel_semantics != EC_CHANNELS:
        raise ValueError(f"mask needs an EC frame, got channels {ec.channel_semantics}")
    smoothed = ndimage.uniform_filter(
        ec.data.astype(np.float64), size=(1, filter_size, filter_size),
        mode="constant", cval=0.0,
    )
    return smoothed > threshold


def _polarity_channel(label: str) -> int:
    if label.endswith("+"):
        return 0
    if label.endswith("-"):
        return 1
    raise ValueError(f"channel label {label!r} has no polarity suffix")


def suppress_noise(frames, ec: Frame, filter_size: int, threshold: float):
    """Zero out low-activity pixels in one or more frames.

    The mask is computed once from the EC frame and applied to the matching
    polarity channel of every supplied frame, so all representations of one
    segment stay consistent. Accepts a single Frame or a sequence; returns the
    same shape of argument.
    """
    single = isinstance(frames, Frame)
    frame_list = [frames] if single else list(frames)
    mask = noise_mask(ec, filter_size, threshold)
    out = []
    for frame in frame_list:
        if frame.data.shape[1:] != ec.data.shape[1:]:
            raise ValueError(
                f"frame raster {frame.data.shape[1:]} does not match EC {ec.data.shape[1:]}"
            )
        data = frame.data.copy()
        for c, label in enumerate(frame.channel_semantics):
            data[c] *= mask[_polarity_channel(label)]
        out.append(Frame(data, frame.channel_semantics, frame.geometry_out))
    return out[0] if single else out


def rotate_keypoints(kps: KeypointSet, rotation_deg: float,
                     geometry: SensorGeometry) -> tuple[KeypointSet, SensorGeometry]:
    """Map 2D keypoints under the same rotation applied to a frame of `geometry`."""
    if not kps.is_2d:
        raise ValueError("geometric transforms apply to 2D keypoints only")
    w, h = geometry.width, geometry.height
    u, v = kps.joints[:, 0], kps.joints[:, 1]
    k = (round(rotation_deg / 90.0)) % 4 if rotation_deg % 90 == 0 else None
    if k == 0:
        return kps, geometry
    if k == 1:  # (u, v) -> (H-1-v, u), frame becomes h x w
        joints = np.stack([h - 1 - v, u], axis=1)
        return KeypointSet(joints), SensorGeometry(h, w)
    if k == 2:
        joints = np.stack([w - 1 - u, h - 1 - v], axis=1)
        return KeypointSet(joints), geometry
    if k == 3:
        joints = np.stack([v, w - 1 - u], axis=1)
        return KeypointSet(joints), SensorGeometry(h, w)
    # small-angle rotation about the frame center, same raster size
    theta = np.deg2rad(rotation_deg)
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    cos, sin = np.cos(theta), np.sin(theta)
    du, dv = u - cx, v - cy
    joints = np.stack([cx + cos * du - sin * dv, cy + sin * du + cos * dv], axis=1)
    return KeypointSet(joints), geometry


def _rotate_frame_data(data: np.ndarray, rotation_deg: float) -> np.ndarray:
    k = (round(rotation_deg / 90.0)) % 4 if rotation_deg % 90 == 0 else None
    if k == 0:
        return data.copy()
    if k is not None:
        # (x, y) -> 90 deg: (H-1-y, x); pure permutation, bit-exact
        return np.ascontiguousarray(np.rot90(data, k=-k, axes=(1, 2)))
    theta = np.deg2rad(rotation_deg)
    h, w = data.shape[1:]
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    cos, sin = np.cos(theta), np.sin(theta)
    # inverse map for ndimage in (row, col) order; nearest-neighbor so counts
    # stay unfractured
    matrix = np.array([[cos, -sin], [sin, cos]])
    offset = np.array([cy, cx]) - matrix @ np.array([cy, cx])
    out = np.empty_like(data)
    for c in range(data.shape[0]):
        out[c] = ndimage.affine_transform(
            data[c], matrix, offset=offset, order=0, mode="constant", cval=0.0,
        )
    return out


def apply_geometric(frame: Frame, kps: KeypointSet,
                    spec: AugmentSpec) -> tuple[Frame, KeypointSet]:
    """Rotate then crop a frame, transforming the keypoints by the same map.

    Right-angle rotations are exact pixel permutations, so rendering then
    transforming equals transforming the events then rendering; keypoints
    follow the identical coordinate map.
    """
    data = _rotate_frame_data(frame.data, spec.rotation_deg)
    kps_out, geometry = rotate_keypoints(kps, spec.rotation_deg, frame.geometry_out)
    if spec.crop is not None:
        x0, y0, w, h = spec.crop
        if not (0 <= x0 and 0 <= y0 and w >= 1 and h >= 1
                and x0 + w <= geometry.width and y0 + h <= geometry.height):
            raise ValueError(f"crop {spec.crop} outside frame {geometry}")
        data = np.ascontiguousarray(data[:, y0:y0 + h, x0:x0 + w])
        kps_out = KeypointSet(kps_out.joints - np.array([x0, y0], dtype=np.float64))
        geometry = SensorGeometry(w, h)
    return Frame(data, frame.channel_semantics, geometry), kps_out


def transform_keypoints(kps: KeypointSet, spec: AugmentSpec,
                        geometry: SensorGeometry) -> KeypointSet:
    """The keypoint half of apply_geometric, for transforming labels alone."""
    kps_out, geom = rotate_keypoints(kps, spec.rotation_deg, geometry)
    if spec.crop is not None:
        x0, y0, w, h = spec.crop
        if x0 + w > geom.width or y0 + h > geom.height:
            raise ValueError(f"crop {spec.crop} outside frame {geom}")
        kps_out = KeypointSet(kps_out.joints - np.array([x0, y0], dtype=np.float64))
    return kps_out


def variable_length_segment(stream, anchor_t: int, base_n: int,
                            multiplier: float) -> Segment:
    """Window of round(base_n * multiplier) events ending at anchor_t.

    Longer slow-motion windows stand in for fast motion: event count tracks
    distance traveled, not elapsed time. The matching label is the pose at
    anchor_t, the window's latest time. Clamps to the available events.
    """
    if multiplier <= 0:
        raise ValueError("multiplier must be positive")
    n = max(1, round(base_n * multiplier))
    return window_before(stream, anchor_t, n)
