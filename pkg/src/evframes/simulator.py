"""Synthetic event streams with ground-truth keypoint trajectories.

Idealized contrast-threshold camera model: each pixel accumulates log-intensity
change along the scene and emits one event per crossing of a multiple of the
threshold. Signal events are a pure function of the scene; background noise is
a seeded homogeneous per-pixel process. Because events track brightness change,
a moving shape produces events in proportion to distance traveled, not elapsed
time - the property the speed-adaptive segmentation standard relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .events import EventStream, SensorGeometry
from .keypoints import MIDDLE_MCP, NUM_JOINTS, WRIST, KeypointSet


@dataclass(frozen=True)
class StaticPath:
    pos: tuple

    def position(self, s):
        s = np.asarray(s, dtype=np.float64)
        out = np.empty(s.shape + (2,))
        out[..., 0] = self.pos[0]
        out[..., 1] = self.pos[1]
        return out


@dataclass(frozen=True)
class LinearPath:
    start: tuple
    stop: tuple

    def position(self, s):
        s = np.asarray(s, dtype=np.float64)[..., None]
        a = np.asarray(self.start, dtype=np.float64)
        b = np.asarray(self.stop, dtype=np.float64)
        return a + (b - a) * s


@dataclass(frozen=True)
class CircularPath:
    center: tuple
    radius: float
    revolutions: float = 1.0
    phase_deg: float = 0.0

    def position(self, s):
        s = np.asarray(s, dtype=np.float64)
        theta = np.deg2rad(self.phase_deg) + 2.0 * np.pi * self.revolutions * s
        out = np.empty(s.shape + (2,))
        out[..., 0] = self.center[0] + self.radius * np.cos(theta)
        out[..., 1] = self.center[1] + self.radius * np.sin(theta)
        return out


@dataclass(frozen=True)
class Shape:
    """One moving scene element.

    kind "disc": size is the radius, the path drives the center.
    kind "bar": size is the half-width, `length` the bar length; the path
        drives the midpoint and the orientation sweeps linearly in time.
    kind "chain": rigid links of `length`, each link's absolute angle sweeping
        linearly; the path drives the base joint. joint_map assigns chain
        joints to 21-slot keypoint indices.
    """

    kind: str
    contrast: float
    path: object
    size: float
    length: float = 0.0
    angles_deg: tuple = ()  # per link: (start_deg, sweep_deg)
    joint_map: tuple = ()   # ((slot, joint_index), ...)

    def __post_init__(self):
        if self.kind not in ("disc", "bar", "chain"):
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.size <= 0:
            raise ValueError("shape size must be positive")
        if self.kind == "bar" and len(self.angles_deg) != 1:
            raise ValueError("bar takes exactly one (start, sweep) angle pair")
        if self.kind == "chain" and len(self.angles_deg) == 0:
            raise ValueError("chain needs at least one link angle pair")

    def joints_at(self, s: float) -> np.ndarray:
        """Skeleton points at normalized time s: disc center, bar endpoints, chain joints."""
        base = self.path.position(s)
        if self.kind == "disc":
            return base[None, :]
        angles = np.deg2rad(np.array([a0 + sweep * s for a0, sweep in self.angles_deg]))
        if self.kind == "bar":
            half = 0.5 * self.length * np.array([np.cos(angles[0]), np.sin(angles[0])])
            return np.stack([base - half, base + half])
        steps = self.length * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        return np.concatenate([base[None, :], base + np.cumsum(steps, axis=0)])

    def keypoints_at(self, s: float) -> KeypointSet:
        """Project the skeleton onto the 21-slot hand layout.

        disc: wrist slot at the center, middle-MCP slot on the boundary so the
        palm length equals the radius. bar: wrist/middle-MCP at the endpoints,
        rest at the midpoint. chain: joint_map entries placed, the rest at the
        base joint.
        """
        pts = self.joints_at(s)
        joints = np.repeat(pts[0][None, :], NUM_JOINTS, axis=0)
        if self.kind == "disc":
            joints[MIDDLE_MCP] = pts[0] + np.array([self.size, 0.0])
        elif self.kind == "bar":
            joints[:] = 0.5 * (pts[0] + pts[1])
            joints[WRIST] = pts[0]
            joints[MIDDLE_MCP] = pts[1]
        else:
            for slot, joint in self.joint_map:
                joints[slot] = pts[joint]
        return KeypointSet(joints)


@dataclass(frozen=True)
class SceneConfig:
    geometry: SensorGeometry
    shapes: tuple
    contrast_threshold: float
    duration_us: int
    noise_rate: float = 0.0  # events / pixel / second
    seed: int = 0
    background: float = 1.0
    noise_mode: str = "uniform"  # uniform | strobe (periodic bursts, AC flicker)
    strobe_hz: float = 100.0
    strobe_duty: float = 0.1
    max_step_px: float = 0.25
    max_steps: int = 50000
    trajectory_samples: int = 201

    def __post_init__(self):
        if self.duration_us <= 0:
            raise ValueError("scene duration must be positive")
        if self.contrast_threshold <= 0:
            raise ValueError("contrast threshold must be positive")
        if self.noise_rate < 0:
            raise ValueError("noise rate must be non-negative")
        if self.noise_mode not in ("uniform", "strobe"):
            raise ValueError(f"unknown noise mode {self.noise_mode!r}")


@dataclass(frozen=True)
class Trajectory:
    """Ground-truth keypoint track at a fixed sampling rate over [0, duration]."""

    times: np.ndarray   # uint64 microseconds, strictly increasing
    joints: np.ndarray  # (T, 21, 2) float64 pixel coordinates

    def __post_init__(self):
        if self.times.ndim != 1 or self.joints.shape[:1] != self.times.shape:
            raise ValueError("times and joints disagree in length")
        if self.times.size < 2 or np.any(np.diff(self.times.astype(np.int64)) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return self.times.size

    def keypoints_at(self, i: int) -> KeypointSet:
        return KeypointSet(self.joints[i])

    def interpolate(self, t: int) -> KeypointSet:
        """Linear interpolation of every joint coordinate at time t."""
        ts = self.times.astype(np.float64)
        tq = float(t)
        flat = self.joints.reshape(len(self), -1)
        out = np.array([np.interp(tq, ts, flat[:, j]) for j in range(flat.shape[1])])
        return KeypointSet(out.reshape(NUM_JOINTS, 2))


def _coverage(shape: Shape, s: float, X, Y):
    """Pixel coverage in [0, 1] with a ~1px soft edge (keeps event counts smooth)."""
    pts = shape.joints_at(s)
    if shape.kind == "disc":
        d = np.hypot(X - pts[0, 0], Y - pts[0, 1])
        return np.clip(0.5 + (shape.size - d), 0.0, 1.0)
    cov = np.zeros_like(X)
    half_w = shape.size
    for a, b in zip(pts[:-1], pts[1:]):
        ab = b - a
        denom = float(ab @ ab)
        if denom == 0.0:
            d = np.hypot(X - a[0], Y - a[1])
        else:
            tt = np.clip(((X - a[0]) * ab[0] + (Y - a[1]) * ab[1]) / denom, 0.0, 1.0)
            d = np.hypot(X - (a[0] + tt * ab[0]), Y - (a[1] + tt * ab[1]))
        cov = np.maximum(cov, np.clip(0.5 + (half_w - d), 0.0, 1.0))
    return cov


def _log_intensity(scene: SceneConfig, s: float, X, Y):
    intensity = np.full(X.shape, scene.background, dtype=np.float64)
    for shape in scene.shapes:
        intensity += shape.contrast * _coverage(shape, s, X, Y)
    return np.log(np.maximum(intensity, 1e-6))


def _choose_steps(scene: SceneConfig) -> int:
    """Pick the sampling density from geometry traveled, not elapsed time.

    Sampling the scene so nothing moves more than max_step_px per step makes
    the emitted event count a function of the path, so equal paths at
    different speeds yield near-identical streams.
    """
    probe = np.linspace(0.0, 1.0, 257)
    travel = 0.0
    for shape in scene.shapes:
        pts = np.stack([shape.joints_at(s) for s in probe])  # (S, J, 2)
        step = np.linalg.norm(np.diff(pts, axis=0), axis=2).max(axis=1)
        travel = max(travel, float(step.sum()))
    n = int(math.ceil(travel / scene.max_step_px)) + 1
    return int(np.clip(n, 2, scene.max_steps))


def simulate(scene: SceneConfig) -> tuple[EventStream, Trajectory]:
    """Render a scene into a validated event stream plus its keypoint track.

    Deterministic: identical SceneConfig (seed included) gives a bit-identical
    stream. Signal events carry sub-step interpolated timestamps; noise events
    (noise_rate > 0) are merged in time order.
    """
    geom = scene.geometry
    X, Y = np.meshgrid(np.arange(geom.width, dtype=np.float64),
                       np.arange(geom.height, dtype=np.float64))
    n_steps = _choose_steps(scene)
    times = np.linspace(0.0, float(scene.duration_us), n_steps + 1)

    mem = _log_intensity(scene, 0.0, X, Y)
    thresh = scene.contrast_threshold
    chunks_t, chunks_x, chunks_y, chunks_p = [], [], [], []
    for k in range(1, n_steps + 1):
        level = _log_intensity(scene, times[k] / float(scene.duration_us), X, Y)
        crossings = np.trunc((level - mem) / thresh).astype(np.int64).ravel()
        idx = np.flatnonzero(crossings)
        if idx.size == 0:
            continue
        counts = crossings[idx]
        mem.ravel()[idx] += counts * thresh
        mags = np.abs(counts)
        rep = np.repeat(idx, mags)
        total = int(mags.sum())
        starts = np.concatenate([[0], np.cumsum(mags)[:-1]])
        ordinal = np.arange(total, dtype=np.int64) - np.repeat(starts, mags) + 1
        span = times[k] - times[k - 1]
        t_ev = times[k - 1] + span * ordinal / (np.repeat(mags, mags) + 1.0)
        chunks_t.append(np.floor(t_ev).astype(np.uint64))
        chunks_x.append((rep % geom.width).astype(np.uint16))
        chunks_y.append((rep // geom.width).astype(np.uint16))
        chunks_p.append(np.repeat(np.sign(counts), mags).astype(np.int8))

    if chunks_t:
        stream = EventStream.from_arrays(
            np.concatenate(chunks_t), np.concatenate(chunks_x),
            np.concatenate(chunks_y), np.concatenate(chunks_p), geom, sort=True,
        )
    else:
        stream = EventStream.empty(geom)
    if scene.noise_rate > 0:
        stream = add_noise(stream, scene.noise_rate, scene.duration_us, scene.seed,
                           mode=scene.noise_mode, strobe_hz=scene.strobe_hz,
                           strobe_duty=scene.strobe_duty)

    traj_t = np.unique(np.round(
        np.linspace(0.0, float(scene.duration_us), scene.trajectory_samples)
    ).astype(np.uint64))
    if scene.shapes:
        joints = np.stack([
            scene.shapes[0].keypoints_at(float(t) / float(scene.duration_us)).joints
            for t in traj_t
        ])
    else:
        joints = np.zeros((traj_t.size, NUM_JOINTS, 2))
    return stream, Trajectory(traj_t, joints)


def _path_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "static":
        return StaticPath(tuple(d["pos"]))
    if kind == "linear":
        return LinearPath(tuple(d["start"]), tuple(d["stop"]))
    if kind == "circular":
        return CircularPath(tuple(d["center"]), float(d["radius"]),
                            float(d.get("revolutions", 1.0)),
                            float(d.get("phase_deg", 0.0)))
    raise ValueError(f"unknown path kind {kind!r}")


def _shape_from_dict(d: dict) -> Shape:
    kind = d["kind"]
    angles = ()
    if kind == "bar":
        angles = ((float(d.get("angle_start", 0.0)), float(d.get("angle_sweep", 0.0))),)
    elif kind == "chain":
        angles = tuple((float(a), float(b)) for a, b in d["angles"])
    joint_map = tuple(sorted((int(slot), int(j)) for slot, j in d.get("joint_map", {}).items()))
    return Shape(
        kind=kind,
        contrast=float(d["contrast"]),
        path=_path_from_dict(d["path"]),
        size=float(d["size"]),
        length=float(d.get("length", 0.0)),
        angles_deg=angles,
        joint_map=joint_map,
    )


def scene_from_dict(d: dict) -> SceneConfig:
    geometry = SensorGeometry(int(d["width"]), int(d["height"]))
    scene = SceneConfig(
        geometry=geometry,
        shapes=tuple(_shape_from_dict(s) for s in d.get("shapes", [])),
        contrast_threshold=float(d["contrast_threshold"]),
        duration_us=int(d["duration_us"]),
        noise_rate=float(d.get("noise_rate", 0.0)),
        seed=int(d.get("seed", 0)),
        background=float(d.get("background", 1.0)),
        noise_mode=str(d.get("noise_mode", "uniform")),
        strobe_hz=float(d.get("strobe_hz", 100.0)),
        strobe_duty=float(d.get("strobe_duty", 0.1)),
        max_step_px=float(d.get("max_step_px", 0.25)),
        max_steps=int(d.get("max_steps", 50000)),
        trajectory_samples=int(d.get("trajectory_samples", 201)),
    )
    return scene


def load_scene_config(path) -> SceneConfig:
    """Read a SceneConfig from a TOML file (see README for the schema)."""
    import tomli

    with open(path, "rb") as fh:
        return scene_from_dict(tomli.load(fh))


def add_noise(stream: EventStream, rate: float, duration_us: int, seed: int,
              mode: str = "uniform", strobe_hz: float = 100.0,
              strobe_duty: float = 0.1) -> EventStream:
    """Merge seeded background noise into a stream.

    Injected count is Poisson with mean rate * n_pixels * duration_seconds,
    so it scales linearly with the time length; pixels and polarities are
    uniform. mode "uniform" spreads events homogeneously; "strobe" packs them
    into periodic bursts (AC-flicker style) covering a `strobe_duty` fraction
    of each 1/strobe_hz period. rate 0 returns the stream unchanged.
    """
    if rate < 0:
        raise ValueError("noise rate must be non-negative")
    if rate == 0:
        return stream
    geom = stream.geometry
    rng = np.random.default_rng(seed)
    lam = rate * geom.n_pixels * (duration_us / 1e6)
    count = int(rng.poisson(lam))
    if mode == "uniform":
        t = rng.integers(0, max(1, duration_us), size=count, dtype=np.uint64)
    elif mode == "strobe":
        period = 1e6 / strobe_hz
        bursts = max(1, int(duration_us // period))
        k = rng.integers(0, bursts, size=count)
        phase = rng.uniform(0.0, max(strobe_duty * period, 1.0), size=count)
        t = np.minimum(k * period + phase, duration_us - 1).astype(np.uint64)
    else:
        raise ValueError(f"unknown noise mode {mode!r}")
    x = rng.integers(0, geom.width, size=count, dtype=np.uint16)
    y = rng.integers(0, geom.height, size=count, dtype=np.uint16)
    p = (rng.integers(0, 2, size=count, dtype=np.int8) * 2 - 1).astype(np.int8)
    return EventStream.from_arrays(
        np.concatenate([stream.t, t]), np.concatenate([stream.x, x]),
        np.concatenate([stream.y, y]), np.concatenate([stream.p, p]),
        geom, sort=True,
    )
