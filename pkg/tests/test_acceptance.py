"""Acceptance suite: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

import dataclasses
import time
from pathlib import Path

import numpy as np
import pytest

from evframes import (
    AugmentSpec,
    BinningMap,
    KeypointSet,
    LinearPath,
    SceneConfig,
    SensorGeometry,
    Shape,
    add_noise,
    apply_geometric,
    aucp,
    event_count,
    lnecs,
    noise_mask,
    pckp,
    render,
    segment_by_count,
    segment_by_time,
    simulate,
    slice_time,
    suppress_noise,
    transform_keypoints,
    variable_length_segment,
)
from evframes.cli import main as cli_main
from evframes.events import EventStream
from evframes.metrics import DEFAULT_SWEEP
from evframes.segmentation import TailPolicy
from helpers import crop_events, random_stream, rotate_events_90cw
from reference import ref_event_count, ref_lnes


def _accept(name, t0=None):
    suffix = f" ({time.perf_counter() - t0:.1f}s)" if t0 is not None else ""
    print(f"[ACCEPT] {name}: PASS{suffix}")


def _disc_scene(duration_us, *, geometry=SensorGeometry(96, 64), radius=4.0,
                x0=16.0, x1=80.0, noise_rate=0.0, seed=0, **overrides):
    shape = Shape(kind="disc", contrast=0.8, size=radius,
                  path=LinearPath((x0, 32.0), (x1, 32.0)))
    return SceneConfig(geometry=geometry, shapes=(shape,), contrast_threshold=0.25,
                       duration_us=duration_us, noise_rate=noise_rate, seed=seed,
                       **overrides)


def _active_pixel_centroids(segments):
    out = []
    for seg in segments:
        if len(seg) == 0:
            continue
        flat = np.unique(seg.y.astype(np.int64) * seg.geometry.width + seg.x)
        out.append(np.array([(flat % seg.geometry.width).mean(),
                             (flat // seg.geometry.width).mean()]))
    return out


def _mean_consecutive_displacement(segments):
    centroids = _active_pixel_centroids(segments)
    assert len(centroids) >= 3, "need several segments for a stable mean"
    steps = [np.linalg.norm(b - a) for a, b in zip(centroids[:-1], centroids[1:])]
    return float(np.mean(steps))


def _footprint(frame):
    return (frame.data > 0).any(axis=0)


def test_representation_oracle_suite():
    """Streaming renders match the naive per-pixel reference on 100 segments."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    sizes = list(np.round(10 ** rng.uniform(1, 5, 98)).astype(int)) + [100_000, 100_000]
    checked = 0
    for i, n in enumerate(sizes):
        in_geom = SensorGeometry(int(rng.integers(32, 640)), int(rng.integers(32, 400)))
        if rng.random() < 0.5:
            out_geom = in_geom
        else:
            out_geom = SensorGeometry(int(rng.integers(16, in_geom.width + 1)),
                                      int(rng.integers(16, in_geom.height + 1)))
        stream = random_stream(int(rng.integers(0, 2**31)), int(n),
                               width=in_geom.width, height=in_geom.height)
        seg = slice_time(stream, 0, int(stream.t[-1]) + 1)
        binning = BinningMap(in_geom, out_geom)
        args = (seg.t, seg.x, seg.y, seg.p,
                (in_geom.width, in_geom.height), (out_geom.width, out_geom.height))

        ref_ec = ref_event_count(*args)
        ref_surface = ref_lnes(*args)
        peak = ref_ec.max()
        ref_counts = ref_ec / peak if peak > 0 else ref_ec
        expected = {
            "ec": ref_ec,
            "lnes": ref_surface,
            "lnec": ref_counts,
            "lnecs": np.concatenate([ref_surface, ref_counts]),
            "lnewcs": ref_surface * ref_counts,
        }
        got_ec = event_count(seg, binning)
        assert int(got_ec.data.sum(dtype=np.int64)) == len(seg)  # exact conservation
        for kind, want in expected.items():
            got = render(seg, kind, binning).data.astype(np.float64)
            assert np.abs(got - want).max() < 1e-6, (kind, i)
        checked += 1
    elapsed = time.perf_counter() - t0
    assert checked == 100
    assert elapsed < 60.0, f"oracle suite took {elapsed:.1f}s"
    _accept("representation oracle suite (100 segments, <=1e5 events)", t0)


def test_speed_adaptive_segmentation():
    """Fixed-count windows keep per-segment motion range speed-invariant."""
    t0 = time.perf_counter()
    slow_stream, _ = simulate(_disc_scene(2_000_000, max_step_px=0.25))
    fast_stream, _ = simulate(_disc_scene(500_000, max_step_px=0.2))

    n = len(fast_stream) // 8
    slow_by_count = _mean_consecutive_displacement(
        segment_by_count(slow_stream, n, TailPolicy.DROP))
    fast_by_count = _mean_consecutive_displacement(
        segment_by_count(fast_stream, n, TailPolicy.DROP))
    count_diff = abs(fast_by_count - slow_by_count) / slow_by_count
    assert count_diff < 0.15, f"count standard drifted {count_diff:.3f}"

    dt = 50_000  # the 50 ms operating point
    slow_by_time = _mean_consecutive_displacement(
        segment_by_time(slow_stream, dt, TailPolicy.DROP))
    fast_by_time = _mean_consecutive_displacement(
        segment_by_time(fast_stream, dt, TailPolicy.DROP))
    time_ratio = fast_by_time / slow_by_time
    assert 3.0 <= time_ratio <= 5.0, f"time standard ratio {time_ratio:.2f}"

    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"speed adaptivity took {elapsed:.1f}s"
    _accept(f"speed adaptivity (count diff {count_diff:.1%}, "
            f"time ratio {time_ratio:.2f})", t0)


def test_slow_to_fast_augmentation_equivalence():
    """A triple-length slow window stands in for the 3x-speed scene's window.

    Each stream's base window is the event count it accumulates over one
    reference interval; tripling the slow window's length makes it span the
    same path arc (and three times the wall-clock time) as the fast window.
    """
    t0 = time.perf_counter()
    slow_stream, _ = simulate(_disc_scene(1_500_000, radius=5.0, x0=18.0, x1=78.0,
                                          max_step_px=0.25))
    fast_stream, _ = simulate(_disc_scene(500_000, radius=5.0, x0=18.0, x1=78.0,
                                          max_step_px=0.2))
    binning = BinningMap.identity(slow_stream.geometry)

    interval_us = 100_000
    anchor_slow = int(slow_stream.t[-1])
    anchor_fast = int(fast_stream.t[-1])
    base_slow = len(slice_time(slow_stream, anchor_slow - interval_us, anchor_slow + 1))
    base_fast = len(slice_time(fast_stream, anchor_fast - interval_us, anchor_fast + 1))

    slow_window = variable_length_segment(slow_stream, anchor_slow, base_slow, 3.0)
    fast_window = variable_length_segment(fast_stream, anchor_fast, base_fast, 1.0)

    # the tripled slow window really is the long-time-span one
    span_slow = int(slow_window.t[-1]) - int(slow_window.t[0])
    span_fast = int(fast_window.t[-1]) - int(fast_window.t[0])
    assert 2.5 < span_slow / span_fast < 3.5

    foot_slow = _footprint(lnecs(slow_window, binning))
    foot_fast = _footprint(lnecs(fast_window, binning))
    iou = (foot_slow & foot_fast).sum() / (foot_slow | foot_fast).sum()
    assert iou > 0.7, f"footprint IoU {iou:.3f}"

    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"augmentation equivalence took {elapsed:.1f}s"
    _accept(f"slow-to-fast window equivalence (IoU {iou:.2f}, "
            f"time-span ratio {span_slow / span_fast:.2f})", t0)


def test_noise_model_and_suppression():
    """Noise scales with duration; a (sigma=3, eps) setting separates noise from signal."""
    t0 = time.perf_counter()
    geometry = SensorGeometry(96, 64)
    empty = EventStream.empty(geometry)
    rate = 4.0
    durations = np.array([100_000 * (i + 1) for i in range(20)])
    counts = np.array([len(add_noise(empty, rate, int(d), seed=i))
                       for i, d in enumerate(durations)], dtype=np.float64)
    slope = np.polyfit(durations / 1e6, counts, 1)[0]
    expected = rate * geometry.n_pixels
    assert abs(slope - expected) / expected < 0.05, f"slope {slope:.0f} vs {expected}"

    noisy_scene = _disc_scene(1_000_000, noise_rate=5.0, seed=13)
    clean_scene = dataclasses.replace(noisy_scene, noise_rate=0.0)
    noisy_stream, _ = simulate(noisy_scene)
    clean_stream, _ = simulate(clean_scene)

    windows = segment_by_count(noisy_stream, 6000, TailPolicy.DROP)
    window = windows[len(windows) // 2]
    binning = BinningMap.identity(geometry)
    noisy_ec = event_count(window, binning)
    clean_ec = event_count(
        slice_time(clean_stream, window.t_start, window.t_end), binning)

    signal = clean_ec.data > 0
    noise_only = (noisy_ec.data > 0) & ~signal
    assert noise_only.sum() > 50, "scene produced too little noise to measure"

    found = None
    for eps in np.arange(0.05, 1.55, 0.05):
        mask_full = np.zeros_like(signal)
        keep = noise_mask(noisy_ec, 3, float(eps))
        mask_full[0], mask_full[1] = keep[0], keep[1]
        removed = 1.0 - (noise_only & mask_full).sum() / noise_only.sum()
        retained = (noisy_ec.data * mask_full)[signal].sum() / noisy_ec.data[signal].sum()
        if removed >= 0.8 and retained >= 0.95:
            found = (float(eps), removed, retained)
            break
    assert found, "no (sigma=3, eps) setting separated noise from signal"

    once = suppress_noise(noisy_ec, noisy_ec, 3, found[0])
    twice = suppress_noise(once, noisy_ec, 3, found[0])
    assert np.array_equal(once.data, twice.data)  # idempotent, exactly
    for lo, hi in [(0.1, 0.4), (0.4, 1.0)]:
        keep_lo, keep_hi = noise_mask(noisy_ec, 3, lo), noise_mask(noisy_ec, 3, hi)
        assert not (keep_hi & ~keep_lo).any()  # monotone in the threshold, exactly

    _accept(f"noise model and suppression (slope {slope:.0f}, eps {found[0]:.2f}, "
            f"removed {found[1]:.0%}, retained {found[2]:.1%})", t0)


def test_geometric_label_consistency():
    """render(transform(events)) == transform(render(events)), keypoints included."""
    t0 = time.perf_counter()
    stream, traj = simulate(_disc_scene(400_000, radius=5.0))
    anchor = int(stream.t[-1])
    kps = traj.interpolate(anchor)
    binning = BinningMap.identity(stream.geometry)
    frame = lnecs(slice_time(stream, 0, anchor + 1), binning)

    for k in (0, 1, 2, 3):
        spec = AugmentSpec(rotation_deg=90.0 * k)
        rotated_frame, rotated_kps = apply_geometric(frame, kps, spec)
        rs = rotate_events_90cw(stream, k)
        direct = lnecs(slice_time(rs, 0, anchor + 1), BinningMap.identity(rs.geometry))
        assert np.array_equal(rotated_frame.data, direct.data), f"rotation {90 * k}"
        assert np.array_equal(
            rotated_kps.joints,
            transform_keypoints(kps, spec, stream.geometry).joints)
        # re-derive the map longhand for the wrist
        u, v = kps.joints[0]
        w, h = stream.geometry.width, stream.geometry.height
        for _ in range(k):
            u, v = h - 1 - v, u
            w, h = h, w
        assert np.allclose(rotated_kps.joints[0], [u, v])

    rng = np.random.default_rng(77)
    x_lo, x_hi = int(stream.x.min()), int(stream.x.max())
    y_lo, y_hi = int(stream.y.min()), int(stream.y.max())
    for trial in range(20):
        x0 = int(rng.integers(0, x_lo + 1))
        y0 = int(rng.integers(0, y_lo + 1))
        w = int(rng.integers(x_hi + 1 - x0, stream.geometry.width + 1 - x0))
        h = int(rng.integers(y_hi + 1 - y0, stream.geometry.height + 1 - y0))
        spec = AugmentSpec(crop=(x0, y0, w, h))
        cropped_frame, cropped_kps = apply_geometric(frame, kps, spec)
        cs = crop_events(stream, x0, y0, w, h)
        direct = lnecs(slice_time(cs, 0, anchor + 1), BinningMap.identity(cs.geometry))
        assert np.array_equal(cropped_frame.data, direct.data), f"crop {spec.crop}"
        assert np.allclose(cropped_kps.joints, kps.joints - [x0, y0])

    _accept("geometric label consistency (4 rotations, 20 crops, bit-exact)", t0)


def test_metrics_suite():
    """AUC fixed points, monotonicity and rigid-motion invariance."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    joints = rng.integers(0, 50, (21, 2)).astype(np.float64)
    joints[9] = joints[0] + np.array([0.0, 10.0])
    gt = KeypointSet(joints)

    assert aucp([gt], [gt], DEFAULT_SWEEP) == 1.0

    pred = KeypointSet(gt.joints + np.array([3.0, 4.0]))  # error 5 on palm 10
    step_auc = aucp([pred], [gt], DEFAULT_SWEEP)
    assert abs(step_auc - 0.505) <= 1e-6

    noisy = KeypointSet(gt.joints + rng.normal(0, 4, (21, 2)))
    values = [pckp(noisy, gt, tau) for tau in DEFAULT_SWEEP]
    assert np.all(np.diff(values) >= 0)

    gt3 = KeypointSet(np.column_stack([joints, rng.uniform(1, 2, 21)]))
    pred3 = KeypointSet(gt3.joints + rng.normal(0, 2, (21, 3)))
    base = aucp([pred3], [gt3], DEFAULT_SWEEP)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    rotated = aucp([KeypointSet(pred3.joints @ q.T)], [KeypointSet(gt3.joints @ q.T)],
                   DEFAULT_SWEEP)
    assert abs(rotated - base) < 1e-9

    _accept(f"metrics suite (step AUC {step_auc:.6f})", t0)


def test_throughput():
    """Engineering floor: EC rendering and count segmentation at stream rates."""
    rng = np.random.default_rng(1)
    n = 8_000_000
    geometry = SensorGeometry(1280, 800)
    t = np.sort(rng.integers(0, 10_000_000, n)).astype(np.uint64)
    x = rng.integers(0, 1280, n).astype(np.uint16)
    y = rng.integers(0, 800, n).astype(np.uint16)
    p = (rng.integers(0, 2, n) * 2 - 1).astype(np.int8)
    stream = EventStream(t, x, y, p, geometry)
    seg = slice_time(stream, 0, int(t[-1]) + 1)
    binning = BinningMap(geometry, SensorGeometry(240, 150))

    event_count(seg, binning)  # warm-up
    best_render = 0.0
    for _ in range(3):
        start = time.perf_counter()
        frame = event_count(seg, binning)
        best_render = max(best_render, n / (time.perf_counter() - start))
    assert int(frame.data.sum(dtype=np.int64)) == n
    assert best_render >= 5e6, f"EC rendering at {best_render / 1e6:.1f}M events/s"

    best_segment = 0.0
    for _ in range(3):
        start = time.perf_counter()
        segments = segment_by_count(stream, 10_000, TailPolicy.DROP)
        best_segment = max(best_segment, n / (time.perf_counter() - start))
    assert len(segments) == n // 10_000
    assert best_segment >= 50e6, f"segmentation at {best_segment / 1e6:.1f}M events/s"

    _accept(f"throughput (EC {best_render / 1e6:.0f}M ev/s, "
            f"segment {best_segment / 1e6:.0f}M ev/s)")


SCENE_TOML = """
width = 96
height = 64
duration_us = 400000
contrast_threshold = 0.25
noise_rate = 3.0
seed = 17

[[shapes]]
kind = "disc"
size = 4.0
contrast = 0.8
path = { kind = "linear", start = [16.0, 32.0], stop = [80.0, 32.0] }
"""


def test_cli_pipeline_determinism(tmp_path):
    """The full CLI pipeline reruns byte-identically under fixed seeds."""
    t0 = time.perf_counter()

    def run(root: Path):
        root.mkdir()
        cfg = root / "scene.toml"
        cfg.write_text(SCENE_TOML)
        assert cli_main(["--quiet", "simulate", "--config", str(cfg),
                         "--out", str(root / "s.evb"),
                         "--traj", str(root / "t.csv")]) == 0
        assert cli_main(["--quiet", "render", "--in", str(root / "s.evb"),
                         "--segment", "count:3000", "--rep", "lnecs",
                         "--size", "48x32", "--traj", str(root / "t.csv"),
                         "--preview", "--out", str(root / "frames")]) == 0
        assert cli_main(["--quiet", "--seed", "23", "augment",
                         "--in", str(root / "s.evb"), "--segment", "count:3000",
                         "--rep", "lnecs", "--size", "48x32",
                         "--traj", str(root / "t.csv"), "--len-mult", "0.5:2",
                         "--crop-frac", "0.75:1.0",
                         "--out", str(root / "augmented")]) == 0
        assert cli_main(["--quiet", "eval", "--pred", str(root / "t.csv"),
                         "--gt", str(root / "t.csv"),
                         "--out", str(root / "report.txt")]) == 0

    run(tmp_path / "a")
    run(tmp_path / "b")

    files_a = sorted(p.relative_to(tmp_path / "a").as_posix()
                     for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b").as_posix()
                     for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert files_a == files_b and files_a
    for rel in files_a:
        assert ((tmp_path / "a" / rel).read_bytes()
                == (tmp_path / "b" / rel).read_bytes()), f"{rel} differs"

    _accept(f"CLI pipeline determinism ({len(files_a)} files byte-identical)", t0)
