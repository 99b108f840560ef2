"""Command-line pipeline: simulate -> segment -> render -> denoise/augment -> eval.

All subcommands are deterministic given identical inputs and seeds; reruns
produce byte-identical files. Segment specs use a mini-language:
count:N, time:MS, pixels:K, window:N@T.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import augment as aug
from . import formats, metrics, representation, segmentation, simulator
from .events import EventStream, SensorGeometry, StreamFormatError
from .io import load_stream, write_stream
from .keypoints import KeypointSet


class CliError(ValueError):
    pass


def _parse_geometry(text: str) -> SensorGeometry:
    try:
        w, h = text.lower().split("x")
        return SensorGeometry(int(w), int(h))
    except ValueError:
        raise CliError(f"bad geometry {text!r}; expected WIDTHxHEIGHT") from None


def _parse_segment_spec(text: str):
    """Return (kind, params) from count:N | time:MS | pixels:K | window:N@T."""
    try:
        kind, _, rest = text.partition(":")
        if kind == "count":
            return "count", {"n": int(rest)}
        if kind == "time":
            return "time", {"dt_us": int(round(float(rest) * 1000.0))}
        if kind == "pixels":
            return "pixels", {"k": int(rest)}
        if kind == "window":
            n, _, t = rest.partition("@")
            return "window", {"n": int(n), "t_query": int(t)}
    except ValueError:
        pass
    raise CliError(f"bad segment spec {text!r}; expected count:N, time:MS, pixels:K "
                   "or window:N@T")


def _parse_range(text: str, name: str):
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return (v, v)
        if len(parts) == 2:
            return (float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise CliError(f"bad {name} range {text!r}; expected VALUE or LO:HI")


def _parse_sweep(text: str) -> np.ndarray:
    try:
        start, step, stop = (float(v) for v in text.split(":"))
    except ValueError:
        raise CliError(f"bad sweep {text!r}; expected START:STEP:STOP") from None
    if step <= 0 or stop < start:
        raise CliError(f"bad sweep {text!r}")
    return np.round(np.arange(start, stop + step / 2, step), 10)


def _load_input_stream(args) -> EventStream:
    path = Path(args.input)
    fmt = args.format or ("csv" if path.suffix == ".csv" else "evb")
    geometry = _parse_geometry(args.geometry) if getattr(args, "geometry", None) else None
    if fmt == "csv" and geometry is None:
        raise CliError("csv input needs --geometry WIDTHxHEIGHT")
    return load_stream(path.read_bytes(), fmt, geometry)


def _segments_for(stream, kind, params, tail):
    policy = (segmentation.TailPolicy.EMIT_PARTIAL if tail == "partial"
              else segmentation.TailPolicy.DROP)
    if kind == "count":
        return segmentation.segment_by_count(stream, params["n"], policy)
    if kind == "time":
        return segmentation.segment_by_time(stream, params["dt_us"], policy)
    if kind == "pixels":
        return segmentation.segment_by_active_pixels(
            stream, params["k"], params.get("max_events", 10_000_000), policy)
    if kind == "window":
        return [segmentation.window_before(stream, params["t_query"], params["n"])]
    raise CliError(f"unknown segment kind {kind!r}")


def _provenance_dict(seg):
    d = segmentation.provenance_to_dict(seg.provenance) or {}
    d["t_start"] = seg.t_start
    d["t_end"] = seg.t_end
    d["n_events"] = len(seg)
    return d


def _scaled_keypoints(traj, t_anchor, in_geom, out_geom) -> KeypointSet:
    kps = traj.interpolate(t_anchor)
    scale = np.array([out_geom.width / in_geom.width,
                      out_geom.height / in_geom.height])
    return KeypointSet(kps.joints * scale)


def _write_preview(frame, out_dir: Path, stem: str):
    from PIL import Image

    out_dir.mkdir(parents=True, exist_ok=True)
    for c, label in enumerate(frame.channel_semantics):
        gray = (np.clip(frame.data[c], 0.0, 1.0) * 255.0).astype(np.uint8)
        safe = label.replace("+", "_pos").replace("-", "_neg")
        Image.fromarray(gray, mode="L").save(out_dir / f"{stem}_{safe}.png")


def _info(args, message):
    if not args.quiet:
        print(message, file=sys.stderr)


# ---------------------------------------------------------------- subcommands

def _cmd_simulate(args) -> int:
    scene = simulator.load_scene_config(args.config)
    if args.seed is not None:
        scene = dataclasses.replace(scene, seed=args.seed)
    stream, traj = simulator.simulate(scene)
    Path(args.out).write_bytes(write_stream(stream, "evb"))
    if args.traj:
        Path(args.traj).write_bytes(formats.write_trajectory(traj.times, traj.joints))
    _info(args, f"simulated {len(stream)} events over {scene.duration_us} us "
                f"on {scene.geometry}")
    return 0


def _cmd_segment(args) -> int:
    stream = _load_input_stream(args)
    kind, params = _parse_segment_spec(args.segment)
    if kind == "pixels":
        params["max_events"] = args.max_events
    segments = _segments_for(stream, kind, params, args.tail)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    index = []
    for i, seg in enumerate(segments):
        name = f"seg_{i:05d}.evb"
        sub = EventStream(seg.t, seg.x, seg.y, seg.p, seg.geometry)
        (out / name).write_bytes(write_stream(sub, "evb"))
        index.append({"id": f"seg_{i:05d}", "path": name,
                      "provenance": _provenance_dict(seg)})
    doc = {"version": 1, "source": str(args.input), "spec": args.segment,
           "segments": index}
    (out / "segments.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    _info(args, f"wrote {len(segments)} segments to {out}")
    return 0


def _render_batch(args, transform=None) -> int:
    """Shared body of render/denoise/augment: segments -> frames -> manifest.

    `transform(stream, binning, i, seg, frame, kps)` may replace the frame,
    keypoints and attach an augment-spec dict before anything is written.
    """
    stream = _load_input_stream(args)
    kind, params = _parse_segment_spec(args.segment)
    segments = _segments_for(stream, kind, params, args.tail)
    out_geom = _parse_geometry(args.size) if args.size else stream.geometry
    binning = representation.BinningMap(stream.geometry, out_geom)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    traj = None
    if getattr(args, "traj", None):
        times, joints = formats.read_trajectory(Path(args.traj).read_bytes())
        traj = simulator.Trajectory(times, joints)

    def build(item):
        i, seg = item
        frame = representation.render(seg, args.rep, binning)
        kps = None
        anchor = max(seg.t_start, seg.t_end - 1)
        if traj is not None:
            kps = _scaled_keypoints(traj, anchor, stream.geometry, out_geom)
        spec_dict = None
        if transform is not None:
            frame, kps, spec_dict = transform(stream, binning, i, seg, frame, kps)
        return i, frame, kps, anchor, spec_dict

    workers = max(1, args.threads)
    items = list(enumerate(segments))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(build, items))
    else:
        results = [build(item) for item in items]

    entries = []
    source_rel = _relpath(Path(args.input), out)
    for i, frame, kps, anchor, spec_dict in sorted(results, key=lambda r: r[0]):
        seg_id = f"seg_{i:05d}"
        frame_name = f"{seg_id}.evf"
        (out / frame_name).write_bytes(formats.write_evf(frame))
        keypoint_name = None
        if kps is not None:
            keypoint_name = f"{seg_id}_keypoints.csv"
            (out / keypoint_name).write_bytes(
                formats.write_trajectory(np.array([anchor], dtype=np.uint64),
                                         kps.joints[None, :, :]))
        if args.preview:
            _write_preview(frame, out / "previews", seg_id)
        entries.append(formats.ManifestEntry(
            segment_id=seg_id,
            source=source_rel,
            provenance=_provenance_dict(segments[i]),
            representation=args.rep,
            frame_path=frame_name,
            keypoint_path=keypoint_name,
            augment=spec_dict,
        ))
    formats.write_manifest(entries, out / "manifest.json", seed=getattr(args, "seed", None))
    _info(args, f"rendered {len(entries)} {args.rep} frames at {out_geom} into {out}")
    return 0


def _relpath(target: Path, base: Path) -> str:
    try:
        import os

        return os.path.relpath(target, base)
    except ValueError:  # different drive on windows
        return str(target)


def _cmd_render(args) -> int:
    return _render_batch(args)


def _cmd_denoise(args) -> int:
    if args.sigma < 1 or args.sigma % 2 == 0:
        raise CliError(f"filter size must be odd and positive, got {args.sigma}")
    if args.eps < 0:
        raise CliError("threshold must be non-negative")

    def transform(stream, binning, i, seg, frame, kps):
        ec = representation.event_count(seg, binning)
        frame = aug.suppress_noise(frame, ec, args.sigma, args.eps)
        spec = aug.AugmentSpec(noise_threshold=args.eps, filter_size=args.sigma)
        return frame, kps, spec.to_dict()

    return _render_batch(args, transform)


def _cmd_augment(args) -> int:
    kind, _ = _parse_segment_spec(args.segment)
    if kind != "count":
        raise CliError("augment varies segment length; use a count:N segment spec")
    base_seed = args.seed if args.seed is not None else 0

    ranges = aug.AugmentRanges(
        rotation_choices=tuple(float(r) for r in args.rotations.split(",")),
        crop_frac_range=_parse_range(args.crop_frac, "crop-frac") if args.crop_frac else None,
        length_multiplier_range=_parse_range(args.len_mult, "len-mult"),
        noise_threshold_range=_parse_range(args.eps_range, "eps"),
        filter_size_choices=tuple(int(s) for s in args.sigma_choices.split(",")),
    )

    def transform(stream, binning, i, seg, frame, kps):
        if kps is None:
            raise CliError("augment needs --traj to transform labels consistently")
        # derived per sample index, so worker scheduling cannot reorder draws
        sample_seed = int(np.random.default_rng([base_seed, i]).integers(0, 2**63))
        spec = aug.sample_augment(ranges, sample_seed, binning.out_geometry)
        # re-window around the anchor so one slow sample can mimic fast motion
        anchor = max(seg.t_start, seg.t_end - 1)
        window = aug.variable_length_segment(stream, anchor, len(seg) or 1,
                                             spec.length_multiplier)
        frame = representation.render(window, args.rep, binning)
        ec = representation.event_count(window, binning)
        frame = aug.suppress_noise(frame, ec, spec.filter_size, spec.noise_threshold)
        frame, kps = aug.apply_geometric(frame, kps, spec)
        return frame, kps, spec.to_dict()

    return _render_batch(args, transform)


def _cmd_eval(args) -> int:
    pred_t, pred_j = formats.read_trajectory(Path(args.pred).read_bytes())
    gt_t, gt_j = formats.read_trajectory(Path(args.gt).read_bytes())
    if pred_t.shape != gt_t.shape or not np.array_equal(pred_t, gt_t):
        raise CliError("prediction and ground-truth timestamps do not align")
    if pred_j.shape != gt_j.shape:
        raise CliError(f"prediction joints {pred_j.shape} vs ground truth {gt_j.shape}")
    sweep = _parse_sweep(args.sweep)
    preds = [KeypointSet(j) for j in pred_j]
    gts = [KeypointSet(j) for j in gt_j]
    curve = metrics.pck_curve(preds, gts, sweep)
    report = metrics.render_report(curve, sweep_text=args.sweep, n_frames=len(preds))
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    print(report, end="")
    return 0


def _cmd_stats(args) -> int:
    stream = _load_input_stream(args)
    lines = [
        f"events {len(stream)}",
        f"geometry {stream.geometry}",
    ]
    if len(stream):
        t0, t1 = int(stream.t[0]), int(stream.t[-1])
        dur = t1 - t0
        lines += [
            f"t_first_us {t0}",
            f"t_last_us {t1}",
            f"duration_us {dur}",
            f"rate_eps {len(stream) / (dur / 1e6):.1f}" if dur else "rate_eps inf",
            f"positive {int(np.count_nonzero(stream.p == 1))}",
            f"negative {int(np.count_nonzero(stream.p == -1))}",
            f"active_pixels "
            f"{np.unique(stream.y.astype(np.int64) * stream.geometry.width + stream.x).size}",
        ]
    print("\n".join(lines))
    return 0


# -------------------------------------------------------------------- parser

def _add_stream_input(p, geometry_help="geometry for csv inputs, WIDTHxHEIGHT"):
    p.add_argument("--in", dest="input", required=True, help="input stream (.evb or .csv)")
    p.add_argument("--format", choices=("csv", "evb"), help="override format detection")
    p.add_argument("--geometry", help=geometry_help)


def _add_render_args(p):
    p.add_argument("--segment", default="count:10000",
                   help="segment spec: count:N | time:MS | pixels:K | window:N@T")
    p.add_argument("--rep", default="lnecs", choices=representation.REPRESENTATIONS)
    p.add_argument("--size", help="output raster WIDTHxHEIGHT (default: input geometry)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--tail", choices=("drop", "partial"), default="drop")
    p.add_argument("--traj", help="trajectory csv for keypoint labels")
    p.add_argument("--preview", action="store_true", help="also write grayscale PNGs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evframes",
        description="Event stream segmentation, frame rendering, augmentation "
                    "and keypoint evaluation.",
    )
    parser.add_argument("--seed", type=int, default=None, help="override seeds")
    parser.add_argument("--threads", type=int, default=1, help="render worker threads")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")

    # the same globals are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering values already parsed before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add_parser("simulate", help="render a synthetic scene into an event stream")
    p.add_argument("--config", required=True, help="scene TOML")
    p.add_argument("--out", required=True, help="output .evb path")
    p.add_argument("--traj", help="output trajectory csv path")
    p.set_defaults(func=_cmd_simulate)

    p = add_parser("segment", help="split a stream into segment files")
    _add_stream_input(p)
    p.add_argument("--segment", default="count:10000", dest="segment")
    p.add_argument("--tail", choices=("drop", "partial"), default="drop")
    p.add_argument("--max-events", type=int, default=10_000_000,
                   help="cap for pixels:K segments")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_segment)

    p = add_parser("render", help="render segments into EVF frame tensors")
    _add_stream_input(p)
    _add_render_args(p)
    p.set_defaults(func=_cmd_render)

    p = add_parser("denoise", help="render frames with low-activity pixels zeroed")
    _add_stream_input(p)
    _add_render_args(p)
    p.add_argument("--sigma", type=int, default=3, help="mean filter size (odd)")
    p.add_argument("--eps", type=float, default=0.5, help="smoothed-count threshold")
    p.set_defaults(func=_cmd_denoise)

    p = add_parser("augment", help="export augmented training samples")
    _add_stream_input(p)
    _add_render_args(p)
    p.add_argument("--rotations", default="0,90,180,270")
    p.add_argument("--crop-frac", dest="crop_frac", default=None,
                   help="crop side fraction LO:HI")
    p.add_argument("--len-mult", dest="len_mult", default="1:1",
                   help="segment length multiplier LO:HI")
    p.add_argument("--eps-range", dest="eps_range", default="0:2",
                   help="noise threshold LO:HI")
    p.add_argument("--sigma-choices", dest="sigma_choices", default="3")
    p.set_defaults(func=_cmd_augment)

    p = add_parser("eval", help="palm-normalized PCK / AUC report")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--sweep", default="0:0.01:1")
    p.add_argument("--out", help="also write the report to a file")
    p.set_defaults(func=_cmd_eval)

    p = add_parser("stats", help="stream statistics")
    _add_stream_input(p)
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, StreamFormatError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
