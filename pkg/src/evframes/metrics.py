"""Keypoint evaluation: palm-normalized PCK, its area under the curve, the
camera-space transform for teacher labels, and the distillation loss value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .augment import AugmentSpec, transform_keypoints
from .events import SensorGeometry
from .keypoints import MIDDLE_MCP, WRIST, KeypointSet

DEFAULT_SWEEP = np.round(np.arange(0, 101) * 0.01, 2)


@dataclass(frozen=True)
class CameraTransform:
    """Rigid extrinsics into the event-camera frame plus pinhole intrinsics."""

    rotation: np.ndarray     # (3, 3), orthonormal, det +1
    translation: np.ndarray  # (3,), meters
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        rotation = np.array(self.rotation, dtype=np.float64, copy=True)
        translation = np.array(self.translation, dtype=np.float64, copy=True)
        if rotation.shape != (3, 3) or translation.shape != (3,):
            raise ValueError("need a (3, 3) rotation and a (3,) translation")
        if not np.allclose(rotation @ rotation.T, np.eye(3), atol=1e-9):
            raise ValueError("rotation is not orthonormal")
        if not np.isclose(np.linalg.det(rotation), 1.0, atol=1e-9):
            raise ValueError("rotation determinant must be +1")
        rotation.flags.writeable = False
        translation.flags.writeable = False
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls, fx=1.0, fy=1.0, cx=0.0, cy=0.0) -> "CameraTransform":
        return cls(np.eye(3), np.zeros(3), fx, fy, cx, cy)


@dataclass(frozen=True)
class PckCurve:
    thresholds: np.ndarray  # ascending, palm-normalized units in [0, 1]
    values: np.ndarray      # fraction correct, non-decreasing

    def __post_init__(self):
        thresholds = np.asarray(self.thresholds, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if thresholds.shape != values.shape or thresholds.ndim != 1:
            raise ValueError("thresholds and values must be equal-length vectors")
        if np.any(np.diff(thresholds) <= 0):
            raise ValueError("thresholds must be strictly ascending")
        if thresholds[0] < 0 or thresholds[-1] > 1:
            raise ValueError("thresholds must lie in [0, 1]")
        if np.any(np.diff(values) < -1e-12):
            raise ValueError("pck values must be non-decreasing in the threshold")
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "values", values)

    @property
    def auc(self) -> float:
        span = float(self.thresholds[-1] - self.thresholds[0])
        return float(np.trapezoid(self.values, self.thresholds) / span)


def palm_length(gt: KeypointSet) -> float:
    """Wrist to middle-finger MCP distance in the set's native units."""
    length = float(np.linalg.norm(gt.joints[MIDDLE_MCP] - gt.joints[WRIST]))
    if length == 0.0:
        raise ValueError("degenerate palm: wrist and middle MCP coincide")
    return length


def _as_joints(obj) -> np.ndarray:
    return obj.joints if isinstance(obj, KeypointSet) else np.asarray(obj, dtype=np.float64)


def _joint_errors(pred, gt) -> np.ndarray:
    pred = _as_joints(pred)
    gt = _as_joints(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"dimensionality mismatch: pred {pred.shape} vs gt {gt.shape}")
    return np.linalg.norm(pred - gt, axis=1)


def pckp(pred, gt, tau: float, palm: Optional[float] = None) -> float:
    """Fraction of joints within tau * palm length of ground truth (inclusive).

    Accepts KeypointSets or plain (N, D) arrays; reduced joint subsets need an
    explicit `palm` since the normalization joints may be absent.
    """
    if tau < 0:
        raise ValueError("threshold must be non-negative")
    if palm is None:
        gt_joints = _as_joints(gt)
        palm = palm_length(gt if isinstance(gt, KeypointSet) else KeypointSet(gt_joints))
    errors = _joint_errors(pred, gt)
    return float(np.mean(errors <= tau * palm))


def pck_curve(preds: Sequence[KeypointSet], gts: Sequence[KeypointSet],
              sweep=DEFAULT_SWEEP) -> PckCurve:
    """Per-frame PCK at each threshold, averaged over frames.

    Pooling order: joints are pooled within a frame first, then frames are
    averaged with equal weight.
    """
    sweep = np.asarray(sweep, dtype=np.float64)
    if len(preds) != len(gts):
        raise ValueError(f"got {len(preds)} predictions for {len(gts)} ground truths")
    if len(preds) == 0:
        raise ValueError("cannot evaluate an empty sequence")
    per_frame = np.empty((len(preds), sweep.size))
    for i, (pred, gt) in enumerate(zip(preds, gts)):
        normalized = _joint_errors(pred, gt) / palm_length(gt)
        per_frame[i] = np.mean(normalized[:, None] <= sweep[None, :], axis=0)
    return PckCurve(sweep, per_frame.mean(axis=0))


def aucp(preds: Sequence[KeypointSet], gts: Sequence[KeypointSet],
         sweep=DEFAULT_SWEEP) -> float:
    """Area under the palm-normalized PCK curve (trapezoid rule, span-normalized)."""
    return pck_curve(preds, gts, sweep).auc


def render_report(curve: PckCurve, sweep_text: str = "", n_frames: int = 0) -> str:
    """Structured text report: the sweep, a per-threshold table and the AUC."""
    lines = [
        "# keypoint evaluation",
        f"# frames {n_frames}",
        "# pooling per-frame joints pooled, frames averaged equally",
        f"# sweep {sweep_text or 'custom'}",
        "# threshold pck",
    ]
    lines.extend(f"{t:.4f} {v:.6f}" for t, v in zip(curve.thresholds, curve.values))
    lines.append(f"aucp {curve.auc:.6f}")
    return "\n".join(lines) + "\n"


def apply_camera(points3d: KeypointSet,
                 cam: CameraTransform) -> tuple[KeypointSet, KeypointSet]:
    """Rigidly move 3D keypoints into the event-camera frame and project them.

    Returns (3D points in camera space, 2D pinhole projection). Every
    transformed point must have positive depth.
    """
    if points3d.is_2d:
        raise ValueError("camera transform needs 3D keypoints")
    pts = points3d.joints @ cam.rotation.T + cam.translation
    z = pts[:, 2]
    if np.any(z <= 0):
        raise ValueError("keypoint behind the camera after transform (Z <= 0)")
    uv = np.stack([cam.fx * pts[:, 0] / z + cam.cx,
                   cam.fy * pts[:, 1] / z + cam.cy], axis=1)
    return KeypointSet(pts), KeypointSet(uv)


def distill_loss(student: KeypointSet, teacher3d: KeypointSet, cam: CameraTransform,
                 label_transform: Optional[AugmentSpec] = None,
                 frame_geometry: Optional[SensorGeometry] = None) -> float:
    """Mean per-joint distance between the student output and the transformed teacher.

    Teacher keypoints go through the camera transform, then through the same
    geometric augmentation that was applied to the student's input frame. A 2D
    student is compared against the augmented projection; a 3D student against
    camera-space points (geometric augmentation is pixel-domain only, so it
    must be absent or identity then).
    """
    cam3d, cam2d = apply_camera(teacher3d, cam)
    has_view_transform = label_transform is not None and (
        label_transform.rotation_deg % 360 != 0 or label_transform.crop is not None)
    if student.is_2d:
        target = cam2d
        if has_view_transform:
            if frame_geometry is None:
                raise ValueError("label transform needs the frame geometry")
            target = transform_keypoints(target, label_transform, frame_geometry)
    else:
        if has_view_transform:
            raise ValueError("view transforms are pixel-domain; 3D students take none")
        target = cam3d
    return float(np.mean(_joint_errors(student, target)))
