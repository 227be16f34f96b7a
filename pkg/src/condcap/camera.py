"""Camera trajectory handling: pose file parsing, Plücker ray embeddings,
trajectory-error metrics, and camera-movement classification.

Extrinsics are world-to-camera throughout: a pose maps a world point x to
camera coordinates R @ x + t. Camera axes follow the usual pinhole
convention (+x right, +y down, +z forward).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

_ORTHO_TOL = 1e-6

#: Fixed canonical order for movement labels.
MOVEMENT_LABELS = (
    "forward", "backward", "left", "right", "up", "down",
    "pan_left", "pan_right", "tilt_up", "tilt_down", "roll_cw", "roll_ccw",
)

MOVEMENT_PHRASES = {
    "fixed": "fixed",
    "forward": "moving forward",
    "backward": "moving backward",
    "left": "moving to the left",
    "right": "moving to the right",
    "up": "moving up",
    "down": "moving down",
    "pan_left": "pan to the left",
    "pan_right": "pan to the right",
    "tilt_up": "tilt up",
    "tilt_down": "tilt down",
    "roll_cw": "roll clockwise",
    "roll_ccw": "roll counterclockwise",
}


class TrajectoryFormatError(ValueError):
    """Malformed trajectory file contents."""


@dataclass(frozen=True, eq=False)
class CameraPose:
    """One frame's world-to-camera extrinsics plus pinhole intrinsics.

    Attributes:
        rotation: 3x3 world-to-camera rotation, orthonormal with det +1.
        translation: 3-vector world-to-camera translation (scene units).
        fx, fy, cx, cy: intrinsics in pixels.
    """

    rotation: np.ndarray
    translation: np.ndarray
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self) -> None:
        rotation = np.asarray(self.rotation, dtype=float)
        translation = np.asarray(self.translation, dtype=float).reshape(3)
        if rotation.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {rotation.shape}")
        if np.max(np.abs(rotation.T @ rotation - np.eye(3))) > _ORTHO_TOL:
            raise ValueError("rotation is not orthonormal within 1e-6")
        if abs(np.linalg.det(rotation) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation determinant differs from +1 beyond 1e-6")
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    def center(self) -> np.ndarray:
        """Camera center in world coordinates, -R^T t."""
        return -self.rotation.T @ self.translation

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous world-to-camera transform."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m


@dataclass(frozen=True)
class CameraTrajectory:
    """Per-frame poses with strictly increasing frame indices."""

    poses: tuple[CameraPose, ...]
    frame_indices: tuple[int, ...]
    image_size: tuple[int, int] | None = None  # (width, height) when known

    def __post_init__(self) -> None:
        object.__setattr__(self, "poses", tuple(self.poses))
        object.__setattr__(self, "frame_indices", tuple(self.frame_indices))
        if not self.poses:
            raise ValueError("trajectory needs at least one pose")
        if len(self.frame_indices) != len(self.poses):
            raise ValueError("frame_indices and poses length mismatch")
        if any(b <= a for a, b in zip(self.frame_indices, self.frame_indices[1:])):
            raise ValueError("frame indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.poses)

    def centers(self) -> np.ndarray:
        """Camera centers stacked as (N, 3)."""
        return np.stack([pose.center() for pose in self.poses])


def load_trajectory(
    path: str | Path,
    *,
    normalized_intrinsics: bool = False,
    image_size: tuple[int, int] | None = None,
) -> CameraTrajectory:
    """Parse a trajectory file, one frame per line.

    Line format (whitespace separated):
    ``frame_idx fx fy cx cy r11 r12 r13 t1 r21 r22 r23 t2 r31 r32 r33 t3``
    i.e. intrinsics followed by the row-major world-to-camera 3x4 matrix.
    Blank lines and ``#`` comments are skipped. With
    ``normalized_intrinsics`` the fx/cx (fy/cy) values are scaled by the
    image width (height), which must then be supplied via ``image_size``.
    """
    if normalized_intrinsics and image_size is None:
        raise ValueError("normalized intrinsics require image_size=(width, height)")
    poses: list[CameraPose] = []
    indices: list[int] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 17:
            raise TrajectoryFormatError(
                f"{path}: line {lineno}: expected 17 values, got {len(fields)}"
            )
        try:
            frame_idx = int(fields[0])
            values = [float(v) for v in fields[1:]]
        except ValueError as exc:
            raise TrajectoryFormatError(f"{path}: line {lineno}: {exc}") from exc
        fx, fy, cx, cy = values[:4]
        extrinsic = np.asarray(values[4:]).reshape(3, 4)
        if normalized_intrinsics:
            width, height = image_size  # type: ignore[misc]
            fx, cx = fx * width, cx * width
            fy, cy = fy * height, cy * height
        try:
            pose = CameraPose(extrinsic[:, :3], extrinsic[:, 3], fx, fy, cx, cy)
        except ValueError as exc:
            raise TrajectoryFormatError(f"{path}: line {lineno}: {exc}") from exc
        poses.append(pose)
        indices.append(frame_idx)
    if not poses:
        raise TrajectoryFormatError(f"{path}: no poses found")
    return CameraTrajectory(tuple(poses), tuple(indices), image_size)


def normalize_to_first(traj: CameraTrajectory) -> CameraTrajectory:
    """Re-express all poses relative to the first frame.

    The first pose becomes the identity; every pose is composed with the
    inverse of the original first pose, preserving relative motion.
    """
    first = traj.poses[0]
    inv_rot = first.rotation.T
    inv_trans = -first.rotation.T @ first.translation
    poses = []
    for pose in traj.poses:
        rotation = pose.rotation @ inv_rot
        translation = pose.rotation @ inv_trans + pose.translation
        poses.append(replace(pose, rotation=rotation, translation=translation))
    return CameraTrajectory(tuple(poses), traj.frame_indices, traj.image_size)


@dataclass(frozen=True, eq=False)
class PlueckerMap:
    """Per-pixel camera rays as (N, 6, H, W): moment o x d, then direction d.

    Directions are unit length and orthogonal to their moments.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 4 or values.shape[1] != 6:
            raise ValueError(f"expected (N, 6, H, W) values, got {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    def max_invariant_violation(self) -> tuple[float, float]:
        """Worst-case |1 - ||d||| and |m . d| over all pixels."""
        moments = self.values[:, :3]
        dirs = self.values[:, 3:]
        norm_err = float(np.max(np.abs(np.linalg.norm(dirs, axis=1) - 1.0)))
        dot_err = float(np.max(np.abs(np.sum(moments * dirs, axis=1))))
        return norm_err, dot_err


def pluecker_embedding(traj: CameraTrajectory, height: int, width: int) -> PlueckerMap:
    """Per-frame, per-pixel Plücker ray map of shape (N, 6, H, W).

    Rays go through pixel centers ((u + 0.5, v + 0.5) in pixel coordinates):
    the world direction is R^T K^-1 (u+0.5, v+0.5, 1)^T normalized, the
    moment is o x d with o the camera center.
    """
    if height < 1 or width < 1:
        raise ValueError("height and width must be >= 1")
    out = np.empty((len(traj), 6, height, width), dtype=float)
    ones = np.ones((height, width))
    for idx, pose in enumerate(traj.poses):
        if pose.fx == 0 or pose.fy == 0:
            raise ValueError("singular intrinsics: fx and fy must be nonzero")
        xs = (np.arange(width) + 0.5 - pose.cx) / pose.fx
        ys = (np.arange(height) + 0.5 - pose.cy) / pose.fy
        gx, gy = np.meshgrid(xs, ys)
        dirs = np.stack([gx, gy, ones])  # camera-frame ray directions, (3, H, W)
        dirs = np.tensordot(pose.rotation.T, dirs, axes=1)
        dirs /= np.linalg.norm(dirs, axis=0, keepdims=True)
        center = pose.center()
        moments = np.cross(
            np.broadcast_to(center[:, None, None], dirs.shape), dirs, axis=0
        )
        out[idx, :3] = moments
        out[idx, 3:] = dirs
    return PlueckerMap(out)


PLUECKER_MAGIC = 0x504C5545  # "PLUE"
PLUECKER_VERSION = 1


def write_pluecker(pmap: PlueckerMap, path: str | Path) -> None:
    """Write a Plücker map as little-endian float32 with an 8-uint32 header
    (magic, version, N, 6, H, W, reserved, reserved)."""
    n, _, height, width = pmap.values.shape
    header = np.array(
        [PLUECKER_MAGIC, PLUECKER_VERSION, n, 6, height, width, 0, 0], dtype="<u4"
    )
    with open(path, "wb") as fh:
        header.tofile(fh)
        pmap.values.astype("<f4").tofile(fh)


def read_pluecker(path: str | Path) -> PlueckerMap:
    with open(path, "rb") as fh:
        header = np.fromfile(fh, dtype="<u4", count=8)
        if header.size != 8 or header[0] != PLUECKER_MAGIC:
            raise ValueError(f"{path}: not a Plücker map file")
        if header[1] != PLUECKER_VERSION:
            raise ValueError(f"{path}: unsupported version {header[1]}")
        n, channels, height, width = (int(v) for v in header[2:6])
        if channels != 6:
            raise ValueError(f"{path}: expected 6 channels, got {channels}")
        data = np.fromfile(fh, dtype="<f4", count=n * 6 * height * width)
    if data.size != n * 6 * height * width:
        raise ValueError(f"{path}: truncated data section")
    return PlueckerMap(data.astype(float).reshape(n, 6, height, width))


def _check_lengths(pred: CameraTrajectory, gt: CameraTrajectory) -> None:
    if len(pred) != len(gt):
        raise ValueError(f"trajectory length mismatch: {len(pred)} vs {len(gt)}")


def _aggregate(values: np.ndarray, agg: str) -> float:
    if agg == "mean":
        return float(values.mean())
    if agg == "sum":
        return float(values.sum())
    raise ValueError(f"agg must be 'mean' or 'sum', got {agg!r}")


def rot_err(pred: CameraTrajectory, gt: CameraTrajectory, agg: str = "mean") -> float:
    """Per-frame geodesic rotation distance in degrees, aggregated.

    Callers comparing trajectories in different world frames should apply
    :func:`normalize_to_first` to both inputs beforehand.
    """
    _check_lengths(pred, gt)
    angles = []
    for p, g in zip(pred.poses, gt.poses):
        rel = p.rotation @ g.rotation.T
        # atan2 form of arccos((tr - 1)/2): identical near-identity inputs
        # stay at ~1e-15 deg instead of the ~1e-7 deg arccos noise floor
        cos_angle = (np.trace(rel) - 1.0) / 2.0
        sin_angle = 0.5 * math.sqrt(
            (rel[2, 1] - rel[1, 2]) ** 2
            + (rel[0, 2] - rel[2, 0]) ** 2
            + (rel[1, 0] - rel[0, 1]) ** 2
        )
        angles.append(math.degrees(math.atan2(sin_angle, cos_angle)))
    return _aggregate(np.asarray(angles), agg)


def _scaled_centers(traj: CameraTrajectory) -> np.ndarray:
    centers = traj.centers()
    max_norm = float(np.max(np.linalg.norm(centers, axis=1)))
    if max_norm > 0.0:
        centers = centers / max_norm
    return centers


def trans_err(pred: CameraTrajectory, gt: CameraTrajectory, agg: str = "mean") -> float:
    """Camera-center distance after per-trajectory scale normalization.

    Each trajectory's centers are divided by their maximum norm (monocular
    trajectories are scale ambiguous), then per-frame Euclidean distances
    are aggregated.
    """
    _check_lengths(pred, gt)
    deltas = np.linalg.norm(_scaled_centers(pred) - _scaled_centers(gt), axis=1)
    return _aggregate(deltas, agg)


def cam_mc(pred: CameraTrajectory, gt: CameraTrajectory, agg: str = "mean") -> float:
    """Entrywise L2 distance between the 3x4 [R | o] matrices per frame,
    with centers scale-normalized as in :func:`trans_err`."""
    _check_lengths(pred, gt)
    pred_centers = _scaled_centers(pred)
    gt_centers = _scaled_centers(gt)
    dists = []
    for i, (p, g) in enumerate(zip(pred.poses, gt.poses)):
        pm = np.hstack([p.rotation, pred_centers[i][:, None]])
        gm = np.hstack([g.rotation, gt_centers[i][:, None]])
        dists.append(float(np.linalg.norm(pm - gm)))
    return _aggregate(np.asarray(dists), agg)


def camera_metrics(
    pred: CameraTrajectory, gt: CameraTrajectory, agg: str = "mean"
) -> dict[str, float]:
    """RotErr / TransErr / CamMC after first-frame normalization of both."""
    pred_n = normalize_to_first(pred)
    gt_n = normalize_to_first(gt)
    return {
        "rot_err_deg": rot_err(pred_n, gt_n, agg),
        "trans_err": trans_err(pred_n, gt_n, agg),
        "cam_mc": cam_mc(pred_n, gt_n, agg),
    }


@dataclass(frozen=True)
class MovementThresholds:
    """Axis thresholds for movement classification.

    ``rotation_deg`` is the minimum net rotation per axis; translation must
    exceed ``translation_frac`` of the trajectory's maximum center norm.
    """

    rotation_deg: float = 5.0
    translation_frac: float = 0.05


def classify_movement(
    traj: CameraTrajectory, thresholds: MovementThresholds | None = None
) -> list[str]:
    """Net-motion movement labels for a trajectory (``["fixed"]`` if still).

    The trajectory is first-frame normalized; the final pose's net
    translation and rotation are decomposed onto camera axes, and each axis
    exceeding its threshold contributes a label.
    """
    if len(traj) < 2:
        raise ValueError("movement classification needs at least 2 frames")
    thresholds = thresholds or MovementThresholds()
    normalized = normalize_to_first(traj)
    last = normalized.poses[-1]

    labels = []
    centers = normalized.centers()
    max_norm = float(np.max(np.linalg.norm(centers, axis=1)))
    # floor guards against normalization float residue on static trajectories
    if max_norm > 1e-9:
        trans_thr = thresholds.translation_frac * max_norm
        ox, oy, oz = last.center()
        if oz > trans_thr:
            labels.append("forward")
        elif oz < -trans_thr:
            labels.append("backward")
        if ox > trans_thr:
            labels.append("right")
        elif ox < -trans_thr:
            labels.append("left")
        if oy > trans_thr:
            labels.append("down")  # +y is down in camera coordinates
        elif oy < -trans_thr:
            labels.append("up")

    cam_to_world = last.rotation.T
    forward = cam_to_world[:, 2]
    right = cam_to_world[:, 0]
    yaw = math.degrees(math.atan2(forward[0], forward[2]))
    pitch = math.degrees(math.atan2(-forward[1], math.hypot(forward[0], forward[2])))
    roll = math.degrees(math.atan2(right[1], right[0]))
    if yaw > thresholds.rotation_deg:
        labels.append("pan_right")
    elif yaw < -thresholds.rotation_deg:
        labels.append("pan_left")
    if pitch > thresholds.rotation_deg:
        labels.append("tilt_up")
    elif pitch < -thresholds.rotation_deg:
        labels.append("tilt_down")
    if roll > thresholds.rotation_deg:
        labels.append("roll_cw")
    elif roll < -thresholds.rotation_deg:
        labels.append("roll_ccw")

    return labels if labels else ["fixed"]


def describe_movement(labels: Sequence[str]) -> str:
    """Deterministic label-to-phrase mapping, comma joined."""
    if not labels:
        raise ValueError("describe_movement requires at least one label")
    phrases = []
    for label in labels:
        if label not in MOVEMENT_PHRASES:
            raise ValueError(f"unknown movement label {label!r}")
        phrases.append(MOVEMENT_PHRASES[label])
    return ", ".join(phrases)
