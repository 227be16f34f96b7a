"""Human-pose track handling (parsing, skeleton rasterization, keypoint
accuracy) and depth-sequence comparison."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class PoseFormatError(ValueError):
    """Malformed pose track file contents."""


@dataclass(frozen=True)
class SkeletonTopology:
    """Keypoint names plus bone connectivity as index pairs."""

    names: tuple[str, ...]
    bones: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "bones", tuple(tuple(b) for b in self.bones))
        k = len(self.names)
        for a, b in self.bones:
            if a == b:
                raise ValueError(f"self-loop bone ({a}, {b})")
            if not (0 <= a < k and 0 <= b < k):
                raise ValueError(f"bone ({a}, {b}) out of range for {k} keypoints")

    @property
    def num_keypoints(self) -> int:
        return len(self.names)


#: 17-keypoint COCO-style skeleton shipped as the default topology.
COCO17 = SkeletonTopology(
    names=(
        "nose", "left_eye", "right_eye", "left_ear", "right_ear",
        "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
        "left_wrist", "right_wrist", "left_hip", "right_hip",
        "left_knee", "right_knee", "left_ankle", "right_ankle",
    ),
    bones=(
        (15, 13), (13, 11), (16, 14), (14, 12), (11, 12),
        (5, 11), (6, 12), (5, 6), (5, 7), (6, 8), (7, 9), (8, 10),
        (1, 2), (0, 1), (0, 2), (1, 3), (2, 4), (3, 5), (4, 6),
    ),
)


def load_topology(path: str | Path) -> SkeletonTopology:
    """Load a topology file: JSON with ``names`` and ``bones`` lists."""
    data = json.loads(Path(path).read_text())
    return SkeletonTopology(tuple(data["names"]), tuple(map(tuple, data["bones"])))


@dataclass(frozen=True, eq=False)
class PoseTrack:
    """One person's keypoints over time.

    ``points`` has shape (N, K, 3) holding x, y in [0, 1] normalized image
    coordinates and a confidence in [0, 1].
    """

    person_id: str
    frame_indices: tuple[int, ...]
    points: np.ndarray

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "frame_indices", tuple(self.frame_indices))
        if points.ndim != 3 or points.shape[2] != 3:
            raise ValueError(f"points must be (N, K, 3), got {points.shape}")
        if points.shape[0] < 1 or points.shape[1] < 1:
            raise ValueError("track needs at least one frame and one keypoint")
        if len(self.frame_indices) != points.shape[0]:
            raise ValueError("frame_indices and points length mismatch")
        if not np.all(np.isfinite(points)):
            raise ValueError("keypoints must be finite")
        object.__setattr__(self, "points", points)

    @property
    def num_frames(self) -> int:
        return self.points.shape[0]

    @property
    def num_keypoints(self) -> int:
        return self.points.shape[1]


def load_pose_tracks(path: str | Path) -> list[PoseTrack]:
    """Parse line-delimited pose records into one track per person id.

    Each line is JSON: ``{person_id, frame_idx, keypoints: [[x, y, conf], ...]}``.
    The keypoint count must be constant within a track.
    """
    by_person: dict[str, list[tuple[int, list]]] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            person = str(record["person_id"])
            frame_idx = int(record["frame_idx"])
            keypoints = record["keypoints"]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise PoseFormatError(f"{path}: line {lineno}: {exc}") from exc
        rows = by_person.setdefault(person, [])
        if rows and len(keypoints) != len(rows[0][1]):
            raise PoseFormatError(
                f"{path}: line {lineno}: person {person!r} has {len(keypoints)} "
                f"keypoints, expected {len(rows[0][1])}"
            )
        rows.append((frame_idx, keypoints))

    tracks = []
    for person, rows in by_person.items():
        rows.sort(key=lambda item: item[0])
        indices = tuple(idx for idx, _ in rows)
        if len(set(indices)) != len(indices):
            raise PoseFormatError(f"{path}: duplicate frame index for person {person!r}")
        points = np.asarray([kp for _, kp in rows], dtype=float)
        tracks.append(PoseTrack(person, indices, points))
    return tracks


def _to_pixel(x: float, y: float, height: int, width: int) -> tuple[int, int]:
    px = min(width - 1, max(0, int(x * width)))
    py = min(height - 1, max(0, int(y * height)))
    return px, py


def _draw_line(mask: np.ndarray, x0: int, y0: int, x1: int, y1: int) -> None:
    # Bresenham stepping; endpoints inclusive.
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        mask[y, x] = True
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def rasterize_pose(
    track: PoseTrack,
    topology: SkeletonTopology,
    height: int,
    width: int,
    conf_min: float = 0.5,
) -> np.ndarray:
    """Draw the skeleton into (N, H, W) boolean masks.

    Bones whose endpoints both reach ``conf_min`` become 1-pixel line
    segments; confident keypoints become 3x3 squares. Output depends only
    on which confidences clear the threshold, not on their exact values.
    """
    if height < 8 or width < 8:
        raise ValueError("mask size must be at least 8x8")
    if topology.num_keypoints != track.num_keypoints:
        raise ValueError(
            f"topology has {topology.num_keypoints} keypoints, track has {track.num_keypoints}"
        )
    masks = np.zeros((track.num_frames, height, width), dtype=bool)
    for n in range(track.num_frames):
        frame = track.points[n]
        visible = frame[:, 2] >= conf_min
        pixels = [
            _to_pixel(frame[k, 0], frame[k, 1], height, width)
            for k in range(track.num_keypoints)
        ]
        for a, b in topology.bones:
            if visible[a] and visible[b]:
                _draw_line(masks[n], *pixels[a], *pixels[b])
        for k in range(track.num_keypoints):
            if visible[k]:
                px, py = pixels[k]
                masks[n, max(0, py - 1) : py + 2, max(0, px - 1) : px + 2] = True
    return masks


def pose_accuracy(pred: PoseTrack, gt: PoseTrack, alpha: float = 0.05) -> float:
    """PCK-style keypoint accuracy as a percentage.

    Per frame, the ground-truth bounding box is the tight box over gt
    keypoints with confidence >= 0.5; a predicted keypoint is correct when
    its distance to the gt keypoint is at most ``alpha * max(box_w, box_h)``.
    Keypoints whose gt confidence is below 0.5 are excluded.
    """
    if pred.points.shape != gt.points.shape:
        raise ValueError(
            f"shape mismatch: pred {pred.points.shape} vs gt {gt.points.shape}"
        )
    correct = 0
    evaluated = 0
    for n in range(gt.num_frames):
        gt_frame = gt.points[n]
        keep = gt_frame[:, 2] >= 0.5
        if not np.any(keep):
            continue
        xy = gt_frame[keep, :2]
        box_w = float(xy[:, 0].max() - xy[:, 0].min())
        box_h = float(xy[:, 1].max() - xy[:, 1].min())
        threshold = alpha * max(box_w, box_h)
        dists = np.linalg.norm(pred.points[n, keep, :2] - xy, axis=1)
        correct += int(np.sum(dists <= threshold))
        evaluated += int(np.sum(keep))
    if evaluated == 0:
        raise ValueError("no keypoints with gt confidence >= 0.5 to evaluate")
    return 100.0 * correct / evaluated


DEPTH_MAGIC = 0x44505448  # "DPTH"
DEPTH_VERSION = 1


def validate_depth(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 3:
        raise ValueError(f"depth sequence must be (N, H, W), got {values.shape}")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ValueError("depth values must be finite and non-negative")
    return values


def write_depth(values: np.ndarray, path: str | Path) -> None:
    """Write a depth sequence as little-endian float32 with a 5-uint32
    header (magic, version, N, H, W)."""
    values = validate_depth(values)
    header = np.array([DEPTH_MAGIC, DEPTH_VERSION, *values.shape], dtype="<u4")
    with open(path, "wb") as fh:
        header.tofile(fh)
        values.astype("<f4").tofile(fh)


def read_depth(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = np.fromfile(fh, dtype="<u4", count=5)
        if header.size != 5 or header[0] != DEPTH_MAGIC:
            raise ValueError(f"{path}: not a depth sequence file")
        if header[1] != DEPTH_VERSION:
            raise ValueError(f"{path}: unsupported version {header[1]}")
        n, height, width = (int(v) for v in header[2:])
        data = np.fromfile(fh, dtype="<f4", count=n * height * width)
    if data.size != n * height * width:
        raise ValueError(f"{path}: truncated data section")
    return data.astype(float).reshape(n, height, width)


def load_depth_images(manifest_path: str | Path) -> np.ndarray:
    """Load a depth sequence from a JSON manifest of 16-bit grayscale images.

    The manifest holds ``{"frames": [path, ...]}`` with paths relative to
    the manifest file.
    """
    from PIL import Image

    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    frames = []
    for rel in manifest["frames"]:
        with Image.open(manifest_path.parent / rel) as img:
            frames.append(np.asarray(img, dtype=float))
    if not frames:
        raise ValueError(f"{manifest_path}: empty frame list")
    return validate_depth(np.stack(frames))


def _minmax_normalize(values: np.ndarray) -> np.ndarray:
    flat = values.reshape(values.shape[0], -1)
    lo = flat.min(axis=1)[:, None, None]
    hi = flat.max(axis=1)[:, None, None]
    span = hi - lo
    out = np.zeros_like(values, dtype=float)
    nondegenerate = (span > 0).reshape(-1)
    out[nondegenerate] = (values[nondegenerate] - lo[nondegenerate]) / span[nondegenerate]
    return out


def depth_mae(pred: np.ndarray, gt: np.ndarray) -> float:
    """Mean absolute error between per-frame min-max normalized sequences.

    Each frame of each sequence is independently mapped to [0, 1] (constant
    frames map to 0), which cancels per-frame affine depth ambiguity.
    """
    pred = validate_depth(pred)
    gt = validate_depth(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs gt {gt.shape}")
    return float(np.mean(np.abs(_minmax_normalize(pred) - _minmax_normalize(gt))))
