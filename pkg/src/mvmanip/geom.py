"""World-frame geometry: rigid transforms, point clouds, RGB-D unprojection,
workspace cropping and scene augmentation.

Conventions used across the repo:
  * positions are meters in a fixed world frame, z up
  * rotations are 3x3 orthonormal matrices (det +1)
  * Euler angles are intrinsic Z-Y-X in degrees, stored as (z, y, x);
    R = Rz(e[0]) @ Ry(e[1]) @ Rx(e[2])
  * angles are wrapped to [0, 360)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ROT_TOL = 1e-6


def as_vec3(v) -> np.ndarray:
    """Coerce to a finite float64 3-vector."""
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"expected 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite components")
    return a


def wrap_deg(angle):
    """Wrap angle(s) in degrees to [0, 360)."""
    return np.mod(angle, 360.0)


def rot_x(deg: float) -> np.ndarray:
    r = np.deg2rad(deg)
    c, s = np.cos(r), np.sin(r)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=np.float64)


def rot_y(deg: float) -> np.ndarray:
    r = np.deg2rad(deg)
    c, s = np.cos(r), np.sin(r)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=np.float64)


def rot_z(deg: float) -> np.ndarray:
    r = np.deg2rad(deg)
    c, s = np.cos(r), np.sin(r)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=np.float64)


def euler_zyx_to_matrix(euler_zyx) -> np.ndarray:
    """Rotation matrix from intrinsic Z-Y-X Euler angles in degrees."""
    e = as_vec3(euler_zyx)
    return rot_z(e[0]) @ rot_y(e[1]) @ rot_x(e[2])


@dataclass(frozen=True)
class RigidTransform:
    """SE(3) element: x -> rotation @ x + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        t = as_vec3(self.translation)
        if r.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {r.shape}")
        if not np.allclose(r @ r.T, np.eye(3), atol=ROT_TOL):
            raise ValueError("rotation is not orthonormal")
        if not np.isclose(np.linalg.det(r), 1.0, atol=ROT_TOL):
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Apply to one (3,) point or an (N, 3) array of points."""
        p = np.asarray(points, dtype=np.float64)
        return p @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self after other: (self.compose(other)).apply(x) == self.apply(other.apply(x))."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)


@dataclass
class PointCloud:
    """N world-frame points with RGB colors in [0, 1]."""

    positions: np.ndarray
    colors: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        c = np.asarray(self.colors, dtype=np.float64).reshape(-1, 3)
        if p.shape[0] != c.shape[0]:
            raise ValueError(
                f"positions ({p.shape[0]}) and colors ({c.shape[0]}) disagree on N"
            )
        if not np.all(np.isfinite(p)):
            raise ValueError("positions contain non-finite values")
        if c.size and (c.min() < 0.0 or c.max() > 1.0):
            raise ValueError("colors must lie in [0, 1]")
        self.positions = p
        self.colors = c

    def __len__(self) -> int:
        return self.positions.shape[0]

    @staticmethod
    def empty() -> "PointCloud":
        return PointCloud(np.zeros((0, 3)), np.zeros((0, 3)))

    @staticmethod
    def concatenate(clouds) -> "PointCloud":
        if not clouds:
            return PointCloud.empty()
        return PointCloud(
            np.concatenate([c.positions for c in clouds], axis=0),
            np.concatenate([c.colors for c in clouds], axis=0),
        )


@dataclass(frozen=True)
class PinholeCamera:
    """Sensor model for RGB-D unprojection. pose maps camera frame to world."""

    fx: float
    fy: float
    cx: float
    cy: float
    pose: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")


@dataclass(frozen=True)
class WorkspaceBox:
    """Axis-aligned workspace bounds, meters."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = as_vec3(self.min)
        hi = as_vec3(self.max)
        if not np.all(lo < hi):
            raise ValueError(f"box min {lo} must be < max {hi} componentwise")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @staticmethod
    def default() -> "WorkspaceBox":
        return WorkspaceBox(np.array([-0.5, -0.5, -0.5]), np.array([0.5, 0.5, 0.5]))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.min + self.max)

    @property
    def halfspan(self) -> np.ndarray:
        return 0.5 * (self.max - self.min)

    def contains(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        return np.all((p >= self.min) & (p <= self.max), axis=1)


def unproject_rgbd(rgb: np.ndarray, depth: np.ndarray, cam: PinholeCamera) -> PointCloud:
    """Lift an RGB-D image to a world-frame point cloud.

    Pixels with depth exactly 0 are invalid and dropped. A pixel (u, v) with
    depth d maps to d * [(u - cx) / fx, (v - cy) / fy, 1] in the camera frame,
    then through the camera pose.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    depth = np.asarray(depth, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"rgb must be HxWx3, got {rgb.shape}")
    if depth.shape != rgb.shape[:2]:
        raise ValueError(f"rgb {rgb.shape[:2]} and depth {depth.shape} shapes differ")
    if np.any(depth < 0):
        raise ValueError("depth must be non-negative")

    h, w = depth.shape
    vv, uu = np.nonzero(depth > 0)
    if vv.size == 0:
        return PointCloud.empty()
    d = depth[vv, uu]
    x = (uu - cam.cx) / cam.fx * d
    y = (vv - cam.cy) / cam.fy * d
    pts_cam = np.stack([x, y, d], axis=1)
    return PointCloud(cam.pose.apply(pts_cam), rgb[vv, uu])


def pinhole_project(cam: PinholeCamera, points: np.ndarray):
    """Project world points through the sensor model; returns (u, v, depth)."""
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    pc = cam.pose.inverse().apply(p)
    z = pc[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = cam.fx * pc[:, 0] / z + cam.cx
        v = cam.fy * pc[:, 1] / z + cam.cy
    return u, v, z


def transform_cloud(cloud: PointCloud, transform: RigidTransform) -> PointCloud:
    """Rigidly move every point; colors are untouched."""
    return PointCloud(transform.apply(cloud.positions), cloud.colors)


def crop_to_workspace(cloud: PointCloud, box: WorkspaceBox) -> PointCloud:
    """Keep points with box.min <= p <= box.max componentwise, original order."""
    keep = box.contains(cloud.positions)
    return PointCloud(cloud.positions[keep], cloud.colors[keep])


def sample_augment_params(rng_seed: int, t_range: float, yaw_range_deg: float):
    """Draw the scene perturbation: uniform yaw (deg) and per-axis translation (m)."""
    rng = np.random.default_rng(rng_seed)
    yaw = rng.uniform(-yaw_range_deg, yaw_range_deg) if yaw_range_deg > 0 else 0.0
    t = rng.uniform(-t_range, t_range, size=3) if t_range > 0 else np.zeros(3)
    return yaw, t


def augment(
    cloud: PointCloud,
    gt_translation,
    gt_euler_zyx,
    rng_seed: int,
    t_range: float = 0.125,
    yaw_range_deg: float = 45.0,
):
    """Apply one random world-frame perturbation to scene and labels alike.

    A rotation about the vertical axis followed by a translation, both drawn
    uniformly within the given ranges, moves the cloud and the ground-truth
    pose together; the label's yaw component is shifted by the sampled angle.

    Returns (cloud, translation, euler_zyx) after the perturbation.
    """
    gt_t = as_vec3(gt_translation)
    gt_e = as_vec3(gt_euler_zyx)
    yaw, t = sample_augment_params(rng_seed, t_range, yaw_range_deg)
    if yaw == 0.0 and not np.any(t):
        return cloud, gt_t, wrap_deg(gt_e)
    move = RigidTransform(rot_z(yaw), t)
    new_euler = np.array([wrap_deg(gt_e[0] + yaw), wrap_deg(gt_e[1]), wrap_deg(gt_e[2])])
    return transform_cloud(cloud, move), move.apply(gt_t), new_euler
