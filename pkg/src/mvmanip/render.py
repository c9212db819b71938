"""Re-render a point cloud into 7-channel virtual images.

Each view yields RGB (3), depth normalized to [0,1] over [near, far] (1), and
per-pixel world xyz (3). Background pixels carry depth exactly 1.0 and zero
rgb/xyz, so depth < 1 identifies foreground.

Camera convention: pose maps camera frame to world, the viewing axis is the
camera's -Z, image u runs along camera +X and image v along camera +Y. For
the downward-looking top view this makes u/v follow world x/y, so the box
corner (min_x, min_y) lands at pixel (0, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import PointCloud, RigidTransform, WorkspaceBox, rot_z

ORTHOGRAPHIC = "orthographic"
PERSPECTIVE = "perspective"

CUBE5 = "cube5"
CUBE3 = "cube3"
FRONT1 = "front1"
CUBE5_ROT15 = "cube5rot15"
CUSTOM = "custom"

# face order for the 5-view cube preset; cube3 keeps (front, top, left)
_CUBE5_FACES = ("top", "front", "back", "left", "right")
_CUBE3_FACES = ("front", "top", "left")

_FACE_AXES = {
    # face -> (camera z axis = away from box, image-down direction)
    "top": (np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 0.0])),
    "front": (np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, -1.0])),
    "back": (np.array([-1.0, 0.0, 0.0]), np.array([0.0, 0.0, -1.0])),
    "left": (np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, -1.0])),
    "right": (np.array([0.0, -1.0, 0.0]), np.array([0.0, 0.0, -1.0])),
}

PERSPECTIVE_FOV_Y = 90.0


@dataclass(frozen=True)
class VirtualCamera:
    """A rendering viewpoint; orthographic extents or vertical fov select the
    projection."""

    projection: str
    pose: RigidTransform
    near: float
    far: float
    ortho_halfwidth: float = 0.0
    ortho_halfheight: float = 0.0
    fov_y_deg: float = 0.0

    def __post_init__(self):
        if self.projection not in (ORTHOGRAPHIC, PERSPECTIVE):
            raise ValueError(f"unknown projection {self.projection!r}")
        if not self.near < self.far:
            raise ValueError("near must be < far")
        if self.projection == ORTHOGRAPHIC:
            if self.ortho_halfwidth <= 0 or self.ortho_halfheight <= 0:
                raise ValueError("orthographic extents must be positive")
        else:
            if not 0.0 < self.fov_y_deg < 180.0:
                raise ValueError("fov_y must be in (0, 180) degrees")

    @property
    def viewing_axis(self) -> np.ndarray:
        return -self.pose.rotation[:, 2]


@dataclass
class ViewImage:
    """One rendered view: rgb, normalized depth and world-xyz maps."""

    rgb: np.ndarray
    depth: np.ndarray
    xyz: np.ndarray

    @property
    def height(self) -> int:
        return self.depth.shape[0]

    @property
    def width(self) -> int:
        return self.depth.shape[1]

    def foreground_mask(self) -> np.ndarray:
        return self.depth < 1.0

    def channels(self, use_depth: bool = True, use_xyz: bool = True) -> np.ndarray:
        """Stack the selected channel groups into an HxWxC array."""
        parts = [self.rgb]
        if use_depth:
            parts.append(self.depth[..., None])
        if use_xyz:
            parts.append(self.xyz)
        return np.concatenate(parts, axis=-1)


@dataclass
class ViewSet:
    cameras: list
    preset: str = CUSTOM

    def __post_init__(self):
        if not self.cameras:
            raise ValueError("a view set needs at least one camera")

    def __len__(self) -> int:
        return len(self.cameras)

    def __iter__(self):
        return iter(self.cameras)


def _camera_pose(position, z_axis, image_down) -> RigidTransform:
    z = np.asarray(z_axis, dtype=np.float64)
    z = z / np.linalg.norm(z)
    y = np.asarray(image_down, dtype=np.float64)
    y = y - np.dot(y, z) * z
    n = np.linalg.norm(y)
    if n < 1e-9:
        raise ValueError("image-down direction is parallel to the viewing axis")
    y = y / n
    x = np.cross(y, z)
    rotation = np.stack([x, y, z], axis=1)
    return RigidTransform(rotation, np.asarray(position, dtype=np.float64))


def look_at_camera(
    position,
    target,
    projection: str,
    near: float,
    far: float,
    image_down=(0.0, 0.0, -1.0),
    ortho_halfwidth: float = 0.0,
    ortho_halfheight: float = 0.0,
    fov_y_deg: float = PERSPECTIVE_FOV_Y,
) -> VirtualCamera:
    """Build a camera at `position` looking toward `target`."""
    position = np.asarray(position, dtype=np.float64)
    z = position - np.asarray(target, dtype=np.float64)
    down = np.asarray(image_down, dtype=np.float64)
    if abs(np.dot(down, z) / np.linalg.norm(z)) > 0.99 * np.linalg.norm(down):
        down = np.array([0.0, 1.0, 0.0])  # fall back for near-vertical views
    pose = _camera_pose(position, z, down)
    return VirtualCamera(
        projection,
        pose,
        near,
        far,
        ortho_halfwidth=ortho_halfwidth,
        ortho_halfheight=ortho_halfheight,
        fov_y_deg=fov_y_deg,
    )


def _cube_camera(box, face, projection, yaw_offset_deg):
    span = float(np.max(box.halfspan))
    distance = 2.0 * span
    near = 0.5 * span
    far = 3.5 * span
    z_axis, image_down = _FACE_AXES[face]
    position = box.center + z_axis * distance
    if yaw_offset_deg:
        spin = rot_z(yaw_offset_deg)
        position = box.center + spin @ (position - box.center)
        z_axis = spin @ z_axis
        image_down = spin @ image_down
    # extents that keep the whole box visible under the preset's yaw
    r = np.deg2rad(abs(yaw_offset_deg))
    cover = span * (np.cos(r) + np.sin(r))
    if projection == ORTHOGRAPHIC:
        return VirtualCamera(
            ORTHOGRAPHIC,
            _camera_pose(position, z_axis, image_down),
            near,
            far,
            ortho_halfwidth=cover,
            ortho_halfheight=cover,
        )
    return VirtualCamera(
        PERSPECTIVE,
        _camera_pose(position, z_axis, image_down),
        near,
        far,
        fov_y_deg=PERSPECTIVE_FOV_Y,
    )


def cube_views(
    box: WorkspaceBox, preset: str = CUBE5, projection: str = ORTHOGRAPHIC
) -> ViewSet:
    """Cameras on the workspace cube: 5 faces, the (front, top, left) triple,
    the single front view, or the 5-face set spun 15 degrees about vertical."""
    if preset == CUBE5:
        faces, yaw = _CUBE5_FACES, 0.0
    elif preset == CUBE3:
        faces, yaw = _CUBE3_FACES, 0.0
    elif preset == FRONT1:
        faces, yaw = ("front",), 0.0
    elif preset == CUBE5_ROT15:
        faces, yaw = _CUBE5_FACES, 15.0
    else:
        raise ValueError(f"unknown cube preset {preset!r}")
    cams = [_cube_camera(box, f, projection, yaw) for f in faces]
    return ViewSet(cams, preset=preset)


def sensor_views(box: WorkspaceBox, projection: str = PERSPECTIVE) -> ViewSet:
    """A 4-camera rig mimicking fixed sensor placements (front, two shoulder
    views, and a high wrist-like view); oblique, not axis-aligned."""
    span = float(np.max(box.halfspan))
    distance = 2.0 * span
    near = 0.5 * span
    far = 3.5 * span
    directions = [
        np.array([1.0, 0.0, 0.75]),
        np.array([-0.6, 1.0, 0.75]),
        np.array([-0.6, -1.0, 0.75]),
        np.array([0.4, 0.0, 1.0]),
    ]
    cams = []
    for d in directions:
        d = d / np.linalg.norm(d)
        cams.append(
            look_at_camera(
                box.center + d * distance,
                box.center,
                projection,
                near,
                far,
                ortho_halfwidth=1.75 * span,
                ortho_halfheight=1.75 * span,
                fov_y_deg=PERSPECTIVE_FOV_Y,
            )
        )
    return ViewSet(cams, preset=CUSTOM)


def project_points(cam: VirtualCamera, points: np.ndarray, width: int, height: int):
    """Project world points to continuous pixel coordinates.

    Returns (u, v, d, in_bounds): u/v in pixels, d the distance along the
    viewing axis in meters, in_bounds true when the pixel lies inside the
    image and near <= d <= far.
    """
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    pc = (p - cam.pose.translation) @ cam.pose.rotation
    d = -pc[:, 2]
    if cam.projection == ORTHOGRAPHIC:
        u = (pc[:, 0] / cam.ortho_halfwidth + 1.0) * 0.5 * width
        v = (pc[:, 1] / cam.ortho_halfheight + 1.0) * 0.5 * height
    else:
        tan_half = np.tan(np.deg2rad(cam.fov_y_deg) * 0.5)
        aspect = width / height
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (pc[:, 0] / (d * tan_half * aspect) + 1.0) * 0.5 * width
            v = (pc[:, 1] / (d * tan_half) + 1.0) * 0.5 * height
    with np.errstate(invalid="ignore"):
        in_bounds = (
            (u >= 0) & (u < width) & (v >= 0) & (v < height) & (d >= cam.near) & (d <= cam.far)
        )
    if cam.projection == PERSPECTIVE:
        in_bounds &= d > 0
    return u, v, d, in_bounds


def project_point(cam: VirtualCamera, point, width: int, height: int):
    """Single-point convenience wrapper around project_points."""
    u, v, d, ok = project_points(cam, np.asarray(point, dtype=np.float64)[None], width, height)
    return float(u[0]), float(v[0]), float(d[0]), bool(ok[0])


def render(
    cloud: PointCloud,
    cam: VirtualCamera,
    height: int,
    width: int,
    splat_radius: int = 1,
) -> ViewImage:
    """Rasterize the cloud with a z-buffer.

    Every point with a valid depth writes its rgb / normalized depth / world
    xyz into all pixels within `splat_radius` (Chebyshev) of its projected
    pixel; per pixel the smallest depth wins, ties going to the smallest point
    index. Rendering is single-pass and order-independent.
    """
    if height < 1 or width < 1:
        raise ValueError("image size must be at least 1x1")
    if splat_radius < 0:
        raise ValueError("splat_radius must be >= 0")

    rgb = np.zeros((height, width, 3), dtype=np.float32)
    depth = np.ones((height, width), dtype=np.float32)
    xyz = np.zeros((height, width, 3), dtype=np.float32)
    if len(cloud) == 0:
        return ViewImage(rgb, depth, xyz)

    u, v, d, _ = project_points(cam, cloud.positions, width, height)
    z_norm = (d - cam.near) / (cam.far - cam.near)
    valid = (z_norm >= 0.0) & (z_norm < 1.0) & np.isfinite(u) & np.isfinite(v)
    if cam.projection == PERSPECTIVE:
        valid &= d > 0
    idx = np.nonzero(valid)[0]
    if idx.size == 0:
        return ViewImage(rgb, depth, xyz)

    px = np.floor(u[idx]).astype(np.int64)
    py = np.floor(v[idx]).astype(np.int64)
    zb = z_norm[idx]

    offsets = np.arange(-splat_radius, splat_radius + 1)
    ox, oy = np.meshgrid(offsets, offsets, indexing="xy")
    ox = ox.ravel()
    oy = oy.ravel()

    all_x = (px[:, None] + ox[None, :]).ravel()
    all_y = (py[:, None] + oy[None, :]).ravel()
    all_idx = np.repeat(idx, ox.size)
    all_z = np.repeat(zb, ox.size)

    keep = (all_x >= 0) & (all_x < width) & (all_y >= 0) & (all_y < height)
    if not np.any(keep):
        return ViewImage(rgb, depth, xyz)
    all_x, all_y, all_idx, all_z = all_x[keep], all_y[keep], all_idx[keep], all_z[keep]

    flat = all_y * width + all_x
    # winner per pixel: smallest depth, then smallest point index
    order = np.lexsort((all_idx, all_z, flat))
    flat_sorted = flat[order]
    first = np.ones(flat_sorted.size, dtype=bool)
    first[1:] = flat_sorted[1:] != flat_sorted[:-1]
    win = order[first]

    wy, wx = np.divmod(flat[win], width)
    src = all_idx[win]
    rgb[wy, wx] = cloud.colors[src].astype(np.float32)
    depth[wy, wx] = all_z[win].astype(np.float32)
    xyz[wy, wx] = cloud.positions[src].astype(np.float32)
    return ViewImage(rgb, depth, xyz)


def render_views(cloud, cameras: ViewSet, height: int, width: int, splat_radius: int = 1):
    return [render(cloud, cam, height, width, splat_radius) for cam in cameras]


def save_ppm(path, image: np.ndarray):
    """Write an HxWx3 float [0,1] image as binary 8-bit PPM."""
    arr = np.clip(np.asarray(image), 0.0, 1.0)
    data = (arr * 255.0 + 0.5).astype(np.uint8)
    h, w = data.shape[:2]
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def save_pgm(path, image: np.ndarray, lo: float, hi: float):
    """Write an HxW scalar map as 8-bit PGM, linearly scaled from [lo, hi]."""
    arr = np.asarray(image, dtype=np.float64)
    scale = hi - lo if hi > lo else 1.0
    data = (np.clip((arr - lo) / scale, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def export_view(view: ViewImage, prefix: str):
    """Dump a view's channel groups as PPM/PGM plus a sidecar with value
    ranges; returns the written paths."""
    paths = [f"{prefix}_rgb.ppm"]
    save_ppm(paths[0], view.rgb)
    ranges = {"rgb": [0.0, 1.0], "depth": [0.0, 1.0]}
    p = f"{prefix}_depth.pgm"
    save_pgm(p, view.depth, 0.0, 1.0)
    paths.append(p)
    for k, axis in enumerate("xyz"):
        chan = view.xyz[:, :, k]
        lo, hi = float(chan.min()), float(chan.max())
        ranges[f"xyz_{axis}"] = [lo, hi]
        p = f"{prefix}_xyz_{axis}.pgm"
        save_pgm(p, chan, lo, hi)
        paths.append(p)
    sidecar = f"{prefix}_channels.txt"
    with open(sidecar, "w") as f:
        for name, (lo, hi) in ranges.items():
            f.write(f"{name} min {lo:.9g} max {hi:.9g}\n")
    paths.append(sidecar)
    return paths
