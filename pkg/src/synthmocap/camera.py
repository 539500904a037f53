"""Pinhole cameras: look-at view matrices, perspective projection, ring rigs.

Conventions: right-handed world, Y-up; view space looks down -Z; NDC depth
runs from -1 at the near plane to +1 at the far plane. Matrices are 4x4
row-major ``float64`` arrays acting on column vectors.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


class CameraError(ValueError):
    pass


def _vec3(v) -> tuple[float, float, float]:
    v = tuple(float(x) for x in v)
    if len(v) != 3 or not all(math.isfinite(x) for x in v):
        raise CameraError(f"expected a finite 3-vector, got {v}")
    return v


@dataclass(frozen=True)
class CameraExtrinsics:
    eye: tuple[float, float, float]
    focal_point: tuple[float, float, float]
    up: tuple[float, float, float] = (0.0, 1.0, 0.0)

    def __post_init__(self):
        for name in ("eye", "focal_point", "up"):
            object.__setattr__(self, name, _vec3(getattr(self, name)))
        forward = np.subtract(self.focal_point, self.eye)
        dist = np.linalg.norm(forward)
        if dist == 0:
            raise CameraError("eye and focal_point coincide")
        up_norm = np.linalg.norm(self.up)
        if up_norm == 0:
            raise CameraError("up vector is zero")
        sin_angle = np.linalg.norm(np.cross(forward / dist, np.asarray(self.up) / up_norm))
        if sin_angle < math.sin(1e-6):
            raise CameraError("up vector is parallel to the viewing direction")


@dataclass(frozen=True)
class CameraIntrinsics:
    vertical_fov: float = 45.0
    width: int = 640
    height: int = 480
    near: float = 0.1
    far: float = 10000.0

    def __post_init__(self):
        if not 0 < self.vertical_fov < 180:
            raise CameraError(f"vertical_fov must lie in (0, 180), got {self.vertical_fov}")
        if int(self.width) != self.width or int(self.height) != self.height \
                or self.width < 1 or self.height < 1:
            raise CameraError(f"image size must be positive integers, got {self.width}x{self.height}")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        if not (0 < self.near < self.far and math.isfinite(self.far)):
            raise CameraError(f"need 0 < near < far, got near={self.near} far={self.far}")

    @property
    def aspect(self) -> float:
        return self.width / self.height


@dataclass(frozen=True)
class Camera:
    id: str
    extrinsics: CameraExtrinsics
    intrinsics: CameraIntrinsics

    @property
    def view(self) -> np.ndarray:
        return view_matrix(self.extrinsics)

    @property
    def projection(self) -> np.ndarray:
        return projection_matrix(self.intrinsics)

    def with_focal_point(self, focal_point) -> "Camera":
        ext = CameraExtrinsics(self.extrinsics.eye, focal_point, self.extrinsics.up)
        return Camera(self.id, ext, self.intrinsics)

    def to_dict(self) -> dict:
        e, i = self.extrinsics, self.intrinsics
        return {"id": self.id, "eye": list(e.eye), "focal_point": list(e.focal_point),
                "up": list(e.up), "fov_deg": i.vertical_fov, "width": i.width,
                "height": i.height, "near": i.near, "far": i.far}

    @classmethod
    def from_dict(cls, doc: dict) -> "Camera":
        return cls(doc.get("id", ""),
                   CameraExtrinsics(doc["eye"], doc["focal_point"], doc["up"]),
                   CameraIntrinsics(doc["fov_deg"], doc["width"], doc["height"],
                                    doc["near"], doc["far"]))


def view_matrix(extrinsics: CameraExtrinsics) -> np.ndarray:
    eye = np.asarray(extrinsics.eye)
    forward = np.asarray(extrinsics.focal_point) - eye
    forward /= np.linalg.norm(forward)
    side = np.cross(forward, extrinsics.up)
    side /= np.linalg.norm(side)
    up = np.cross(side, forward)
    view = np.eye(4)
    view[0, :3] = side
    view[1, :3] = up
    view[2, :3] = -forward
    view[:3, 3] = -view[:3, :3] @ eye
    return view


def projection_matrix(intrinsics: CameraIntrinsics) -> np.ndarray:
    """OpenGL-style perspective matrix (NDC depth in [-1, 1])."""
    f = 1.0 / math.tan(math.radians(intrinsics.vertical_fov) / 2)
    n, fa = intrinsics.near, intrinsics.far
    proj = np.zeros((4, 4))
    proj[0, 0] = f / intrinsics.aspect
    proj[1, 1] = f
    proj[2, 2] = (fa + n) / (n - fa)
    proj[2, 3] = 2 * fa * n / (n - fa)
    proj[3, 2] = -1.0
    return proj


def unproject(ndc_xy, view_z: float, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Invert projection for a point with known view-space depth ``view_z``."""
    f = 1.0 / math.tan(math.radians(intrinsics.vertical_fov) / 2)
    x, y = float(ndc_xy[0]), float(ndc_xy[1])
    return np.array([-x * view_z * intrinsics.aspect / f, -y * view_z / f, view_z])


def build_ring_rig(center, radius: float, height: float, count: int,
                   intrinsics: CameraIntrinsics) -> list[Camera]:
    """``count`` cameras evenly spaced on a horizontal circle, all aimed at ``center``.

    Camera ``k`` sits at ``center + (radius cos t, height, radius sin t)`` with
    ``t = 2 pi k / count``.
    """
    if not radius > 0:
        raise CameraError(f"radius must be positive, got {radius}")
    if int(count) != count or count < 1:
        raise CameraError(f"count must be a positive integer, got {count}")
    center = _vec3(center)
    cams = []
    for k in range(int(count)):
        theta = 2 * math.pi * k / count
        eye = (center[0] + radius * math.cos(theta), center[1] + height,
               center[2] + radius * math.sin(theta))
        cams.append(Camera(f"cam{k:02d}", CameraExtrinsics(eye, center, (0.0, 1.0, 0.0)), intrinsics))
    return cams


@dataclass(frozen=True)
class RigConfig:
    """Ring rig settings. ``radius``/``height`` of ``None`` are derived from
    the clip as 2.5x and 0.8x its framing radius."""

    count: int = 12
    radius: float | None = None
    height: float | None = None
    fov_deg: float = 45.0
    width: int = 640
    height_px: int = 480
    near: float = 0.1
    far: float = 10000.0
    track_root: bool = False

    @property
    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics(self.fov_deg, self.width, self.height_px, self.near, self.far)

    def to_dict(self) -> dict:
        return asdict(self)


RADIUS_FACTOR = 2.5
HEIGHT_FACTOR = 0.8


def framing(world_positions: np.ndarray, root: int = 0) -> tuple[np.ndarray, float]:
    """Centroid of the root trajectory and the radius of a sphere about it
    that contains every joint of every frame.

    ``world_positions`` has shape (F, J, 3).
    """
    centroid = world_positions[:, root].mean(axis=0)
    reach = float(np.linalg.norm(world_positions - centroid, axis=-1).max())
    return centroid, reach


def rig_for_clip(world_positions: np.ndarray, config: RigConfig, root: int = 0) -> list[Camera]:
    centroid, reach = framing(world_positions, root)
    reach = reach if reach > 0 else 1.0
    radius = config.radius if config.radius is not None else RADIUS_FACTOR * reach
    height = config.height if config.height is not None else HEIGHT_FACTOR * reach
    return build_ring_rig(centroid, radius, height, config.count, config.intrinsics)
