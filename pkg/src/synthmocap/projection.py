"""World -> view -> NDC -> pixel chain for joint annotations.

Pixel coordinates put the centre of the top-left pixel at (0, 0), with x to
the right and y down; NDC -1..1 spans pixel centres 0..width-1. Keypoint
arrays are (J, 3): ``x, y, visible`` with ``visible`` in {0, 1}.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .camera import Camera, CameraIntrinsics
from .skeleton import WorldPose

_MIN_W = 1e-12


class Keypoint2D(NamedTuple):
    x: float
    y: float
    visible: bool


def world_to_view(points, view: np.ndarray) -> np.ndarray:
    """Apply a view matrix to (N, 3) world points; returns (N, 3) view points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    homo = np.concatenate([pts, np.ones((len(pts), 1))], axis=1) @ np.asarray(view).T
    return homo[:, :3] / homo[:, 3:4]


def view_to_ndc(points_view, proj: np.ndarray) -> np.ndarray:
    pts = np.asarray(points_view, dtype=float).reshape(-1, 3)
    clip = np.concatenate([pts, np.ones((len(pts), 1))], axis=1) @ np.asarray(proj).T
    # points behind the camera have w <= 0; dividing by |w| keeps them from mirroring
    w = np.abs(clip[:, 3:4])
    return clip[:, :3] / np.maximum(w, _MIN_W)


def ndc_to_pixels(ndc, width: int, height: int) -> np.ndarray:
    ndc = np.atleast_2d(np.asarray(ndc, dtype=float))
    x = (ndc[:, 0] + 1) / 2 * (width - 1)
    y = (1 - ndc[:, 1]) / 2 * (height - 1)
    return np.stack([x, y], axis=1)


def view_to_image_many(points_view, proj: np.ndarray, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Vectorized :func:`view_to_image`; returns (N, 3) keypoints."""
    pts = np.asarray(points_view, dtype=float).reshape(-1, 3)
    px = ndc_to_pixels(view_to_ndc(pts, proj), intrinsics.width, intrinsics.height)
    visible = ((pts[:, 2] < -intrinsics.near)
               & (px[:, 0] >= 0) & (px[:, 0] <= intrinsics.width - 1)
               & (px[:, 1] >= 0) & (px[:, 1] <= intrinsics.height - 1))
    return np.concatenate([px, visible[:, None].astype(float)], axis=1)


def view_to_image(p, proj: np.ndarray, intrinsics: CameraIntrinsics) -> Keypoint2D:
    x, y, v = view_to_image_many(np.asarray(p, dtype=float)[None, :], proj, intrinsics)[0]
    return Keypoint2D(float(x), float(y), bool(v))


def project_points(points_world, camera: Camera) -> tuple[np.ndarray, np.ndarray]:
    view3d = world_to_view(points_world, camera.view)
    return view_to_image_many(view3d, camera.projection, camera.intrinsics), view3d


def project_joints(world_pose: WorldPose, camera: Camera) -> tuple[np.ndarray, np.ndarray]:
    """Keypoints (J, 3) and view-space joints (J, 3) for one pose seen by one camera."""
    return project_points(world_pose.positions, camera)
