"""Stick-figure rasterization, background compositing and grayscale.

Images are ``uint8`` numpy arrays of shape (H, W, 4) (RGBA) or (H, W, 3).
Pixel (row r, column c) has its centre at image coordinate (x=c, y=r), the
same convention the projection module uses for keypoints.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .camera import Camera
from .projection import project_joints
from .skeleton import Skeleton, WorldPose

PNG_COMPRESS_LEVEL = 3


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class RenderStyle:
    bone_thickness: float = 3.0
    joint_radius: float = 2.0
    bone_color: tuple[int, int, int] = (235, 235, 235)
    joint_color: tuple[int, int, int] = (255, 64, 32)


def blank(width: int, height: int) -> np.ndarray:
    if width < 1 or height < 1:
        raise RenderError(f"image size must be positive, got {width}x{height}")
    return np.zeros((height, width, 4), dtype=np.uint8)


def _window(x0, y0, x1, y1, width, height):
    c0, c1 = max(int(np.floor(x0)), 0), min(int(np.ceil(x1)), width - 1)
    r0, r1 = max(int(np.floor(y0)), 0), min(int(np.ceil(y1)), height - 1)
    if c0 > c1 or r0 > r1:
        return None
    cols = np.arange(c0, c1 + 1, dtype=float)
    rows = np.arange(r0, r1 + 1, dtype=float)
    return (slice(r0, r1 + 1), slice(c0, c1 + 1)), cols[None, :], rows[:, None]


def disc_mask(cx: float, cy: float, radius: float, width: int, height: int):
    """Window and boolean mask of pixels whose centres lie within ``radius``."""
    win = _window(cx - radius, cy - radius, cx + radius, cy + radius, width, height)
    if win is None:
        return None, None
    region, xs, ys = win
    return region, (xs - cx) ** 2 + (ys - cy) ** 2 <= radius * radius


def segment_mask(a, b, thickness: float, width: int, height: int):
    half = thickness / 2
    win = _window(min(a[0], b[0]) - half, min(a[1], b[1]) - half,
                  max(a[0], b[0]) + half, max(a[1], b[1]) + half, width, height)
    if win is None:
        return None, None
    region, xs, ys = win
    dx, dy = b[0] - a[0], b[1] - a[1]
    length_sq = dx * dx + dy * dy
    if length_sq == 0:
        t = 0.0
    else:
        t = np.clip(((xs - a[0]) * dx + (ys - a[1]) * dy) / length_sq, 0.0, 1.0)
    px, py = a[0] + t * dx, a[1] + t * dy
    return region, (xs - px) ** 2 + (ys - py) ** 2 <= half * half


def render_keypoints(skeleton: Skeleton, keypoints: np.ndarray, depth: np.ndarray,
                     width: int, height: int, style: RenderStyle | None = None,
                     return_labels: bool = False):
    """Rasterize bones and joints from already-projected keypoints.

    ``depth`` is the view-space z per joint (more negative is farther); it
    sets the back-to-front drawing order. Bones are drawn first, then joint
    discs, so discs are never hidden by bones. With ``return_labels`` the
    result is ``(image, labels)`` where ``labels[r, c]`` is the index of the
    joint whose disc covers the pixel, or -1.
    """
    style = style or RenderStyle()
    img = blank(width, height)
    labels = np.full((height, width), -1, dtype=np.int16) if return_labels else None
    visible = keypoints[:, 2] > 0
    bones = [(p, c) for p, c in skeleton.bones() if visible[p] and visible[c]]
    bone_depth = np.array([(depth[p] + depth[c]) / 2 for p, c in bones])
    bone_rgba = np.array([*style.bone_color, 255], dtype=np.uint8)
    for k in np.argsort(bone_depth, kind="stable"):
        p, c = bones[k]
        region, mask = segment_mask(keypoints[p, :2], keypoints[c, :2], style.bone_thickness,
                                    width, height)
        if region is not None:
            img[region][mask] = bone_rgba
    joint_rgba = np.array([*style.joint_color, 255], dtype=np.uint8)
    joints = np.flatnonzero(visible)
    for j in joints[np.argsort(depth[joints], kind="stable")]:
        region, mask = disc_mask(keypoints[j, 0], keypoints[j, 1], style.joint_radius, width, height)
        if region is not None:
            img[region][mask] = joint_rgba
            if labels is not None:
                labels[region][mask] = j
    return (img, labels) if return_labels else img


def render_skeleton(skeleton: Skeleton, world_pose: WorldPose, camera: Camera,
                    style: RenderStyle | None = None, return_labels: bool = False):
    """Transparent RGBA stick-figure render of one pose from one camera."""
    keypoints, view3d = project_joints(world_pose, camera)
    intr = camera.intrinsics
    return render_keypoints(skeleton, keypoints, view3d[:, 2], intr.width, intr.height,
                            style, return_labels)


def resize_nearest(image: np.ndarray, width: int, height: int) -> np.ndarray:
    h, w = image.shape[:2]
    if (w, h) == (width, height):
        return image
    rows = np.minimum(((np.arange(height) + 0.5) * h / height).astype(int), h - 1)
    cols = np.minimum(((np.arange(width) + 0.5) * w / width).astype(int), w - 1)
    return image[rows[:, None], cols[None, :]]


def composite(foreground: np.ndarray, background: np.ndarray) -> np.ndarray:
    """Source-over blend of an RGBA foreground onto a background scaled to fit."""
    h, w = foreground.shape[:2]
    bg = resize_nearest(np.asarray(background), w, h)[..., :3].astype(np.uint32)
    fg = foreground[..., :3].astype(np.uint32)
    alpha = foreground[..., 3:4].astype(np.uint32)
    rgb = (fg * alpha + bg * (255 - alpha) + 127) // 255
    out = np.empty((h, w, 4), dtype=np.uint8)
    out[..., :3] = rgb
    out[..., 3] = 255
    return out


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """BT.601 luma written into all three colour channels; alpha kept."""
    rgb = image[..., :3].astype(float)
    luma = np.floor(rgb @ np.array([0.299, 0.587, 0.114]) + 0.5)
    out = image.copy()
    out[..., :3] = np.clip(luma, 0, 255).astype(np.uint8)[..., None]
    return out


def flat_background(width: int, height: int, value: int = 128) -> np.ndarray:
    return np.full((height, width, 3), value, dtype=np.uint8)


def encode_png(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    PILImage.fromarray(np.ascontiguousarray(image)).save(buf, format="PNG",
                                                         compress_level=PNG_COMPRESS_LEVEL)
    return buf.getvalue()


def save_png(path, image: np.ndarray) -> None:
    Path(path).write_bytes(encode_png(image))


def load_image(path) -> np.ndarray:
    """Decode a PNG/JPEG into an RGB or RGBA uint8 array."""
    with PILImage.open(path) as im:
        if im.mode not in ("RGB", "RGBA"):
            im = im.convert("RGBA" if "A" in im.getbands() else "RGB")
        return np.asarray(im).copy()
