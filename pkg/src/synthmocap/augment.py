"""Keypoint-consistent image augmentation.

Geometric ops (scale, rotate, flip) compose into one affine map that is
applied to the image and to the keypoints alike. Photometric ops (contrast,
brightness, hue/saturation jitter, Gaussian noise) only touch pixels.

Randomness comes from numpy's Philox generator, a counter-based RNG, keyed by
a hash of ``(seed, sample key, stream name)``. A sample's parameters therefore
do not depend on which worker generates it or in what order.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from matplotlib.colors import hsv_to_rgb, rgb_to_hsv

from .render import to_grayscale

Range = tuple[float, float]


def rng_for(seed: int, key, stream: str = "params") -> np.random.Generator:
    """A Philox generator keyed by ``seed``, an arbitrary hashable-by-repr key
    and a stream label."""
    text = f"{int(seed)}|{stream}|{key!r}".encode()
    digest = hashlib.blake2b(text, digest_size=16).digest()
    return np.random.Generator(np.random.Philox(key=int.from_bytes(digest, "little")))


@dataclass(frozen=True)
class AugmentationSpec:
    rotation_deg: Range = (-30.0, 30.0)
    scale: Range = (0.75, 1.25)
    flip_probability: float = 0.5
    gaussian_noise_sigma: Range = (0.0, 8.0)
    brightness_delta: Range = (-32.0, 32.0)
    contrast_factor: Range = (0.8, 1.2)
    hue_shift_deg: Range = (-18.0, 18.0)
    saturation_factor: Range = (0.7, 1.3)
    grayscale: bool = False
    # None: derive left/right pairs from the skeleton's joint names
    flip_pairs: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("flip_probability", "grayscale", "flip_pairs"):
                continue
            lo, hi = (float(v) for v in value)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"{f.name}: invalid range {value}")
            object.__setattr__(self, f.name, (lo, hi))
        if self.scale[0] <= 0:
            raise ValueError("scale range must be positive")
        if self.gaussian_noise_sigma[0] < 0:
            raise ValueError("noise sigma must be non-negative")
        if not 0 <= self.flip_probability <= 1:
            raise ValueError("flip_probability must lie in [0, 1]")
        if self.flip_pairs is not None:
            pairs = tuple((int(a), int(b)) for a, b in self.flip_pairs)
            flat = [i for p in pairs for i in p]
            if len(set(flat)) != len(flat) or any(i < 0 for i in flat):
                raise ValueError("flip_pairs must be disjoint non-negative indices")
            object.__setattr__(self, "flip_pairs", pairs)

    @classmethod
    def identity(cls, **overrides) -> "AugmentationSpec":
        base = dict(rotation_deg=(0, 0), scale=(1, 1), flip_probability=0.0,
                    gaussian_noise_sigma=(0, 0), brightness_delta=(0, 0),
                    contrast_factor=(1, 1), hue_shift_deg=(0, 0), saturation_factor=(1, 1))
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: (list(map(list, v)) if k == "flip_pairs" and v is not None
                    else list(v) if isinstance(v, tuple) else v) for k, v in d.items()}

    @classmethod
    def from_dict(cls, doc: dict) -> "AugmentationSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown augmentation fields: {sorted(unknown)}")
        return cls(**{k: tuple(map(tuple, v)) if k == "flip_pairs" and v is not None
                      else tuple(v) if isinstance(v, list) else v for k, v in doc.items()})


@dataclass(frozen=True)
class AppliedAugmentation:
    rotation_deg: float = 0.0
    scale: float = 1.0
    flip: bool = False
    noise_sigma: float = 0.0
    brightness: float = 0.0
    contrast: float = 1.0
    hue_shift_deg: float = 0.0
    saturation: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "AppliedAugmentation":
        return cls(**doc)


def sample_params(spec: AugmentationSpec, seed: int, sample_key) -> AppliedAugmentation:
    rng = rng_for(seed, sample_key, "params")
    u = rng.random(8)

    def pick(rng_range, x):
        lo, hi = rng_range
        return lo + (hi - lo) * x if hi > lo else lo

    return AppliedAugmentation(
        rotation_deg=pick(spec.rotation_deg, u[0]),
        scale=pick(spec.scale, u[1]),
        flip=bool(u[2] < spec.flip_probability),
        noise_sigma=pick(spec.gaussian_noise_sigma, u[3]),
        brightness=pick(spec.brightness_delta, u[4]),
        contrast=pick(spec.contrast_factor, u[5]),
        hue_shift_deg=pick(spec.hue_shift_deg, u[6]),
        saturation=pick(spec.saturation_factor, u[7]),
    )


# ---------------------------------------------------------------- geometric

def geometric_matrix(params: AppliedAugmentation, width: int, height: int) -> np.ndarray:
    """Forward 3x3 affine on pixel coordinates: scale, then rotate (both about
    the image centre), then optional horizontal flip. Positive angles turn
    the picture counter-clockwise as displayed."""
    cx, cy = (width - 1) / 2, (height - 1) / 2
    to_origin = np.array([[1, 0, -cx], [0, 1, -cy], [0, 0, 1]], dtype=float)
    back = np.array([[1, 0, cx], [0, 1, cy], [0, 0, 1]], dtype=float)
    s = params.scale
    a = math.radians(params.rotation_deg)
    c, si = math.cos(a), math.sin(a)
    scale = np.diag([s, s, 1.0])
    rot = np.array([[c, si, 0], [-si, c, 0], [0, 0, 1]])
    m = back @ rot @ scale @ to_origin
    if params.flip:
        m = np.array([[-1, 0, width - 1], [0, 1, 0], [0, 0, 1]], dtype=float) @ m
    return m


def transform_keypoints(keypoints, matrix: np.ndarray, width: int, height: int) -> np.ndarray:
    kp = np.asarray(keypoints, dtype=float).copy()
    xy = kp[:, :2] @ matrix[:2, :2].T + matrix[:2, 2]
    inside = (xy[:, 0] >= 0) & (xy[:, 0] <= width - 1) & (xy[:, 1] >= 0) & (xy[:, 1] <= height - 1)
    kp[:, :2] = xy
    kp[:, 2] = ((kp[:, 2] > 0) & inside).astype(float)
    return kp


def swap_pairs(keypoints, flip_pairs) -> np.ndarray:
    kp = np.array(keypoints, copy=True)
    for a, b in flip_pairs:
        kp[[a, b]] = kp[[b, a]]
    return kp


def warp_image(image: np.ndarray, matrix: np.ndarray, fill=None) -> np.ndarray:
    """Inverse-map ``image`` through ``matrix`` with nearest-neighbour lookup.

    Pixels that map outside the source get ``fill`` (opaque black by default).
    """
    h, w = image.shape[:2]
    if fill is None:
        fill = (0, 0, 0, 255)[:image.shape[2]] if image.ndim == 3 else 0
    inv = np.linalg.inv(matrix)
    cols, rows = np.meshgrid(np.arange(w, dtype=float), np.arange(h, dtype=float))
    sx = np.floor(inv[0, 0] * cols + inv[0, 1] * rows + inv[0, 2] + 0.5).astype(np.int64)
    sy = np.floor(inv[1, 0] * cols + inv[1, 1] * rows + inv[1, 2] + 0.5).astype(np.int64)
    ok = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    out = np.empty_like(image)
    out[...] = np.asarray(fill, dtype=image.dtype)
    out[ok] = image[sy[ok], sx[ok]]
    return out


def apply_geometric(image: np.ndarray, keypoints, params: AppliedAugmentation,
                    flip_pairs=()) -> tuple[np.ndarray, np.ndarray]:
    h, w = image.shape[:2]
    m = geometric_matrix(params, w, h)
    kp = transform_keypoints(keypoints, m, w, h)
    if params.flip:
        kp = swap_pairs(kp, flip_pairs)
    if np.array_equal(m, np.eye(3)):
        return image.copy(), kp
    return warp_image(image, m), kp


# -------------------------------------------------------------- photometric

def apply_photometric(image: np.ndarray, params: AppliedAugmentation,
                      rng: np.random.Generator | None = None) -> np.ndarray:
    """Contrast and brightness, then hue/saturation jitter, then Gaussian noise.

    Alpha, if present, is left alone. ``rng`` is only consulted when
    ``params.noise_sigma > 0``.
    """
    rgb = image[..., :3].astype(float)
    rgb = np.clip(params.contrast * (rgb - 128.0) + 128.0 + params.brightness, 0, 255)
    if params.hue_shift_deg != 0 or params.saturation != 1:
        hsv = rgb_to_hsv(rgb / 255.0)
        hsv[..., 0] = np.mod(hsv[..., 0] + params.hue_shift_deg / 360.0, 1.0)
        hsv[..., 1] = np.clip(hsv[..., 1] * params.saturation, 0, 1)
        rgb = hsv_to_rgb(hsv) * 255.0
    if params.noise_sigma > 0:
        if rng is None:
            raise ValueError("noise requested without an rng stream")
        rgb = rgb + rng.normal(0.0, params.noise_sigma, size=rgb.shape)
    out = image.copy()
    out[..., :3] = np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)
    return out


def augment_sample(image: np.ndarray, keypoints, spec: AugmentationSpec, seed: int, sample_key,
                   flip_pairs=()) -> tuple[np.ndarray, np.ndarray, AppliedAugmentation]:
    """Full augmentation of one sample, a pure function of its arguments."""
    params = sample_params(spec, seed, sample_key)
    pairs = spec.flip_pairs if spec.flip_pairs is not None else flip_pairs
    img, kp = apply_geometric(image, keypoints, params, pairs)
    img = apply_photometric(img, params, rng_for(seed, sample_key, "noise"))
    if spec.grayscale:
        img = to_grayscale(img)
    return img, kp, params
