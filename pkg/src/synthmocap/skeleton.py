"""Joint hierarchies and forward kinematics.

Rotation channels are intrinsic Euler angles in degrees, applied in the order
the joint declares them (the BVH convention): channels ``Zrot Xrot Yrot``
give a local rotation ``Rz @ Rx @ Ry``. The world frame is right-handed, Y-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

POSITION_CHANNELS = ("Xpos", "Ypos", "Zpos")
ROTATION_CHANNELS = ("Xrot", "Yrot", "Zrot")
CHANNEL_NAMES = POSITION_CHANNELS + ROTATION_CHANNELS


class SkeletonError(ValueError):
    pass


@dataclass(frozen=True)
class Joint:
    name: str
    parent: int | None
    rest_offset: tuple[float, float, float]
    channels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rest_offset", tuple(float(v) for v in self.rest_offset))
        object.__setattr__(self, "channels", tuple(self.channels))
        if len(self.rest_offset) != 3:
            raise SkeletonError(f"joint {self.name!r}: rest_offset must have 3 components")
        for ch in self.channels:
            if ch not in CHANNEL_NAMES:
                raise SkeletonError(f"joint {self.name!r}: unknown channel {ch!r}")


@dataclass(frozen=True)
class Diagnostic:
    joint: str | None
    rule: str
    message: str

    def __str__(self):
        where = f"[{self.joint}] " if self.joint is not None else ""
        return f"{where}{self.rule}: {self.message}"


@dataclass(frozen=True)
class Skeleton:
    """An ordered joint list; parents always precede their children."""

    joints: tuple[Joint, ...]
    units: str = "cm"
    _channel_slices: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        slices, start = [], 0
        for j in self.joints:
            slices.append(slice(start, start + len(j.channels)))
            start += len(j.channels)
        object.__setattr__(self, "_channel_slices", tuple(slices))

    def __len__(self):
        return len(self.joints)

    @property
    def names(self) -> list[str]:
        return [j.name for j in self.joints]

    @property
    def parents(self) -> list[int | None]:
        return [j.parent for j in self.joints]

    @property
    def offsets(self) -> np.ndarray:
        return np.array([j.rest_offset for j in self.joints], dtype=float).reshape(-1, 3)

    @property
    def channel_count(self) -> int:
        return sum(len(j.channels) for j in self.joints)

    def channel_slice(self, index: int) -> slice:
        return self._channel_slices[index]

    def index(self, name: str) -> int:
        for i, j in enumerate(self.joints):
            if j.name == name:
                return i
        raise KeyError(name)

    def bones(self) -> list[tuple[int, int]]:
        """(parent, child) index pairs."""
        return [(j.parent, i) for i, j in enumerate(self.joints) if j.parent is not None]


@dataclass(frozen=True)
class WorldPose:
    positions: np.ndarray  # (J, 3)
    rotations: np.ndarray  # (J, 3, 3)


def validate_skeleton(skeleton: Skeleton) -> list[Diagnostic]:
    """Check the structural invariants and return one diagnostic per violation.

    Zero-length bones are reported with rule ``degenerate-bone``; they are
    warnings and do not make a skeleton unusable.
    """
    diags = []
    if len(skeleton.joints) == 0:
        return [Diagnostic(None, "empty", "skeleton has no joints")]
    seen: dict[str, int] = {}
    roots = []
    for i, j in enumerate(skeleton.joints):
        if j.name in seen:
            diags.append(Diagnostic(j.name, "duplicate-name",
                                    f"name {j.name!r} used by joints {seen[j.name]} and {i}"))
        else:
            seen[j.name] = i
        if j.parent is None:
            roots.append(i)
        elif not (0 <= j.parent < i):
            diags.append(Diagnostic(j.name, "topological-order",
                                    f"parent index {j.parent} does not precede joint index {i}"))
        if not all(math.isfinite(v) for v in j.rest_offset):
            diags.append(Diagnostic(j.name, "non-finite-offset", f"rest_offset {j.rest_offset}"))
        elif j.parent is not None and not any(j.rest_offset):
            diags.append(Diagnostic(j.name, "degenerate-bone", "zero-length bone"))
        if len(set(j.channels)) != len(j.channels):
            diags.append(Diagnostic(j.name, "duplicate-channel", f"channels {j.channels}"))
    if len(roots) != 1:
        diags.append(Diagnostic(None, "root-count", f"expected exactly one root, found {len(roots)}"))
    return diags


def bone_lengths(skeleton: Skeleton) -> list[tuple[str, float]]:
    return [(j.name, float(np.linalg.norm(j.rest_offset)))
            for j in skeleton.joints if j.parent is not None]


def axis_rotation(axis: str, degrees) -> np.ndarray:
    """Rotation matrices about a principal axis, broadcast over ``degrees``."""
    a = np.radians(np.asarray(degrees, dtype=float))
    c, s = np.cos(a), np.sin(a)
    one, zero = np.ones_like(a), np.zeros_like(a)
    if axis == "X":
        rows = [[one, zero, zero], [zero, c, -s], [zero, s, c]]
    elif axis == "Y":
        rows = [[c, zero, s], [zero, one, zero], [-s, zero, c]]
    elif axis == "Z":
        rows = [[c, -s, zero], [s, c, zero], [zero, zero, one]]
    else:
        raise ValueError(axis)
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def forward_kinematics_batch(skeleton: Skeleton, frames) -> tuple[np.ndarray, np.ndarray]:
    """FK over a stack of poses.

    ``frames`` has shape (F, C) with C the skeleton's channel count. Returns
    world positions (F, J, 3) and world rotations (F, J, 3, 3).
    """
    errors = [d for d in validate_skeleton(skeleton) if d.rule != "degenerate-bone"]
    if errors:
        raise SkeletonError("invalid skeleton: " + "; ".join(map(str, errors)))
    frames = np.asarray(frames, dtype=float)
    if frames.ndim != 2 or frames.shape[1] != skeleton.channel_count:
        raise SkeletonError(
            f"pose has {frames.shape[-1] if frames.ndim else 0} channels, "
            f"skeleton declares {skeleton.channel_count}")
    n = frames.shape[0]
    count = len(skeleton.joints)
    positions = np.empty((n, count, 3))
    rotations = np.empty((n, count, 3, 3))
    eye = np.broadcast_to(np.eye(3), (n, 3, 3))
    for i, joint in enumerate(skeleton.joints):
        values = frames[:, skeleton.channel_slice(i)]
        translation = np.broadcast_to(np.asarray(joint.rest_offset), (n, 3)).copy()
        local = eye
        for k, ch in enumerate(joint.channels):
            if ch in POSITION_CHANNELS:
                translation[:, "XYZ".index(ch[0])] += values[:, k]
            else:
                local = local @ axis_rotation(ch[0], values[:, k])
        if joint.parent is None:
            positions[:, i] = translation
            rotations[:, i] = local
        else:
            parent_rot = rotations[:, joint.parent]
            positions[:, i] = positions[:, joint.parent] + np.einsum("fij,fj->fi", parent_rot, translation)
            rotations[:, i] = parent_rot @ local
    return positions, rotations


def forward_kinematics(skeleton: Skeleton, pose) -> WorldPose:
    pose = np.asarray(pose, dtype=float)
    if pose.ndim != 1:
        raise SkeletonError("a single pose is a 1-D channel vector")
    positions, rotations = forward_kinematics_batch(skeleton, pose[None, :])
    return WorldPose(positions[0], rotations[0])


_SIDE_PATTERNS = (("Left", "Right", True), ("left", "right", True), ("L", "R", True),
                  ("_L", "_R", False), ("_l", "_r", False), (".L", ".R", False))


def flip_pairs_from_names(names: Sequence[str]) -> list[tuple[int, int]]:
    """Pair joints whose names differ only by a left/right marker.

    Recognized: prefixes ``Left``/``Right``, ``left``/``right``, ``L``/``R``
    and suffixes ``_L``/``_R``, ``_l``/``_r``, ``.L``/``.R``. Each joint is
    paired at most once, by the first pattern that matches.
    """
    lookup = {n: i for i, n in enumerate(names)}
    pairs, used = [], set()
    for i, name in enumerate(names):
        if i in used:
            continue
        for left, right, prefix in _SIDE_PATTERNS:
            if prefix and name.startswith(left):
                other = right + name[len(left):]
            elif not prefix and name.endswith(left):
                other = name[:-len(left)] + right
            else:
                continue
            j = lookup.get(other)
            if j is not None and j != i and j not in used:
                pairs.append((i, j))
                used.update((i, j))
                break
    return pairs
