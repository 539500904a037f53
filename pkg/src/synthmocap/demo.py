"""Bundled demo content: a 37-joint quadruped rig and a procedural walk.

The joint names and proportions are a stand-in (roughly a large cat, in
centimetres, facing +Z); they are not a reconstruction of any particular
production rig.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .anim_io import AnimationClip, load_bvh
from .skeleton import Joint, Skeleton

ROOT_CHANNELS = ("Xpos", "Ypos", "Zpos", "Zrot", "Xrot", "Yrot")
JOINT_CHANNELS = ("Zrot", "Xrot", "Yrot")

_FRONT_LEG = [("Scapula", (9, -4, 5)), ("Shoulder", (1, -12, 2)), ("Elbow", (0, -18, -3)),
              ("Wrist", (0, -18, 2)), ("Paw", (0, -6, 3)), ("Paw_end", (0, -2, 6))]
_HIND_LEG = [("Hip", (9, -4, -8)), ("Knee", (0, -20, 6)), ("Hock", (0, -20, -8)),
             ("Foot", (0, -14, 3)), ("Foot_end", (0, -2, 8))]

ROOT_HEIGHT = 62.0


def quadruped_rig() -> Skeleton:
    """The 37-joint demo rig (end sites included as joints)."""
    joints: list[Joint] = []

    def add(name, parent, offset):
        chans = () if name.endswith("_end") else (ROOT_CHANNELS if parent is None else JOINT_CHANNELS)
        joints.append(Joint(name, None if parent is None else _idx(parent), offset, chans))
        return name

    def _idx(name):
        return next(i for i, j in enumerate(joints) if j.name == name)

    def chain(parts, parent, side):
        sign = 1 if side == "L" else -1
        for name, (x, y, z) in parts:
            parent = add(side + name, parent, (sign * x, y, z))

    add("Hips", None, (0, 0, 0))
    add("Spine", "Hips", (0, 3, 20))
    add("Chest", "Spine", (0, 2, 25))
    add("Neck", "Chest", (0, 8, 15))
    add("Head", "Neck", (0, 10, 12))
    add("Jaw", "Head", (0, -6, 6))
    add("Jaw_end", "Jaw", (0, -2, 14))
    for side, sign in (("L", 1), ("R", -1)):
        add(side + "Ear", "Head", (sign * 5, 8, -2))
        add(side + "Ear_end", side + "Ear", (sign * 1, 6, -1))
    chain(_FRONT_LEG, "Chest", "L")
    chain(_FRONT_LEG, "Chest", "R")
    chain(_HIND_LEG, "Hips", "L")
    chain(_HIND_LEG, "Hips", "R")
    add("Tail1", "Hips", (0, 2, -12))
    add("Tail2", "Tail1", (0, -2, -20))
    add("Tail3", "Tail2", (0, -4, -20))
    add("Tail3_end", "Tail3", (0, -4, -20))
    return Skeleton(tuple(joints), units="cm")


def walk_clip(frames: int = 100, frame_time: float = 1 / 30, speed: float = 0.5,
              period: float = 30.0) -> AnimationClip:
    """A looping trot: diagonal legs in phase, root advancing ``speed`` cm/frame."""
    sk = quadruped_rig()
    t = np.arange(frames, dtype=float)
    phase = 2 * np.pi * t / period
    data = np.zeros((frames, sk.channel_count))

    def put(joint, channel, values):
        i = sk.index(joint)
        data[:, sk.channel_slice(i).start + sk.joints[i].channels.index(channel)] = values

    put("Hips", "Ypos", ROOT_HEIGHT + 1.5 * np.sin(2 * phase))
    put("Hips", "Zpos", speed * t)
    put("Hips", "Yrot", 4 * np.sin(phase))
    put("Hips", "Zrot", 2 * np.sin(phase))
    put("Spine", "Yrot", -3 * np.sin(phase))
    put("Neck", "Xrot", 5 * np.sin(2 * phase))
    put("Head", "Xrot", -4 * np.sin(2 * phase))
    put("Jaw", "Xrot", 6 + 6 * np.sin(phase))
    for side, offset in (("L", 0.0), ("R", np.pi)):
        p = phase + offset
        put(side + "Shoulder", "Xrot", 22 * np.sin(p))
        put(side + "Elbow", "Xrot", -12 - 12 * np.sin(p + 0.6))
        put(side + "Wrist", "Xrot", 10 * np.sin(p + 1.2))
        # diagonal pairing: hind leg on the same side runs half a cycle behind
        q = p + np.pi
        put(side + "Hip", "Xrot", 18 * np.sin(q))
        put(side + "Knee", "Xrot", 14 + 12 * np.sin(q + 0.6))
        put(side + "Hock", "Xrot", -10 - 10 * np.sin(q + 1.2))
        put(side + "Ear", "Zrot", (1 if side == "L" else -1) * 5 * np.sin(2 * phase))
    for k, name in enumerate(("Tail1", "Tail2", "Tail3"), start=1):
        put(name, "Yrot", 12 * np.sin(phase - 0.7 * k))
        put(name, "Xrot", 8 - 3 * k)
    return AnimationClip(sk, frame_time, data)


def sample_bvh_paths() -> list:
    """Paths of the BVH files shipped with the package."""
    root = resources.files("synthmocap") / "data"
    return sorted(p for p in root.iterdir() if p.name.endswith(".bvh"))


def load_sample(name: str = "quadruped_walk.bvh") -> AnimationClip:
    return load_bvh(resources.files("synthmocap") / "data" / name)
