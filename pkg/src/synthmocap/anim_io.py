"""Skeletal animation input/output.

Two formats are supported: Biovision Hierarchy (BVH) text, and a JSON clip
document used for intermediates::

    {"format_version": 1,
     "skeleton": {"units": "cm", "joints": [{"name", "parent", "offset", "channels"}]},
     "frame_time": 0.033333,
     "frames": [[channel values], ...]}

Floats in the JSON document are written with 17 significant digits, so
``read_clip(write_clip(clip))`` is bit-exact.
"""

from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _jsonio
from .skeleton import Joint, Skeleton, forward_kinematics_batch

CLIP_FORMAT_VERSION = 1

_CHANNEL_ALIASES = {}
for _axis in "XYZ":
    for _long, _short in (("position", "pos"), ("rotation", "rot")):
        _CHANNEL_ALIASES[f"{_axis}{_long}".lower()] = f"{_axis}{_short}"
        _CHANNEL_ALIASES[f"{_axis}{_short}".lower()] = f"{_axis}{_short}"
_BVH_CHANNEL_NAMES = {f"{a}{s}": f"{a}{l}" for a in "XYZ"
                      for l, s in (("position", "pos"), ("rotation", "rot"))}


class BVHError(ValueError):
    """Raised for malformed BVH input; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ClipFormatError(ValueError):
    pass


@dataclass(frozen=True)
class AnimationClip:
    skeleton: Skeleton
    frame_time: float
    frames: np.ndarray  # (F, C)

    def __post_init__(self):
        frames = np.array(self.frames, dtype=float, copy=True)
        if frames.ndim == 1 and frames.size == 0:
            frames = frames.reshape(0, self.skeleton.channel_count)
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "frame_time", float(self.frame_time))
        if not (math.isfinite(self.frame_time) and self.frame_time > 0):
            raise ValueError(f"frame_time must be positive and finite, got {self.frame_time}")
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise ValueError("a clip needs at least one frame")
        if frames.shape[1] != self.skeleton.channel_count:
            raise ValueError(f"frames have {frames.shape[1]} channels, "
                             f"skeleton declares {self.skeleton.channel_count}")
        if not np.all(np.isfinite(frames)):
            raise ValueError("frames contain non-finite values")

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def duration(self) -> float:
        return self.frame_count * self.frame_time

    def world_positions(self) -> np.ndarray:
        return forward_kinematics_batch(self.skeleton, self.frames)[0]


# --------------------------------------------------------------------- BVH

def _tokenize(text: str):
    for lineno, line in enumerate(text.splitlines(), start=1):
        for tok in line.split():
            yield lineno, tok


def _finite(tok: str, lineno: int, what: str) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise BVHError(f"{what}: expected a number, got {tok!r}", lineno) from None
    if not math.isfinite(value):
        raise BVHError(f"{what}: non-finite value {tok!r}", lineno)
    return value


def _parse_hierarchy(tokens, lines_total):
    names: list[str] = []
    parents: list[int | None] = []
    offsets: list[tuple] = []
    channels: list[tuple] = []
    is_end: list[bool] = []
    stack: list[int] = []
    pending = None  # (name, parent, end site?) awaiting "{"

    def take(what):
        try:
            return next(tokens)
        except StopIteration:
            raise BVHError(f"unexpected end of input while reading {what}", lines_total) from None

    lineno, tok = take("ROOT")
    if tok != "ROOT":
        raise BVHError(f"expected ROOT, got {tok!r}", lineno)
    _, name = take("joint name")
    pending = (name, None, False)
    while pending is not None or stack:
        lineno, tok = take("hierarchy")
        if pending is not None and tok != "{":
            raise BVHError(f"expected '{{' after joint header, got {tok!r}", lineno)
        if tok in ("JOINT", "End"):
            if is_end[stack[-1]]:
                raise BVHError(f"{tok} inside an End Site", lineno)
            if tok == "End":
                ln, site = take("End Site")
                if site != "Site":
                    raise BVHError(f"expected 'Site' after 'End', got {site!r}", ln)
                name = names[stack[-1]] + "_end"
            else:
                _, name = take("joint name")
            pending = (name, stack[-1], tok == "End")
        elif tok == "{":
            if pending is None:
                raise BVHError("unexpected '{'", lineno)
            name, parent, end = pending
            if name in names:
                raise BVHError(f"duplicate joint name {name!r}", lineno)
            pending = None
            names.append(name)
            parents.append(parent)
            offsets.append((0.0, 0.0, 0.0))
            channels.append(())
            is_end.append(end)
            stack.append(len(names) - 1)
        elif tok == "}":
            stack.pop()
        elif tok == "OFFSET":
            offsets[stack[-1]] = tuple(_finite(take("OFFSET")[1], lineno, "OFFSET") for _ in range(3))
        elif tok == "CHANNELS":
            if is_end[stack[-1]]:
                raise BVHError("End Site cannot declare CHANNELS", lineno)
            _, count_tok = take("channel count")
            try:
                count = int(count_tok)
            except ValueError:
                raise BVHError(f"bad channel count {count_tok!r}", lineno) from None
            if not 0 <= count <= 6:
                raise BVHError(f"channel count {count} outside 0..6", lineno)
            chans = []
            for _ in range(count):
                ln, cname = take("channel name")
                canon = _CHANNEL_ALIASES.get(cname.lower())
                if canon is None:
                    raise BVHError(f"unknown channel {cname!r}", ln)
                chans.append(canon)
            if len(set(chans)) != len(chans):
                raise BVHError(f"repeated channel in {chans}", lineno)
            channels[stack[-1]] = tuple(chans)
        elif tok == "ROOT":
            raise BVHError("multiple ROOT joints", lineno)
        else:
            raise BVHError(f"unexpected token {tok!r} in HIERARCHY", lineno)
    return [Joint(n, p, o, c) for n, p, o, c in zip(names, parents, offsets, channels)]


def parse_bvh(text, units: str = "cm") -> AnimationClip:
    """Parse BVH text (``str`` or ``bytes``) into an :class:`AnimationClip`.

    End Site blocks become channel-less leaf joints named ``<parent>_end``.
    Any malformed input raises :class:`BVHError` carrying a line number.
    """
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8", errors="replace")
    lines = text.splitlines()
    tokens = _tokenize(text)
    first = next(tokens, None)
    if first is None or first[1] != "HIERARCHY":
        raise BVHError("missing HIERARCHY keyword", first[0] if first else 1)
    joints = _parse_hierarchy(tokens, len(lines))
    skeleton = Skeleton(tuple(joints), units=units)

    tok = next(tokens, None)
    if tok is None or tok[1] != "MOTION":
        raise BVHError("missing MOTION keyword", tok[0] if tok else len(lines))
    expected = [("Frames:", None), (None, "frame count"), ("Frame", None), ("Time:", None),
                (None, "frame time")]
    values = []
    lineno = tok[0]
    for literal, what in expected:
        tok = next(tokens, None)
        if tok is None:
            raise BVHError(f"unexpected end of input in MOTION header", len(lines))
        lineno = tok[0]
        if literal is not None and tok[1] != literal:
            raise BVHError(f"expected {literal!r}, got {tok[1]!r}", lineno)
        if what is not None:
            values.append(tok[1])
    try:
        n_frames = int(values[0])
    except ValueError:
        raise BVHError(f"bad frame count {values[0]!r}", lineno) from None
    frame_time = _finite(values[1], lineno, "Frame Time")
    if frame_time <= 0:
        raise BVHError(f"Frame Time must be positive, got {frame_time}", lineno)
    if lines[lineno - 1].split()[-1] != values[1]:
        raise BVHError("unexpected tokens after Frame Time", lineno)

    n_channels = skeleton.channel_count
    rows = []
    for offset, line in enumerate(lines[lineno:], start=lineno + 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != n_channels:
            raise BVHError(f"motion line has {len(parts)} values, hierarchy declares {n_channels} channels",
                           offset)
        rows.append([_finite(p, offset, "motion value") for p in parts])
    if len(rows) != n_frames:
        raise BVHError(f"'Frames: {n_frames}' but {len(rows)} motion lines present", lineno)
    if n_frames < 1:
        raise BVHError("clip has no frames", lineno)
    return AnimationClip(skeleton, frame_time, np.array(rows, dtype=float).reshape(n_frames, n_channels))


def load_bvh(path) -> AnimationClip:
    return parse_bvh(Path(path).read_bytes())


def write_bvh(clip: AnimationClip, sink) -> None:
    """Write a clip as BVH. Joints named ``<parent>_end`` without channels or
    children are written as End Site blocks."""
    sk = clip.skeleton
    children: dict[int, list[int]] = {i: [] for i in range(len(sk))}
    for i, j in enumerate(sk.joints):
        if j.parent is not None:
            children[j.parent].append(i)

    def is_end_site(i):
        j = sk.joints[i]
        return (j.parent is not None and not j.channels and not children[i]
                and j.name == sk.joints[j.parent].name + "_end")

    out = ["HIERARCHY"]

    def num(v):
        return _jsonio.format_float(v)

    def emit(i, depth):
        j = sk.joints[i]
        pad = "\t" * depth
        if is_end_site(i):
            out.append(f"{pad}End Site")
        else:
            out.append(f"{pad}{'ROOT' if j.parent is None else 'JOINT'} {j.name}")
        out.append(pad + "{")
        out.append(f"{pad}\tOFFSET {' '.join(num(v) for v in j.rest_offset)}")
        if not is_end_site(i):
            names = " ".join(_BVH_CHANNEL_NAMES[c] for c in j.channels)
            out.append(f"{pad}\tCHANNELS {len(j.channels)} {names}".rstrip())
        for c in children[i]:
            emit(c, depth + 1)
        out.append(pad + "}")

    roots = [i for i, j in enumerate(sk.joints) if j.parent is None]
    # BVH output requires joints in depth-first order with End Sites last
    # among their parent's children; anything else would be reordered on read.
    emit(roots[0], 0)
    out.append("MOTION")
    out.append(f"Frames: {clip.frame_count}")
    out.append(f"Frame Time: {num(clip.frame_time)}")
    for row in clip.frames:
        out.append(" ".join(num(v) for v in row))
    text = "\n".join(out) + "\n"
    if isinstance(sink, (str, os.PathLike)):
        Path(sink).write_text(text)
    else:
        sink.write(text)


# ---------------------------------------------------------- JSON clip format

def clip_to_dict(clip: AnimationClip) -> dict:
    return {
        "format_version": CLIP_FORMAT_VERSION,
        "skeleton": skeleton_to_dict(clip.skeleton),
        "frame_time": clip.frame_time,
        "frames": clip.frames,
    }


def skeleton_to_dict(skeleton: Skeleton) -> dict:
    return {
        "units": skeleton.units,
        "joints": [{"name": j.name, "parent": j.parent, "offset": list(j.rest_offset),
                    "channels": list(j.channels)} for j in skeleton.joints],
    }


def skeleton_from_dict(doc: dict) -> Skeleton:
    try:
        joints = tuple(Joint(j["name"], j["parent"], tuple(j["offset"]), tuple(j["channels"]))
                       for j in doc["joints"])
        return Skeleton(joints, units=doc.get("units", "cm"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ClipFormatError(f"malformed skeleton: {exc}") from exc


def write_clip(clip: AnimationClip, sink) -> None:
    if not isinstance(clip, AnimationClip):
        raise TypeError("write_clip expects an AnimationClip")
    if clip.frame_count == 0:
        raise ValueError("refusing to write a clip without frames")
    text = _jsonio.dumps(clip_to_dict(clip))
    if isinstance(sink, (str, os.PathLike)):
        Path(sink).write_text(text)
    else:
        sink.write(text)


def read_clip(source) -> AnimationClip:
    if isinstance(source, (str, os.PathLike)):
        text = Path(source).read_text()
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        text = source.read()
    else:
        raise TypeError("read_clip expects a path or a readable stream")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ClipFormatError(f"not a JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ClipFormatError("clip document must be a JSON object")
    if doc.get("format_version") != CLIP_FORMAT_VERSION:
        raise ClipFormatError(f"unsupported format_version {doc.get('format_version')!r}")
    try:
        skeleton = skeleton_from_dict(doc["skeleton"])
        frames = np.array(doc["frames"], dtype=float)
        return AnimationClip(skeleton, doc["frame_time"], frames)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ClipFormatError):
            raise
        raise ClipFormatError(f"malformed clip: {exc}") from exc


def load_clip(path) -> AnimationClip:
    """Load a ``.bvh`` or JSON clip file, chosen by suffix."""
    path = Path(path)
    if path.suffix.lower() == ".bvh":
        return load_bvh(path)
    return read_clip(path)


@dataclass(frozen=True)
class ClipStats:
    joint_count: int
    frame_count: int
    duration: float
    root_bbox_min: tuple[float, float, float]
    root_bbox_max: tuple[float, float, float]

    def as_dict(self) -> dict:
        return {"joint_count": self.joint_count, "frame_count": self.frame_count,
                "duration": self.duration, "root_bbox_min": list(self.root_bbox_min),
                "root_bbox_max": list(self.root_bbox_max)}


def clip_stats(clip: AnimationClip) -> ClipStats:
    root = clip.skeleton.parents.index(None)
    traj = clip.world_positions()[:, root]
    return ClipStats(
        joint_count=len(clip.skeleton),
        frame_count=clip.frame_count,
        duration=clip.frame_count * clip.frame_time,
        root_bbox_min=tuple(float(v) for v in traj.min(axis=0)),
        root_bbox_max=tuple(float(v) for v in traj.max(axis=0)),
    )
