"""Dataset generation, storage, splitting and validation.

Layout of a generated dataset::

    <out>/manifest.json
    <out>/images/<clip>/<cam>/<frame>.png
    <out>/ann/<clip>/<cam>/<frame>.json

Every (clip, frame, camera) triple is one sample. Samples are written
atomically; while a run is in progress ``<out>/journal.jsonl`` lists the
finished ones so an interrupted run can resume. The manifest is written last
and records a SHA-256 for every file, then the journal is removed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import _jsonio
from .anim_io import AnimationClip, skeleton_from_dict, skeleton_to_dict
from .augment import AppliedAugmentation, AugmentationSpec, augment_sample, rng_for
from .camera import Camera, RigConfig, projection_matrix, rig_for_clip, view_matrix
from .projection import project_points, view_to_image_many
from .render import (RenderStyle, composite, encode_png, flat_background, load_image,
                     render_keypoints, to_grayscale)
from .skeleton import Skeleton, flip_pairs_from_names, forward_kinematics_batch

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_SEED = 20200531
COUNT_FORMULA = "sum(frame_count over clips) * camera_count"
REPROJECTION_TOLERANCE_PX = 1e-3
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
SPLIT_NAMES = ("train", "val", "test")
_SAFE_ID = re.compile(r"^[A-Za-z0-9_.-]+$")


class DatasetError(Exception):
    pass


def expected_sample_count(frame_counts: Sequence[int], camera_count: int) -> int:
    return int(sum(frame_counts)) * int(camera_count)


def sample_id(clip_id: str, camera_id: str, frame_index: int) -> str:
    return f"{clip_id}/{camera_id}/{frame_index:06d}"


def image_relpath(clip_id: str, camera_id: str, frame_index: int) -> str:
    return f"images/{clip_id}/{camera_id}/{frame_index:06d}.png"


def annotation_relpath(clip_id: str, camera_id: str, frame_index: int) -> str:
    return f"ann/{clip_id}/{camera_id}/{frame_index:06d}.json"


# -------------------------------------------------------------------- types

@dataclass
class SampleRecord:
    clip_id: str
    frame_index: int
    camera_id: str
    image: str
    keypoints2d: np.ndarray  # (J, 3): x, y, visible
    joints3d_view: np.ndarray  # (J, 3)
    camera: Camera
    view_matrix: np.ndarray
    projection_matrix: np.ndarray
    augmentation: AppliedAugmentation | None = None
    joints3d_root_relative: np.ndarray | None = None

    @property
    def id(self) -> str:
        return sample_id(self.clip_id, self.camera_id, self.frame_index)

    def to_dict(self) -> dict:
        cam = self.camera.to_dict()
        del cam["id"]
        cam["view_matrix"] = self.view_matrix
        cam["projection_matrix"] = self.projection_matrix
        doc = {
            "clip_id": self.clip_id,
            "frame_index": self.frame_index,
            "camera_id": self.camera_id,
            "image": self.image,
            "keypoints2d": [[float(x), float(y), int(v)] for x, y, v in self.keypoints2d],
            "joints3d_view": self.joints3d_view,
            "camera": cam,
        }
        if self.joints3d_root_relative is not None:
            doc["joints3d_root_relative"] = self.joints3d_root_relative
        if self.augmentation is not None:
            doc["augmentation"] = self.augmentation.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "SampleRecord":
        cam = dict(doc["camera"])
        view = np.array(cam.pop("view_matrix"), dtype=float).reshape(4, 4)
        proj = np.array(cam.pop("projection_matrix"), dtype=float).reshape(4, 4)
        cam["id"] = doc["camera_id"]
        aug = doc.get("augmentation")
        rr = doc.get("joints3d_root_relative")
        return cls(
            clip_id=doc["clip_id"],
            frame_index=int(doc["frame_index"]),
            camera_id=doc["camera_id"],
            image=doc["image"],
            keypoints2d=np.array(doc["keypoints2d"], dtype=float).reshape(-1, 3),
            joints3d_view=np.array(doc["joints3d_view"], dtype=float).reshape(-1, 3),
            camera=Camera.from_dict(cam),
            view_matrix=view,
            projection_matrix=proj,
            augmentation=AppliedAugmentation.from_dict(aug) if aug is not None else None,
            joints3d_root_relative=np.array(rr, dtype=float).reshape(-1, 3) if rr is not None else None,
        )


@dataclass
class Manifest:
    skeleton: Skeleton
    cameras: dict[str, list[Camera]]
    clips: list[dict]  # {clip_id, frame_count, frame_time}
    seed: int
    augmentation: AugmentationSpec
    rig: RigConfig
    splits: dict[str, str]
    total_samples: int
    bake_augmentation: bool = False
    style: RenderStyle = field(default_factory=RenderStyle)
    files: dict[str, str] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    @property
    def joint_names(self) -> list[str]:
        return self.skeleton.names

    def sample_keys(self) -> Iterator[tuple[str, int, str]]:
        for clip in self.clips:
            for f in range(clip["frame_count"]):
                for cam in self.cameras[clip["clip_id"]]:
                    yield clip["clip_id"], f, cam.id

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "joint_names": self.joint_names,
            "skeleton": skeleton_to_dict(self.skeleton),
            "cameras": {cid: [c.to_dict() for c in cams] for cid, cams in self.cameras.items()},
            "clips": self.clips,
            "seed": self.seed,
            "rig": self.rig.to_dict(),
            "augmentation": self.augmentation.to_dict(),
            "bake_augmentation": self.bake_augmentation,
            "style": asdict(self.style),
            "splits": self.splits,
            "count_formula": COUNT_FORMULA,
            "total_samples": self.total_samples,
            "files": self.files,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Manifest":
        if doc.get("format_version") != FORMAT_VERSION:
            raise DatasetError(f"unsupported manifest format_version {doc.get('format_version')!r}")
        try:
            return cls(
                skeleton=skeleton_from_dict(doc["skeleton"]),
                cameras={cid: [Camera.from_dict(c) for c in cams]
                         for cid, cams in doc["cameras"].items()},
                clips=[{"clip_id": c["clip_id"], "frame_count": int(c["frame_count"]),
                        "frame_time": float(c["frame_time"])} for c in doc["clips"]],
                seed=int(doc["seed"]),
                augmentation=AugmentationSpec.from_dict(doc["augmentation"]),
                rig=RigConfig(**doc["rig"]),
                splits=dict(doc["splits"]),
                total_samples=int(doc["total_samples"]),
                bake_augmentation=bool(doc.get("bake_augmentation", False)),
                style=RenderStyle(**{k: tuple(v) if isinstance(v, list) else v
                                     for k, v in doc.get("style", {}).items()}),
                files=dict(doc.get("files", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"malformed manifest: {exc}") from exc


@dataclass(frozen=True)
class Diagnostic:
    sample: str | None
    rule: str
    message: str

    def __str__(self):
        return f"{self.sample or '<dataset>'}: {self.rule}: {self.message}"


# ---------------------------------------------------------------- splitting

def split_dataset(manifest_or_clip_ids, ratios=(0.8, 0.1, 0.1), seed: int = DEFAULT_SEED) -> dict[str, str]:
    """Assign whole clips to train/val/test.

    Clips are ordered by a keyed hash of their id and cut into contiguous
    runs whose sizes follow ``ratios`` (largest remainder), with every split
    of non-zero ratio receiving at least one clip.
    """
    if isinstance(manifest_or_clip_ids, Manifest):
        clip_ids = [c["clip_id"] for c in manifest_or_clip_ids.clips]
    else:
        clip_ids = list(manifest_or_clip_ids)
    ratios = [float(r) for r in ratios]
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1) > 1e-9:
        raise ValueError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    if len(set(clip_ids)) != len(clip_ids):
        raise ValueError("duplicate clip ids")
    nonzero = [i for i, r in enumerate(ratios) if r > 0]
    n = len(clip_ids)
    if n < len(nonzero):
        raise ValueError(f"{n} clips cannot fill {len(nonzero)} non-empty splits")

    counts = [0, 0, 0]
    for i in nonzero:
        counts[i] = 1
    remaining = n - len(nonzero)
    if remaining:
        quotas = [ratios[i] * n - counts[i] for i in range(3)]
        quotas = [max(q, 0.0) for q in quotas]
        total_q = sum(quotas)
        shares = [q / total_q * remaining if total_q > 0 else 0 for q in quotas]
        extra = [int(np.floor(s)) for s in shares]
        order = sorted(nonzero, key=lambda i: (-(shares[i] - extra[i]), i))
        for k in range(remaining - sum(extra)):
            extra[order[k % len(order)]] += 1
        counts = [c + e for c, e in zip(counts, extra)]

    def rank(cid):
        return hashlib.blake2b(f"{int(seed)}|{cid}".encode(), digest_size=16).digest()

    ordered = sorted(clip_ids, key=rank)
    out, start = {}, 0
    for name, count in zip(SPLIT_NAMES, counts):
        for cid in ordered[start:start + count]:
            out[cid] = name
        start += count
    return {cid: out[cid] for cid in clip_ids}


# --------------------------------------------------------------- generation

def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def list_backgrounds(background_dir) -> list[str]:
    """Image files in ``background_dir`` (sorted). Unreadable -> [] with a warning."""
    if background_dir is None:
        return []
    try:
        entries = sorted(p for p in Path(background_dir).iterdir()
                         if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    except OSError as exc:
        warnings.warn(f"background directory {background_dir} unreadable ({exc}); "
                      "using flat gray backgrounds")
        return []
    if not entries:
        warnings.warn(f"no PNG/JPEG files in {background_dir}; using flat gray backgrounds")
    return [str(p) for p in entries]


@lru_cache(maxsize=32)
def _load_background(path: str):
    try:
        return load_image(path)
    except Exception as exc:  # noqa: BLE001 - any decode failure falls back
        log.warning("cannot decode background %s (%s); using flat gray", path, exc)
        return None


@dataclass(frozen=True)
class _Job:
    out: str
    clip_id: str
    skeleton: Skeleton
    frame_indices: tuple[int, ...]
    positions: np.ndarray  # (len(frame_indices), J, 3)
    cameras: tuple[Camera, ...]
    track_root: bool
    root_relative: bool
    root: int
    backgrounds: tuple[str, ...]
    seed: int
    spec: AugmentationSpec
    bake: bool
    style: RenderStyle
    flip_pairs: tuple
    done: frozenset


def _make_sample(job: _Job, frame: int, positions: np.ndarray, camera: Camera):
    if job.track_root:
        camera = camera.with_focal_point(positions[job.root])
    intr = camera.intrinsics
    keypoints, view3d = project_points(positions, camera)
    fg = render_keypoints(job.skeleton, keypoints, view3d[:, 2], intr.width, intr.height, job.style)
    key = (job.clip_id, frame, camera.id)
    if job.backgrounds:
        pick = int(rng_for(job.seed, key, "background").integers(len(job.backgrounds)))
        bg = _load_background(job.backgrounds[pick])
    else:
        bg = None
    if bg is None:
        bg = flat_background(intr.width, intr.height)
    image = composite(fg, bg)
    applied = None
    if job.bake:
        image, keypoints, applied = augment_sample(image, keypoints, job.spec, job.seed, key,
                                                   job.flip_pairs)
    elif job.spec.grayscale:
        image = to_grayscale(image)
    record = SampleRecord(
        clip_id=job.clip_id, frame_index=frame, camera_id=camera.id,
        image=image_relpath(job.clip_id, camera.id, frame),
        keypoints2d=keypoints, joints3d_view=view3d, camera=camera,
        view_matrix=camera.view, projection_matrix=camera.projection,
        augmentation=applied,
        joints3d_root_relative=view3d - view3d[job.root] if job.root_relative else None,
    )
    return record, image[..., :3]


def preview_sample(clip: AnimationClip, frame: int, camera: Camera,
                   augmentation: AugmentationSpec | None = None, seed: int = DEFAULT_SEED,
                   background_dir=None, bake_augmentation: bool = False,
                   style: RenderStyle | None = None, track_root: bool = False,
                   clip_id: str = "preview") -> tuple[SampleRecord, np.ndarray]:
    """Build one sample exactly as :func:`generate_dataset` would, without
    writing anything. Returns the record and the RGB image."""
    skeleton = clip.skeleton
    spec = augmentation or AugmentationSpec()
    pairs = tuple(spec.flip_pairs) if spec.flip_pairs is not None \
        else tuple(flip_pairs_from_names(skeleton.names))
    positions = forward_kinematics_batch(skeleton, clip.frames[frame:frame + 1])[0]
    job = _Job("", clip_id, skeleton, (frame,), positions, (camera,), track_root, False,
               skeleton.parents.index(None), tuple(list_backgrounds(background_dir)), int(seed),
               spec, bake_augmentation, style or RenderStyle(), pairs, frozenset())
    record, image = _make_sample(job, frame, positions[0], camera)
    return record, image


def _run_job(job: _Job) -> list[tuple[str, dict[str, str]]]:
    out = Path(job.out)
    results = []
    for frame, positions in zip(job.frame_indices, job.positions):
        for camera in job.cameras:
            sid = sample_id(job.clip_id, camera.id, frame)
            if sid in job.done:
                continue
            record, image = _make_sample(job, frame, positions, camera)
            png = encode_png(image)
            ann = _jsonio.dumps(record.to_dict()).encode()
            img_rel = record.image
            ann_rel = annotation_relpath(job.clip_id, camera.id, frame)
            _atomic_write(out / img_rel, png)
            _atomic_write(out / ann_rel, ann)
            results.append((sid, {img_rel: _sha256(png), ann_rel: _sha256(ann)}))
    return results


def _read_journal(out: Path) -> dict[str, dict[str, str]]:
    """Completed samples from a previous interrupted run whose files still match."""
    journal = out / "journal.jsonl"
    done = {}
    if not journal.exists():
        return done
    for line in journal.read_text().splitlines():
        try:
            entry = json.loads(line)
            sid, files = entry["sample"], entry["files"]
        except (ValueError, KeyError, TypeError):
            continue  # torn final line
        if all((out / rel).is_file() and _sha256((out / rel).read_bytes()) == digest
               for rel, digest in files.items()):
            done[sid] = files
    return done


def _normalize_clips(clips, clip_ids) -> dict[str, AnimationClip]:
    if isinstance(clips, Mapping):
        named = dict(clips)
    else:
        clips = list(clips)
        if clip_ids is None:
            clip_ids = [f"clip{i:03d}" for i in range(len(clips))]
        if len(clip_ids) != len(clips):
            raise ValueError("clip_ids and clips differ in length")
        if len(set(clip_ids)) != len(clip_ids):
            raise ValueError("duplicate clip ids")
        named = dict(zip(clip_ids, clips))
    if not named:
        raise ValueError("at least one clip is required")
    for cid in named:
        if not _SAFE_ID.match(cid):
            raise ValueError(f"clip id {cid!r} must match {_SAFE_ID.pattern}")
    return named


def generate_dataset(clips, out, rig: RigConfig | None = None,
                     augmentation: AugmentationSpec | None = None, background_dir=None,
                     seed: int = DEFAULT_SEED, workers: int = 1, bake_augmentation: bool = False,
                     split_ratios=(1.0, 0.0, 0.0), style: RenderStyle | None = None,
                     root_relative: bool = False, clip_ids=None, chunk_frames: int = 10) -> Manifest:
    """Render and annotate every (clip, frame, camera) sample under ``out``.

    ``clips`` is a list of :class:`AnimationClip` (ids ``clip000``...) or a
    mapping from clip id to clip. All clips must share one skeleton. Output
    is identical for any ``workers`` value.
    """
    named = _normalize_clips(clips, clip_ids)
    rig = rig or RigConfig()
    spec = augmentation or AugmentationSpec()
    style = style or RenderStyle()
    skeleton = next(iter(named.values())).skeleton
    for cid, clip in named.items():
        if clip.skeleton.names != skeleton.names or clip.skeleton.parents != skeleton.parents:
            raise ValueError(f"clip {cid!r} uses a different skeleton")
    root = skeleton.parents.index(None)
    pairs = tuple(spec.flip_pairs) if spec.flip_pairs is not None \
        else tuple(flip_pairs_from_names(skeleton.names))
    if any(i >= len(skeleton) for p in pairs for i in p):
        raise ValueError("flip_pairs reference joints outside the skeleton")
    splits = split_dataset(list(named), split_ratios, seed)

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    done = _read_journal(out)
    backgrounds = tuple(list_backgrounds(background_dir))

    cameras: dict[str, list[Camera]] = {}
    jobs = []
    for cid, clip in named.items():
        positions = forward_kinematics_batch(clip.skeleton, clip.frames)[0]
        cams = rig_for_clip(positions, rig, root)
        cameras[cid] = cams
        for start in range(0, clip.frame_count, chunk_frames):
            idx = tuple(range(start, min(start + chunk_frames, clip.frame_count)))
            jobs.append(_Job(str(out), cid, clip.skeleton, idx, positions[start:start + len(idx)],
                             tuple(cams), rig.track_root, root_relative, root, backgrounds,
                             int(seed), spec, bake_augmentation, style, pairs, frozenset(done)))

    files: dict[str, dict[str, str]] = dict(done)
    with open(out / "journal.jsonl", "a") as journal:
        def record(results):
            for sid, digests in results:
                files[sid] = digests
                journal.write(json.dumps({"sample": sid, "files": digests}) + "\n")
            journal.flush()

        if workers <= 1:
            for job in jobs:
                record(_run_job(job))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for results in pool.map(_run_job, jobs):
                    record(results)

    total = expected_sample_count([c.frame_count for c in named.values()], rig.count)
    manifest = Manifest(
        skeleton=skeleton,
        cameras=cameras,
        clips=[{"clip_id": cid, "frame_count": c.frame_count, "frame_time": c.frame_time}
               for cid, c in named.items()],
        seed=int(seed), augmentation=spec, rig=rig, splits=splits, total_samples=total,
        bake_augmentation=bake_augmentation, style=style,
    )
    ordered: dict[str, str] = {}
    for cid, frame, cam in manifest.sample_keys():
        ordered.update(sorted(files[sample_id(cid, cam, frame)].items()))
    manifest.files = ordered
    _atomic_write(out / "manifest.json", _jsonio.dumps(manifest.to_dict()).encode())
    (out / "journal.jsonl").unlink()
    log.info("wrote %d samples to %s", total, out)
    return manifest


# ------------------------------------------------------------------ reading

def load_manifest(path) -> Manifest:
    path = Path(path)
    mpath = path / "manifest.json" if path.is_dir() else path
    try:
        doc = json.loads(mpath.read_text())
    except FileNotFoundError as exc:
        raise DatasetError(f"no manifest at {mpath}") from exc
    except (ValueError, UnicodeDecodeError) as exc:
        raise DatasetError(f"corrupt manifest {mpath}: {exc}") from exc
    if not isinstance(doc, dict):
        raise DatasetError(f"corrupt manifest {mpath}: not an object")
    return Manifest.from_dict(doc)


class DatasetReader:
    """Iterates the records a manifest references.

    Problems with individual samples are appended to :attr:`diagnostics`
    and iteration continues. A record is yielded whenever its annotation
    parses, even if its image is missing.
    """

    def __init__(self, root: Path, manifest: Manifest):
        self.root = root
        self.manifest = manifest
        self.diagnostics: list[Diagnostic] = []

    def __iter__(self) -> Iterator[SampleRecord]:
        self.diagnostics = []
        for cid, frame, cam in self.manifest.sample_keys():
            sid = sample_id(cid, cam, frame)
            ann = self.root / annotation_relpath(cid, cam, frame)
            try:
                record = SampleRecord.from_dict(json.loads(ann.read_text()))
            except FileNotFoundError:
                self.diagnostics.append(Diagnostic(sid, "missing-annotation", str(ann)))
                continue
            except (ValueError, KeyError, TypeError, UnicodeDecodeError) as exc:
                self.diagnostics.append(Diagnostic(sid, "corrupt-annotation", f"{ann}: {exc}"))
                continue
            if not (self.root / record.image).is_file():
                self.diagnostics.append(Diagnostic(sid, "missing-image", record.image))
            yield record

    def __len__(self):
        return self.manifest.total_samples


def read_dataset(path) -> tuple[Manifest, DatasetReader]:
    manifest = load_manifest(path)
    return manifest, DatasetReader(Path(path), manifest)


# --------------------------------------------------------------- validation

def reprojection_residuals(record: SampleRecord) -> np.ndarray:
    """Pixel distance between stored keypoints and the reprojected 3D joints."""
    reproj = view_to_image_many(record.joints3d_view, record.projection_matrix,
                                record.camera.intrinsics)
    return np.linalg.norm(reproj[:, :2] - record.keypoints2d[:, :2], axis=1)


@dataclass
class ValidationReport:
    path: str
    samples_checked: int = 0
    violations: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        lines = [f"{self.path}: {self.samples_checked} samples checked, "
                 f"{len(self.violations)} violations"]
        lines += [f"  {v}" for v in self.violations]
        return "\n".join(lines)


def _check_record(record: SampleRecord, sid: str, key, manifest: Manifest, root: Path,
                  names: list[str]) -> list[Diagnostic]:
    out = []
    clip_id, frame, cam_id = key
    if (record.clip_id, record.frame_index, record.camera_id) != (clip_id, frame, cam_id):
        out.append(Diagnostic(sid, "identity", "annotation ids do not match its location"))
    n = len(names)
    for label, arr in (("keypoints2d", record.keypoints2d), ("joints3d_view", record.joints3d_view)):
        if len(arr) != n:
            out.append(Diagnostic(sid, "joint-count", f"{label} has {len(arr)} joints, expected {n}"))
    if out:
        return out
    cam = record.camera
    if not np.allclose(record.view_matrix, view_matrix(cam.extrinsics), rtol=0, atol=1e-9):
        out.append(Diagnostic(sid, "camera", "view_matrix disagrees with eye/focal_point/up"))
    if not np.allclose(record.projection_matrix, projection_matrix(cam.intrinsics), rtol=0, atol=1e-9):
        out.append(Diagnostic(sid, "camera", "projection_matrix disagrees with intrinsics"))
    if record.augmentation is None:
        err = reprojection_residuals(record)
        bad = np.flatnonzero(~(err <= REPROJECTION_TOLERANCE_PX))
        if len(bad):
            detail = ", ".join(f"{names[j]} ({err[j]:.4g} px)" for j in bad)
            out.append(Diagnostic(sid, "reprojection", f"joints off by more than "
                                  f"{REPROJECTION_TOLERANCE_PX} px: {detail}"))
    img_path = root / record.image
    if img_path.is_file():
        try:
            img = load_image(img_path)
        except Exception as exc:  # noqa: BLE001
            out.append(Diagnostic(sid, "image-decode", f"{record.image}: {exc}"))
        else:
            if img.shape[:2] != (cam.intrinsics.height, cam.intrinsics.width):
                out.append(Diagnostic(sid, "image-size", f"{record.image} is {img.shape[1]}x{img.shape[0]}, "
                                      f"camera says {cam.intrinsics.width}x{cam.intrinsics.height}"))
    return out


def validate_dataset(path) -> ValidationReport:
    """Check a dataset on disk; the report lists every violation found."""
    root = Path(path)
    report = ValidationReport(str(root))
    try:
        manifest = load_manifest(root)
    except DatasetError as exc:
        report.violations.append(Diagnostic(None, "manifest", str(exc)))
        return report
    v = report.violations
    names = manifest.joint_names
    cam_counts = {len(c) for c in manifest.cameras.values()}
    expected = sum(c["frame_count"] * len(manifest.cameras.get(c["clip_id"], []))
                   for c in manifest.clips)
    if expected != manifest.total_samples:
        v.append(Diagnostic(None, "count", f"manifest total_samples {manifest.total_samples} "
                            f"!= sum(frames x cameras) = {expected}"))
    if len(cam_counts) == 1 and manifest.total_samples != expected_sample_count(
            [c["frame_count"] for c in manifest.clips], cam_counts.pop()):
        v.append(Diagnostic(None, "count", "total_samples disagrees with the count formula"))
    on_disk = sum(1 for _ in (root / "ann").rglob("*.json")) if (root / "ann").is_dir() else 0
    if on_disk != manifest.total_samples:
        v.append(Diagnostic(None, "count", f"{on_disk} annotation files on disk, "
                            f"manifest lists {manifest.total_samples}"))

    for key in manifest.sample_keys():
        clip_id, frame, cam_id = key
        sid = sample_id(clip_id, cam_id, frame)
        report.samples_checked += 1
        ann_rel = annotation_relpath(clip_id, cam_id, frame)
        img_rel = image_relpath(clip_id, cam_id, frame)
        for rel in (ann_rel, img_rel):
            p = root / rel
            if not p.is_file():
                v.append(Diagnostic(sid, "missing-file", rel))
            elif rel in manifest.files and _sha256(p.read_bytes()) != manifest.files[rel]:
                v.append(Diagnostic(sid, "checksum", f"{rel} differs from the manifest checksum"))
            elif rel not in manifest.files:
                v.append(Diagnostic(sid, "checksum", f"{rel} has no manifest checksum"))
        if not (root / ann_rel).is_file():
            continue
        try:
            record = SampleRecord.from_dict(json.loads((root / ann_rel).read_text()))
        except (ValueError, KeyError, TypeError, UnicodeDecodeError) as exc:
            v.append(Diagnostic(sid, "corrupt-annotation", str(exc)))
            continue
        v.extend(_check_record(record, sid, key, manifest, root, names))
    return report


# ------------------------------------------------------------------- export

def export_coco(path, out_file=None, split: str | None = None) -> dict:
    """2D labels as a COCO person-keypoints style document.

    Visibility uses COCO codes: 2 for visible, 0 for out-of-frame joints
    (whose coordinates are zeroed).
    """
    manifest, reader = read_dataset(path)
    names = manifest.joint_names
    skel = [[p + 1, c + 1] for p, c in manifest.skeleton.bones()]
    images, annotations = [], []
    for record in reader:
        if split is not None and manifest.splits.get(record.clip_id) != split:
            continue
        image_id = len(images) + 1
        intr = record.camera.intrinsics
        images.append({"id": image_id, "file_name": record.image, "width": intr.width,
                       "height": intr.height, "sample": record.id})
        kp = []
        vis = record.keypoints2d[:, 2] > 0
        for (x, y, _), ok in zip(record.keypoints2d, vis):
            kp += [float(x), float(y), 2] if ok else [0.0, 0.0, 0]
        if vis.any():
            xy = record.keypoints2d[vis, :2]
            x0, y0 = xy.min(axis=0)
            x1, y1 = xy.max(axis=0)
            bbox = [float(x0), float(y0), float(x1 - x0), float(y1 - y0)]
        else:
            bbox = [0.0, 0.0, 0.0, 0.0]
        annotations.append({"id": image_id, "image_id": image_id, "category_id": 1,
                            "keypoints": kp, "num_keypoints": int(vis.sum()), "bbox": bbox,
                            "area": bbox[2] * bbox[3], "iscrowd": 0})
    doc = {"images": images, "annotations": annotations,
           "categories": [{"id": 1, "name": "animal", "supercategory": "animal",
                           "keypoints": names, "skeleton": skel}]}
    if out_file is not None:
        Path(out_file).write_text(json.dumps(doc))
    return doc
