"""Command-line entry point: ``synthmocap <command>``.

Exit codes: 0 success, 1 validation failures, 2 usage or config errors,
3 I/O errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import glob
import json
import logging
import os
import re
import sys
from pathlib import Path

import jsonschema

from . import _jsonio
from .anim_io import BVHError, ClipFormatError, clip_stats, load_clip, write_bvh
from .augment import AugmentationSpec
from .camera import CameraError, RigConfig, rig_for_clip
from .dataset import (DEFAULT_SEED, DatasetError, export_coco, generate_dataset, preview_sample,
                      read_dataset, validate_dataset)
from .demo import walk_clip
from .metrics import evaluate, load_predictions
from .render import RenderStyle, save_png

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
WORKERS_ENV = "SYNTHMOCAP_WORKERS"

log = logging.getLogger("synthmocap")


class ConfigError(Exception):
    pass


_RANGE = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "clips": {"type": "array", "items": {"type": "string"}},
        "clip_ids": {"type": "array", "items": {"type": "string"}},
        "rig": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "radius": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "height": {"type": ["number", "null"]},
                "fov_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 180},
                "width": {"type": "integer", "minimum": 1},
                "height_px": {"type": "integer", "minimum": 1},
                "near": {"type": "number", "exclusiveMinimum": 0},
                "far": {"type": "number", "exclusiveMinimum": 0},
                "track_root": {"type": "boolean"},
            },
        },
        "augmentation": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "rotation_deg": _RANGE, "scale": _RANGE, "gaussian_noise_sigma": _RANGE,
                "brightness_delta": _RANGE, "contrast_factor": _RANGE, "hue_shift_deg": _RANGE,
                "saturation_factor": _RANGE,
                "flip_probability": {"type": "number", "minimum": 0, "maximum": 1},
                "grayscale": {"type": "boolean"},
                "flip_pairs": {"type": ["array", "null"],
                               "items": {"type": "array", "items": {"type": "integer"},
                                         "minItems": 2, "maxItems": 2}},
            },
        },
        "style": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "bone_thickness": {"type": "number", "exclusiveMinimum": 0},
                "joint_radius": {"type": "number", "exclusiveMinimum": 0},
                "bone_color": {"type": "array", "items": {"type": "integer"}, "minItems": 3, "maxItems": 3},
                "joint_color": {"type": "array", "items": {"type": "integer"}, "minItems": 3, "maxItems": 3},
            },
        },
        "bake_augmentation": {"type": "boolean"},
        "background_dir": {"type": ["string", "null"]},
        "seed": {"type": "integer"},
        "out": {"type": ["string", "null"]},
        "split": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 3, "maxItems": 3},
        "workers": {"type": "integer", "minimum": 1},
        "root_relative": {"type": "boolean"},
    },
}


@dataclasses.dataclass
class RunConfig:
    clips: list[str] = dataclasses.field(default_factory=list)
    clip_ids: list[str] | None = None
    rig: RigConfig = dataclasses.field(default_factory=RigConfig)
    augmentation: AugmentationSpec = dataclasses.field(default_factory=AugmentationSpec)
    style: RenderStyle = dataclasses.field(default_factory=RenderStyle)
    bake_augmentation: bool = False
    background_dir: str | None = None
    seed: int = DEFAULT_SEED
    out: str | None = None
    split: tuple[float, float, float] = (1.0, 0.0, 0.0)
    workers: int = 1
    root_relative: bool = False

    def to_dict(self) -> dict:
        return {
            "clips": self.clips, "clip_ids": self.clip_ids, "rig": self.rig.to_dict(),
            "augmentation": self.augmentation.to_dict(),
            "style": dataclasses.asdict(self.style),
            "bake_augmentation": self.bake_augmentation, "background_dir": self.background_dir,
            "seed": self.seed, "out": self.out, "split": list(self.split),
            "workers": self.workers, "root_relative": self.root_relative,
        }


def _read_document(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() in (".yaml", ".yml"):
        import yaml
        try:
            return yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from a JSON/YAML file plus flag overrides.

    Clip paths and globs are resolved relative to the config file and must
    match at least one existing file.
    """
    doc, base = {}, Path.cwd()
    if path is not None:
        path = Path(path)
        doc = _read_document(path)
        base = path.parent
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    for k, v in (overrides or {}).items():
        if v is not None:
            doc[k] = v
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from exc

    clips = []
    for pattern in doc.get("clips", []):
        full = pattern if os.path.isabs(pattern) else str(base / pattern)
        matches = sorted(glob.glob(full))
        if not matches:
            raise ConfigError(f"clip path {pattern!r} matches no file")
        clips.extend(matches)
    bg = doc.get("background_dir")
    if bg is not None and not os.path.isabs(bg):
        bg = str(base / bg)
    try:
        rig = RigConfig(**doc.get("rig", {}))
        rig.intrinsics  # noqa: B018 - validates the intrinsics
        aug = AugmentationSpec.from_dict(doc.get("augmentation", {}))
        style_doc = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.get("style", {}).items()}
        style = RenderStyle(**style_doc)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    workers = doc.get("workers")
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        try:
            workers = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}={env!r} is not an integer") from None
    split = tuple(doc.get("split", (1.0, 0.0, 0.0)))
    if abs(sum(split) - 1) > 1e-9:
        raise ConfigError(f"split ratios must sum to 1, got {split}")
    return RunConfig(clips=clips, clip_ids=doc.get("clip_ids"), rig=rig, augmentation=aug,
                     style=style, bake_augmentation=doc.get("bake_augmentation", False),
                     background_dir=bg, seed=doc.get("seed", DEFAULT_SEED), out=doc.get("out"),
                     split=split, workers=max(1, workers), root_relative=doc.get("root_relative", False))


def _clip_id_for(path: str, taken: set) -> str:
    stem = re.sub(r"[^A-Za-z0-9_.-]", "_", Path(path).stem) or "clip"
    cid, k = stem, 1
    while cid in taken:
        cid, k = f"{stem}_{k}", k + 1
    taken.add(cid)
    return cid


# ------------------------------------------------------------------ commands

def cmd_generate(args) -> int:
    cfg = load_config(args.config, {"out": args.out, "seed": args.seed, "workers": args.workers,
                                    "background_dir": args.background_dir,
                                    "clips": args.clips or None})
    if not cfg.out:
        raise ConfigError("no output directory (use --out or 'out' in the config)")
    if not cfg.clips:
        raise ConfigError("no input clips (use --clips or 'clips' in the config)")
    clips = [load_clip(p) for p in cfg.clips]
    taken: set = set()
    ids = cfg.clip_ids or [_clip_id_for(p, taken) for p in cfg.clips]
    manifest = generate_dataset(
        clips, cfg.out, rig=cfg.rig, augmentation=cfg.augmentation,
        background_dir=cfg.background_dir, seed=cfg.seed, workers=cfg.workers,
        bake_augmentation=cfg.bake_augmentation, split_ratios=cfg.split, style=cfg.style,
        root_relative=cfg.root_relative, clip_ids=ids)
    frames = sum(c["frame_count"] for c in manifest.clips)
    print(f"generated {manifest.total_samples} samples ({len(manifest.clips)} clip(s), "
          f"{frames} frames, {cfg.rig.count} cameras) in {cfg.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    report = validate_dataset(args.dataset)
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_stats(args) -> int:
    if args.show_config:
        cfg = load_config(args.config)
        print(json.dumps(cfg.to_dict(), indent=2))
        if args.path is None:
            return EXIT_OK
    if args.path is None:
        raise ConfigError("stats needs a clip file or dataset directory")
    path = Path(args.path)
    if path.is_dir():
        manifest, reader = read_dataset(path)
        per_split: dict[str, int] = {}
        for clip in manifest.clips:
            n = clip["frame_count"] * len(manifest.cameras[clip["clip_id"]])
            split = manifest.splits.get(clip["clip_id"], "train")
            per_split[split] = per_split.get(split, 0) + n
        out = {"joint_count": len(manifest.joint_names), "clips": manifest.clips,
               "camera_count": len(next(iter(manifest.cameras.values()))),
               "total_samples": manifest.total_samples, "samples_per_split": per_split}
    else:
        clip = load_clip(path)
        out = clip_stats(clip).as_dict()
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_eval(args) -> int:
    manifest, reader = read_dataset(args.dataset)
    preds = load_predictions(args.predictions)
    records = list(reader)
    report = evaluate(records, preds, alphas=args.alpha or [0.05], root_aligned=args.root_aligned,
                      joint_names=manifest.joint_names)
    doc = {"unmatched_records": report["unmatched_records"],
           "pck": [r.to_dict() for r in report["pck"]],
           "mpjpe": report["mpjpe"].to_dict() if report["mpjpe"] else None}
    for r in report["pck"]:
        print(r.table() if args.per_joint else
              f"PCK@{r.params['alpha']}: {'no data' if r.mean is None else f'{r.mean:.4f}'}")
    if report["mpjpe"] is not None:
        m = report["mpjpe"]
        print(m.table() if args.per_joint else
              f"MPJPE{' (root-aligned)' if args.root_aligned else ''}: "
              f"{'no data' if m.mean is None else f'{m.mean:.4f}'} {manifest.skeleton.units}")
    if args.report:
        Path(args.report).write_text(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_preview(args) -> int:
    cfg = load_config(args.config, {"seed": args.seed})
    clip = load_clip(args.clip)
    if not 0 <= args.frame < clip.frame_count:
        raise ConfigError(f"frame {args.frame} outside 0..{clip.frame_count - 1}")
    positions = clip.world_positions()
    cams = rig_for_clip(positions, cfg.rig, clip.skeleton.parents.index(None))
    if not 0 <= args.camera < len(cams):
        raise ConfigError(f"camera {args.camera} outside 0..{len(cams) - 1}")
    record, image = preview_sample(clip, args.frame, cams[args.camera], cfg.augmentation,
                                   seed=cfg.seed, background_dir=cfg.background_dir,
                                   bake_augmentation=cfg.bake_augmentation, style=cfg.style,
                                   track_root=cfg.rig.track_root, clip_id=Path(args.clip).stem)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_png(out.with_suffix(".png"), image)
    doc = record.to_dict()
    doc["image"] = out.with_suffix(".png").name
    out.with_suffix(".json").write_text(_jsonio.dumps(doc))
    print(f"wrote {out.with_suffix('.png')} and {out.with_suffix('.json')}")
    return EXIT_OK


def cmd_demo_clip(args) -> int:
    clip = walk_clip(frames=args.frames)
    write_bvh(clip, args.out)
    print(f"wrote {args.frames}-frame demo clip ({len(clip.skeleton)} joints) to {args.out}")
    return EXIT_OK


def cmd_export_coco(args) -> int:
    doc = export_coco(args.dataset, args.out, split=args.split)
    print(f"wrote {len(doc['annotations'])} annotations to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="synthmocap",
                                description="Synthetic multi-view pose datasets from skeletal animation.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="render and annotate a dataset")
    g.add_argument("--config", help="JSON or YAML run config")
    g.add_argument("--out", help="output directory (overrides config)")
    g.add_argument("--clips", nargs="+", help="clip files or globs (overrides config)")
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    g.add_argument("--background-dir")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="check a dataset; exit 1 on violations")
    v.add_argument("dataset")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("stats", help="summarize a clip file or a dataset")
    s.add_argument("path", nargs="?")
    s.add_argument("--show-config", action="store_true", help="print the effective config with defaults")
    s.add_argument("--config")
    s.set_defaults(func=cmd_stats)

    e = sub.add_parser("eval", help="score predictions against a dataset")
    e.add_argument("dataset")
    e.add_argument("predictions")
    e.add_argument("--alpha", type=float, action="append", help="PCK threshold (repeatable)")
    e.add_argument("--root-aligned", action="store_true", help="root-aligned MPJPE")
    e.add_argument("--per-joint", action="store_true", help="print per-joint tables")
    e.add_argument("--report", help="write the JSON report here")
    e.set_defaults(func=cmd_eval)

    pv = sub.add_parser("preview", help="render one annotated sample")
    pv.add_argument("clip")
    pv.add_argument("--frame", type=int, default=0)
    pv.add_argument("--camera", type=int, default=0)
    pv.add_argument("--config")
    pv.add_argument("--seed", type=int)
    pv.add_argument("--out", required=True, help="output path prefix (.png and .json are written)")
    pv.set_defaults(func=cmd_preview)

    d = sub.add_parser("demo-clip", help="write the bundled 37-joint demo walk as BVH")
    d.add_argument("out")
    d.add_argument("--frames", type=int, default=100)
    d.set_defaults(func=cmd_demo_clip)

    c = sub.add_parser("export-coco", help="export 2D labels as COCO keypoints JSON")
    c.add_argument("dataset")
    c.add_argument("out")
    c.add_argument("--split", choices=("train", "val", "test"))
    c.set_defaults(func=cmd_export_coco)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CameraError, jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BVHError, ClipFormatError, DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
