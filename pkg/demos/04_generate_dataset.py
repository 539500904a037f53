"""Generate a small dataset, validate it, read it back and export COCO.

Usage: python 04_generate_dataset.py [output_dir]
"""

import sys
import tempfile
from pathlib import Path

from synthmocap import RigConfig, generate_dataset, read_dataset, validate_dataset, walk_clip
from synthmocap.dataset import export_coco

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp()) / "walk_ds"

clips = {"walk_slow": walk_clip(frames=8, speed=0.3), "walk_fast": walk_clip(frames=8, speed=1.2),
         "trot": walk_clip(frames=8, period=16)}
manifest = generate_dataset(clips, out, rig=RigConfig(count=4, width=320, height_px=240),
                            split_ratios=(0.34, 0.33, 0.33), seed=1, workers=1)
print(f"{manifest.total_samples} samples in {out}")
print("splits:", manifest.splits)

report = validate_dataset(out)
print(report.summary())

manifest, reader = read_dataset(out)
first = next(iter(reader))
print(first.clip_id, first.frame_index, first.camera_id, first.image)
print("view matrix row 0:", first.view_matrix[0])

doc = export_coco(out, out / "coco_val.json", split="val")
print(len(doc["images"]), "COCO images in the val split")
