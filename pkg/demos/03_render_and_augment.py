"""Render one sample, augment it and check the keypoints still land on the joints.

Writes PNGs into the directory given as the first argument (default: cwd).
"""

import sys
from pathlib import Path

import numpy as np

from synthmocap import AugmentationSpec, RigConfig, load_sample, rig_for_clip
from synthmocap.augment import augment_sample
from synthmocap.dataset import preview_sample
from synthmocap.render import save_png
from synthmocap.skeleton import flip_pairs_from_names

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
out.mkdir(parents=True, exist_ok=True)

clip = load_sample()
cams = rig_for_clip(clip.world_positions(), RigConfig(count=12), root=0)
record, image = preview_sample(clip, frame=10, camera=cams[3])
save_png(out / "sample.png", image)
print("wrote", out / "sample.png", image.shape)

pairs = flip_pairs_from_names(clip.skeleton.names)
spec = AugmentationSpec(flip_probability=1.0)
for k in range(3):
    img, kp, applied = augment_sample(image, record.keypoints2d, spec, seed=k, sample_key="demo",
                                      flip_pairs=pairs)
    # mark every visible keypoint with a green dot to eyeball the alignment
    marked = img.copy()
    for x, y, v in kp:
        if v:
            marked[int(round(y)), int(round(x))] = (0, 255, 0)
    save_png(out / f"augmented_{k}.png", marked)
    print(f"augmented_{k}.png rot={applied.rotation_deg:+.1f} scale={applied.scale:.2f} "
          f"flip={applied.flip} visible={int(kp[:, 2].sum())}")

# Joint discs use a colour nothing else uses, so they can be found again
ys, xs = np.nonzero(np.all(image == (255, 64, 32), axis=-1))
print("joint-coloured pixels:", len(xs))
