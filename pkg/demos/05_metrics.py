"""Score a few fake predictors against generated ground truth."""

import tempfile
from pathlib import Path

import numpy as np

from synthmocap import RigConfig, generate_dataset, read_dataset, walk_clip
from synthmocap.metrics import mpjpe, pck

out = Path(tempfile.mkdtemp()) / "ds"
generate_dataset([walk_clip(frames=5)], out, rig=RigConfig(count=6, width=320, height_px=240))
manifest, reader = read_dataset(out)
records = list(reader)
gt2 = np.stack([r.keypoints2d[:, :2] for r in records])
gt3 = np.stack([r.joints3d_view for r in records])
rng = np.random.default_rng(0)

print("perfect     PCK@0.05", pck(gt2, records).mean, " MPJPE", mpjpe(gt3, records).mean)
for sigma in (1, 3, 10):
    noisy = gt2 + rng.normal(0, sigma, gt2.shape)
    print(f"noise {sigma:>2}px  PCK@0.05 {pck(noisy, records).mean:.3f}")

shifted = gt3 + np.array([3.0, 4.0, 0.0])
print("offset (3,4,0) MPJPE", mpjpe(shifted, records).mean,
      " root-aligned", mpjpe(shifted, records, root_aligned=True).mean)

res = pck(gt2 + rng.normal(0, 3, gt2.shape), records, alpha=0.05, joint_names=manifest.joint_names)
print(res.table().splitlines()[-1])
