"""Frame a ring of cameras around the walk and project one pose."""

import numpy as np

from synthmocap import RigConfig, load_sample, project_points, rig_for_clip
from synthmocap.camera import framing

clip = load_sample()
positions = clip.world_positions()
center, reach = framing(positions, root=0)
print("subject centre", center.round(1), "reach", round(float(reach), 1), "cm")

cams = rig_for_clip(positions, RigConfig(count=12), root=0)
for cam in cams[:4]:
    e = cam.extrinsics
    print(cam.id, "eye", np.round(e.eye, 1), "looking at", np.round(e.focal_point, 1))

# Keypoints are (x, y, visible) in pixels, view coordinates are camera-space cm
kp, view = project_points(positions[0], cams[0])
print("joints in frame:", int(kp[:, 2].sum()), "of", len(kp))
print("Head at pixel", kp[clip.skeleton.index("Head"), :2].round(2),
      "depth", round(float(-view[clip.skeleton.index("Head"), 2]), 1), "cm")

# The stored matrices are enough to redo the projection by hand
p = np.append(positions[0, 0], 1.0)
clip_xyzw = cams[0].projection @ cams[0].view @ p
ndc = clip_xyzw[:2] / abs(clip_xyzw[3])
w, h = cams[0].intrinsics.width, cams[0].intrinsics.height
print("root by hand:", ((ndc[0] + 1) / 2 * (w - 1)).round(6), ((1 - ndc[1]) / 2 * (h - 1)).round(6))
print("root via api:", kp[0, :2].round(6))
