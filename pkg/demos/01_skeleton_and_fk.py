"""Load the bundled walk, inspect the rig and run forward kinematics."""

import numpy as np

from synthmocap import forward_kinematics_batch, load_sample
from synthmocap.anim_io import clip_stats
from synthmocap.skeleton import bone_lengths, flip_pairs_from_names

clip = load_sample("quadruped_walk.bvh")
sk = clip.skeleton
print(f"{len(sk)} joints, {sk.channel_count} channels, {clip.frame_count} frames "
      f"at {1 / clip.frame_time:.0f} fps")

# The hierarchy, indented by depth
depth = {}
for i, j in enumerate(sk.joints):
    depth[i] = 0 if j.parent is None else depth[j.parent] + 1
    print("  " * depth[i] + j.name, " ".join(j.channels))

# World positions for every frame at once: (frames, joints, 3)
positions, rotations = forward_kinematics_batch(sk, clip.frames)
print("root path (cm):", positions[0, 0].round(2), "->", positions[-1, 0].round(2))

# Bones keep their rest length in every frame
worst = 0.0
for (name, length), (p, c) in zip(bone_lengths(sk), sk.bones()):
    d = np.linalg.norm(positions[:, c] - positions[:, p], axis=1)
    worst = max(worst, np.abs(d - length).max())
print(f"largest bone-length drift: {worst:.2e} cm")

pairs = flip_pairs_from_names(sk.names)
print(len(pairs), "left/right pairs, e.g.", [(sk.names[a], sk.names[b]) for a, b in pairs[:3]])
print(clip_stats(clip).as_dict())
