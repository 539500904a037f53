"""Synthetic multi-view pose-estimation datasets from skeletal animation.

Pipeline: forward kinematics -> ring camera rig -> world/view/pixel projection
-> stick-figure render composited over backgrounds -> optional augmentation
-> per-sample PNG + JSON annotation, with validation and evaluation metrics.
"""

from .anim_io import AnimationClip, BVHError, clip_stats, load_clip, parse_bvh, read_clip, write_bvh, write_clip
from .augment import AppliedAugmentation, AugmentationSpec, apply_geometric, apply_photometric, sample_params
from .camera import (Camera, CameraExtrinsics, CameraIntrinsics, RigConfig, build_ring_rig,
                     projection_matrix, rig_for_clip, view_matrix)
from .dataset import (Manifest, SampleRecord, export_coco, generate_dataset, read_dataset,
                      split_dataset, validate_dataset)
from .demo import load_sample, quadruped_rig, walk_clip
from .metrics import mpjpe, pck, reprojection_error
from .projection import Keypoint2D, project_joints, project_points, view_to_image, world_to_view
from .render import RenderStyle, composite, render_skeleton, to_grayscale
from .skeleton import (Joint, Skeleton, WorldPose, bone_lengths, forward_kinematics,
                       forward_kinematics_batch, validate_skeleton)

__version__ = "0.1.0"
