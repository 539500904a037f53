"""Pose-estimation scores against dataset ground truth.

``pck`` is bounding-box normalized: a joint counts as correct when it lies
within ``alpha`` times the diagonal of the sample's visible ground-truth
keypoint box. ``mpjpe`` is the mean Euclidean error in view space.
Results with nothing to evaluate are flagged ``no_data`` rather than scored 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .projection import view_to_image_many


@dataclass
class PoseEvalResult:
    metric: str
    per_joint: np.ndarray  # NaN where a joint was never evaluated
    mean: float | None
    joint_count: int
    sample_count: int
    evaluated: int
    joint_names: list[str] | None = None
    params: dict = field(default_factory=dict)

    @property
    def no_data(self) -> bool:
        return self.evaluated == 0

    def to_dict(self) -> dict:
        names = self.joint_names or [str(i) for i in range(self.joint_count)]
        return {
            "metric": self.metric,
            "params": self.params,
            "mean": self.mean,
            "no_data": self.no_data,
            "joint_count": self.joint_count,
            "sample_count": self.sample_count,
            "evaluated": self.evaluated,
            "per_joint": {n: (None if np.isnan(s) else float(s)) for n, s in zip(names, self.per_joint)},
        }

    def table(self) -> str:
        names = self.joint_names or [str(i) for i in range(self.joint_count)]
        width = max([len(n) for n in names] + [5])
        head = f"{self.metric} {self.params}" if self.params else self.metric
        rows = [head, "-" * (width + 14)]
        for n, s in zip(names, self.per_joint):
            rows.append(f"{n:<{width}}  {'n/a' if np.isnan(s) else f'{s:10.4f}'}")
        rows.append("-" * (width + 14))
        rows.append(f"{'mean':<{width}}  {'no data' if self.mean is None else f'{self.mean:10.4f}'}")
        return "\n".join(rows)


def _gt_keypoints(gt) -> np.ndarray:
    if len(gt) == 0:
        return np.zeros((0, 0, 3))
    if hasattr(gt[0], "keypoints2d"):
        return np.stack([r.keypoints2d for r in gt])
    return np.asarray(gt, dtype=float)


def _gt_joints3d(gt) -> np.ndarray:
    if len(gt) == 0:
        return np.zeros((0, 0, 3))
    if hasattr(gt[0], "joints3d_view"):
        return np.stack([r.joints3d_view for r in gt])
    return np.asarray(gt, dtype=float)


def pck(pred, gt, alpha: float = 0.05, joint_names: Sequence[str] | None = None) -> PoseEvalResult:
    """``pred`` is (N, J, 2+); ``gt`` is a list of SampleRecords or an (N, J, 3)
    array of ``x, y, visible``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    gt_kp = _gt_keypoints(gt)
    pred = np.asarray(pred, dtype=float)
    if gt_kp.shape[0] == 0 and pred.size == 0:
        return PoseEvalResult("pck", np.zeros(0), None, 0, 0, 0, None, {"alpha": alpha})
    if pred.shape[:2] != gt_kp.shape[:2]:
        raise ValueError(f"prediction shape {pred.shape[:2]} != ground truth {gt_kp.shape[:2]}")
    n, j = gt_kp.shape[:2]
    visible = gt_kp[..., 2] > 0
    ref = np.zeros(n)
    for i in range(n):
        if visible[i].any():
            xy = gt_kp[i, visible[i], :2]
            ref[i] = np.linalg.norm(xy.max(axis=0) - xy.min(axis=0))
    dist = np.linalg.norm(pred[..., :2] - gt_kp[..., :2], axis=-1)
    correct = (dist <= alpha * ref[:, None]) & visible
    evaluated = visible.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_joint = np.where(evaluated > 0, correct.sum(axis=0) / evaluated, np.nan)
    total = int(visible.sum())
    mean = float(correct.sum() / total) if total else None
    return PoseEvalResult("pck", per_joint, mean, j, n, total,
                          list(joint_names) if joint_names else None, {"alpha": alpha})


def mpjpe(pred3d, gt, root_aligned: bool = False, root: int = 0,
          joint_names: Sequence[str] | None = None) -> PoseEvalResult:
    gt3d = _gt_joints3d(gt)
    pred3d = np.asarray(pred3d, dtype=float)
    if gt3d.shape[0] == 0 and pred3d.size == 0:
        pred3d = gt3d
    if pred3d.shape != gt3d.shape:
        raise ValueError(f"prediction shape {pred3d.shape} != ground truth {gt3d.shape}")
    n, j = gt3d.shape[:2]
    if root_aligned:
        pred3d = pred3d - pred3d[:, root:root + 1]
        gt3d = gt3d - gt3d[:, root:root + 1]
    err = np.linalg.norm(pred3d - gt3d, axis=-1)
    if n == 0 or j == 0:
        return PoseEvalResult("mpjpe", np.full(j, np.nan), None, j, n, 0,
                              list(joint_names) if joint_names else None,
                              {"root_aligned": root_aligned})
    return PoseEvalResult("mpjpe", err.mean(axis=0), float(err.mean()), j, n, n * j,
                          list(joint_names) if joint_names else None, {"root_aligned": root_aligned})


@dataclass(frozen=True)
class ReprojectionError:
    max: float | None
    mean: float | None
    count: int

    @property
    def no_data(self) -> bool:
        return self.count == 0


def reprojection_error(record) -> ReprojectionError:
    """Pixel error between stored keypoints and stored 3D joints pushed back
    through the stored camera, over visible joints."""
    reproj = view_to_image_many(record.joints3d_view, record.projection_matrix,
                                record.camera.intrinsics)
    visible = record.keypoints2d[:, 2] > 0
    if not visible.any():
        return ReprojectionError(None, None, 0)
    err = np.linalg.norm(reproj[visible, :2] - record.keypoints2d[visible, :2], axis=1)
    return ReprojectionError(float(err.max()), float(err.mean()), int(visible.sum()))


def load_predictions(path) -> dict[tuple[str, int, str], dict]:
    """Read a predictions document keyed by (clip_id, frame_index, camera_id).

    Format: ``{"predictions": [{"clip_id", "frame_index", "camera_id",
    "keypoints2d": [[x, y(, v)]...], "joints3d_view": [[x, y, z]...]}]}``;
    either keypoint field may be omitted.
    """
    doc = json.loads(Path(path).read_text())
    items = doc["predictions"] if isinstance(doc, dict) else doc
    return {(p["clip_id"], int(p["frame_index"]), p["camera_id"]): p for p in items}


def evaluate(records, predictions: dict, alphas=(0.05,), root_aligned: bool = False,
             joint_names=None) -> dict:
    """Score predictions against the records they name. Records without a
    prediction are skipped and counted in ``unmatched``."""
    matched_2d, gt_2d, matched_3d, gt_3d = [], [], [], []
    unmatched = 0
    for rec in records:
        p = predictions.get((rec.clip_id, rec.frame_index, rec.camera_id))
        if p is None:
            unmatched += 1
            continue
        if "keypoints2d" in p:
            matched_2d.append(np.asarray(p["keypoints2d"], dtype=float)[:, :2])
            gt_2d.append(rec)
        if "joints3d_view" in p:
            matched_3d.append(np.asarray(p["joints3d_view"], dtype=float))
            gt_3d.append(rec)
    report = {"unmatched_records": unmatched, "pck": [], "mpjpe": None}
    if gt_2d:
        for a in alphas:
            report["pck"].append(pck(np.stack(matched_2d), gt_2d, a, joint_names))
    if gt_3d:
        report["mpjpe"] = mpjpe(np.stack(matched_3d), gt_3d, root_aligned, joint_names=joint_names)
    return report
