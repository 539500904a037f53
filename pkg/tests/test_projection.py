import numpy as np
import pytest

from synthmocap.camera import Camera, CameraExtrinsics, CameraIntrinsics, build_ring_rig, projection_matrix
from synthmocap.projection import (project_joints, project_points, view_to_image, view_to_image_many,
                                   view_to_ndc, world_to_view)
from synthmocap.skeleton import forward_kinematics

from oracles import project_scalar

INTR = CameraIntrinsics(45.0, 640, 480, 0.1, 10000.0)


def test_world_to_view_examples():
    pts = np.array([[1.0, 2.0, 3.0], [-4.0, 0.5, 9.0]])
    np.testing.assert_array_equal(world_to_view(pts, np.eye(4)), pts)
    cam = Camera("c", CameraExtrinsics((0, 0, 10), (0, 0, 0)), INTR)
    np.testing.assert_allclose(world_to_view([0, 0, 10], cam.view), [[0, 0, 0]], atol=1e-12)
    np.testing.assert_allclose(world_to_view([0, 10, 0], cam.view), [[0, 10, -10]], atol=1e-12)


def test_center_maps_to_pixel_center():
    kp = view_to_image([0, 0, -25.0], projection_matrix(INTR), INTR)
    assert kp.x == pytest.approx(319.5, abs=1e-9)
    assert kp.y == pytest.approx(239.5, abs=1e-9)
    assert kp.visible


def test_top_edge_with_90_degree_fov():
    intr = CameraIntrinsics(90.0, 640, 480, 0.1, 1000.0)
    kp = view_to_image([0, 10, -10], projection_matrix(intr), intr)
    assert kp.y == pytest.approx(0.0, abs=1e-9)
    assert kp.x == pytest.approx(319.5, abs=1e-9)


def test_behind_camera_is_invisible():
    kp = view_to_image([0, 0, 5.0], projection_matrix(INTR), INTR)
    assert not kp.visible
    assert np.isfinite(kp.x) and np.isfinite(kp.y)
    # between the camera and the near plane
    assert not view_to_image([0, 0, -0.05], projection_matrix(INTR), INTR).visible


def test_oracle_agreement_1000(rng):
    worst = 0.0
    for _ in range(1000):
        eye = rng.normal(0, 300, 3)
        target = eye + rng.normal(0, 1, 3) * rng.uniform(1, 200)
        intr = CameraIntrinsics(rng.uniform(20, 100), int(rng.integers(32, 1921)),
                                int(rng.integers(32, 1081)), 0.1, 5000.0)
        cam = Camera("c", CameraExtrinsics(eye, target, (0, 1, 0)), intr)
        point = target + rng.normal(0, 60, 3)
        kp, v3 = project_points(point[None], cam)
        ox, oy, ovis, ov = project_scalar(point, eye, target, (0, 1, 0), intr.vertical_fov,
                                          intr.width, intr.height, intr.near, intr.far)
        np.testing.assert_allclose(v3[0], ov, atol=1e-9)
        err = max(abs(kp[0, 0] - ox), abs(kp[0, 1] - oy))
        if abs(ov[2]) > 1e-3:
            worst = max(worst, err)
            assert bool(kp[0, 2]) == ovis
    assert worst <= 1e-6


def test_project_joints_counts_and_root_visible(rig37, demo_clip):
    pos = demo_clip.world_positions()
    cams = build_ring_rig(pos[:, 0].mean(axis=0), 300.0, 80.0, 12, INTR)
    wp = forward_kinematics(rig37, demo_clip.frames[0])
    for cam in cams:
        kp, v3 = project_joints(wp, cam)
        assert kp.shape == (37, 3) and v3.shape == (37, 3)
        assert kp[0, 2] == 1


def test_far_away_joints_invisible(rig37, demo_clip):
    wp = forward_kinematics(rig37, demo_clip.frames[0])
    cam = Camera("c", CameraExtrinsics((0, 80, 300), (0, 60, 0)), INTR)
    shifted = type(wp)(wp.positions + [1e6, 0, 0], wp.rotations)
    kp, _ = project_joints(shifted, cam)
    assert not kp[:, 2].any()


def test_ndc_invariant_under_resolution(rng):
    pts = np.column_stack([rng.uniform(-5, 5, 50), rng.uniform(-5, 5, 50), rng.uniform(-50, -1, 50)])
    small = CameraIntrinsics(50.0, 320, 240, 0.1, 100.0)
    big = CameraIntrinsics(50.0, 640, 480, 0.1, 100.0)
    np.testing.assert_allclose(view_to_ndc(pts, projection_matrix(small)),
                               view_to_ndc(pts, projection_matrix(big)), atol=1e-12)
    kp_s = view_to_image_many(pts, projection_matrix(small), small)
    kp_b = view_to_image_many(pts, projection_matrix(big), big)
    np.testing.assert_allclose(kp_s[:, 0] / 319, kp_b[:, 0] / 639, atol=1e-12)
    np.testing.assert_allclose(kp_s[:, 1] / 239, kp_b[:, 1] / 479, atol=1e-12)


def test_visible_keypoints_within_bounds(rng):
    pts = np.column_stack([rng.uniform(-30, 30, 500), rng.uniform(-30, 30, 500), rng.uniform(-60, 10, 500)])
    kp = view_to_image_many(pts, projection_matrix(INTR), INTR)
    vis = kp[:, 2] > 0
    assert vis.any() and (~vis).any()
    assert np.all((kp[vis, 0] >= 0) & (kp[vis, 0] <= 639) & (kp[vis, 1] >= 0) & (kp[vis, 1] <= 479))
