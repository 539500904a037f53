import json
import shutil

import numpy as np
import pytest

from synthmocap.augment import AugmentationSpec
from synthmocap.camera import RigConfig
from synthmocap.dataset import (COUNT_FORMULA, DatasetError, Manifest, SampleRecord, _run_job,
                                expected_sample_count, export_coco, generate_dataset, load_manifest,
                                read_dataset, split_dataset, validate_dataset)
from synthmocap.demo import walk_clip
from synthmocap.render import load_image, save_png


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_cardinality_and_layout(small_dataset):
    out, manifest = small_dataset
    assert manifest.total_samples == 4 * 12
    assert len(list((out / "ann").rglob("*.json"))) == 48
    assert len(list((out / "images").rglob("*.png"))) == 48
    assert (out / "images/clip000/cam05/000003.png").is_file()
    assert not (out / "journal.jsonl").exists()
    doc = json.loads((out / "manifest.json").read_text())
    assert doc["count_formula"] == COUNT_FORMULA
    assert len(doc["joint_names"]) == 37


def test_counting_formula():
    assert expected_sample_count([100], 12) == 1200
    assert expected_sample_count([3, 4, 5], 2) == 24


def test_zero_clips_rejected(tmp_path):
    with pytest.raises(ValueError):
        generate_dataset([], tmp_path / "x")


def test_annotation_schema(small_dataset):
    out, _ = small_dataset
    doc = json.loads((out / "ann/clip000/cam00/000000.json").read_text())
    assert set(doc) == {"clip_id", "frame_index", "camera_id", "image", "keypoints2d", "joints3d_view", "camera"}
    assert set(doc["camera"]) == {"eye", "focal_point", "up", "fov_deg", "width", "height", "near", "far",
                                  "view_matrix", "projection_matrix"}
    assert len(doc["keypoints2d"]) == 37 and len(doc["keypoints2d"][0]) == 3
    assert doc["image"] == "images/clip000/cam00/000000.png"


def test_read_roundtrip_bit_exact(small_dataset):
    out, manifest = small_dataset
    m2, reader = read_dataset(out)
    records = list(reader)
    assert len(records) == manifest.total_samples
    assert reader.diagnostics == []
    for rec in records[:10]:
        path = out / f"ann/{rec.clip_id}/{rec.camera_id}/{rec.frame_index:06d}.json"
        raw = json.loads(path.read_text())
        np.testing.assert_array_equal(rec.keypoints2d, np.array(raw["keypoints2d"], float))
        again = SampleRecord.from_dict(json.loads(json.dumps(rec.to_dict(), default=lambda a: a.tolist())))
        np.testing.assert_array_equal(again.joints3d_view, rec.joints3d_view)
    assert m2.to_dict() == Manifest.from_dict(m2.to_dict()).to_dict()


def test_stored_values_match_recomputation(small_dataset):
    """Records written to disk equal the in-memory float64 values bit for bit."""
    out, manifest = small_dataset
    from synthmocap.dataset import preview_sample
    clip = walk_clip(frames=4)
    cam = manifest.cameras["clip000"][3]
    rec, _ = preview_sample(clip, 2, cam, manifest.augmentation, seed=manifest.seed, clip_id="clip000")
    _, reader = read_dataset(out)
    stored = next(r for r in reader if (r.frame_index, r.camera_id) == (2, "cam03"))
    assert np.array_equal(stored.keypoints2d, rec.keypoints2d)
    assert np.array_equal(stored.joints3d_view, rec.joints3d_view)
    assert np.array_equal(stored.view_matrix, rec.view_matrix)


def test_missing_image_reported(small_dataset, tmp_path):
    out = tmp_path / "copy"
    shutil.copytree(small_dataset[0], out)
    (out / "images/clip000/cam02/000001.png").unlink()
    _, reader = read_dataset(out)
    records = list(reader)
    assert len(records) == 48
    assert [(d.sample, d.rule) for d in reader.diagnostics] == [("clip000/cam02/000001", "missing-image")]
    report = validate_dataset(out)
    assert not report.ok
    assert any(v.sample == "clip000/cam02/000001" for v in report.violations)


def test_corrupt_manifest_is_hard_error(small_dataset, tmp_path):
    out = tmp_path / "copy"
    shutil.copytree(small_dataset[0], out)
    (out / "manifest.json").write_text("{ nope")
    with pytest.raises(DatasetError):
        read_dataset(out)
    assert [v.rule for v in validate_dataset(out).violations] == ["manifest"]


def test_fresh_dataset_validates(small_dataset):
    report = validate_dataset(small_dataset[0])
    assert report.ok, report.summary()
    assert report.samples_checked == 48


def test_validate_catches_joint_count(small_dataset, tmp_path):
    out = tmp_path / "copy"
    shutil.copytree(small_dataset[0], out)
    p = out / "ann/clip000/cam01/000000.json"
    doc = json.loads(p.read_text())
    doc["keypoints2d"] = doc["keypoints2d"][:36]
    p.write_text(json.dumps(doc))
    rules = {(v.sample, v.rule) for v in validate_dataset(out).violations}
    assert ("clip000/cam01/000000", "joint-count") in rules


def test_validate_names_reprojection_joint(small_dataset, tmp_path):
    out = tmp_path / "copy"
    shutil.copytree(small_dataset[0], out)
    p = out / "ann/clip000/cam04/000002.json"
    doc = json.loads(p.read_text())
    doc["keypoints2d"][5][0] += 2.0
    p.write_text(json.dumps(doc))
    bad = [v for v in validate_dataset(out).violations if v.rule == "reprojection"]
    assert len(bad) == 1 and "Jaw" in bad[0].message and bad[0].sample == "clip000/cam04/000002"


def test_split_properties():
    ids = [f"clip{i:03d}" for i in range(10)]
    a = split_dataset(ids, (0.8, 0.1, 0.1), seed=3)
    assert a == split_dataset(list(reversed(ids)), (0.8, 0.1, 0.1), seed=3)
    counts = {s: list(a.values()).count(s) for s in ("train", "val", "test")}
    assert counts == {"train": 8, "val": 1, "test": 1}
    assert set(split_dataset(ids, (1, 0, 0)).values()) == {"train"}
    with pytest.raises(ValueError):
        split_dataset(["a", "b"], (0.8, 0.1, 0.1))
    with pytest.raises(ValueError):
        split_dataset(ids, (0.5, 0.2, 0.2))


def test_multi_clip_generation_splits_by_clip(tmp_path):
    clips = {f"walk{i}": walk_clip(frames=2, speed=0.3 * i) for i in range(3)}
    m = generate_dataset(clips, tmp_path / "ds", rig=RigConfig(count=2, width=64, height_px=48),
                         split_ratios=(1 / 3, 1 / 3, 1 / 3))
    assert m.total_samples == 3 * 2 * 2
    assert sorted(m.splits.values()) == ["test", "train", "val"]
    _, reader = read_dataset(tmp_path / "ds")
    for rec in reader:
        assert m.splits[rec.clip_id] in ("train", "val", "test")


def test_workers_do_not_change_output(tmp_path):
    clip = walk_clip(frames=6)
    kwargs = dict(rig=RigConfig(count=3, width=80, height_px=60), seed=11, bake_augmentation=True)
    generate_dataset([clip], tmp_path / "a", workers=1, chunk_frames=2, **kwargs)
    generate_dataset([clip], tmp_path / "b", workers=3, chunk_frames=2, **kwargs)
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")


def test_backgrounds_are_used(tmp_path, rng):
    bgdir = tmp_path / "bg"
    bgdir.mkdir()
    for i in range(3):
        save_png(bgdir / f"b{i}.png", np.full((10, 10, 3), 30 + 60 * i, np.uint8))
    (bgdir / "notes.txt").write_text("ignored")
    generate_dataset([walk_clip(frames=3)], tmp_path / "ds", rig=RigConfig(count=4, width=64, height_px=48),
                     background_dir=bgdir)
    corners = {int(load_image(p)[0, 0, 0]) for p in (tmp_path / "ds/images").rglob("*.png")}
    assert corners <= {30, 90, 150} and len(corners) >= 2


def test_unreadable_background_dir_falls_back(tmp_path):
    with pytest.warns(UserWarning):
        generate_dataset([walk_clip(frames=1)], tmp_path / "ds", rig=RigConfig(count=1, width=32, height_px=24),
                         background_dir=tmp_path / "does-not-exist")
    img = load_image(next((tmp_path / "ds/images").rglob("*.png")))
    assert tuple(img[0, 0]) == (128, 128, 128)


def test_grayscale_and_baked_augmentation(tmp_path):
    spec = AugmentationSpec(grayscale=True)
    m = generate_dataset([walk_clip(frames=2)], tmp_path / "ds", rig=RigConfig(count=2, width=64, height_px=48),
                         augmentation=spec, bake_augmentation=True)
    assert validate_dataset(tmp_path / "ds").ok
    _, reader = read_dataset(tmp_path / "ds")
    recs = list(reader)
    assert all(r.augmentation is not None for r in recs)
    for p in (tmp_path / "ds/images").rglob("*.png"):
        img = load_image(p)
        assert (img[..., 0] == img[..., 1]).all() and (img[..., 1] == img[..., 2]).all()
    assert load_manifest(tmp_path / "ds").augmentation == spec


def test_root_relative_export(tmp_path):
    generate_dataset([walk_clip(frames=1)], tmp_path / "ds", rig=RigConfig(count=1, width=32, height_px=24),
                     root_relative=True)
    rec = next(iter(read_dataset(tmp_path / "ds")[1]))
    np.testing.assert_array_equal(rec.joints3d_root_relative, rec.joints3d_view - rec.joints3d_view[0])


def test_resume_from_journal(tmp_path, monkeypatch):
    clip = walk_clip(frames=4)
    kwargs = dict(rig=RigConfig(count=2, width=48, height_px=36), seed=5, chunk_frames=1)
    ref = generate_dataset([clip], tmp_path / "ref", **kwargs)

    import synthmocap.dataset as ds
    calls = {"n": 0}

    def flaky(job):
        calls["n"] += 1
        if calls["n"] == 3:
            raise OSError("disk full")
        return _run_job(job)

    monkeypatch.setattr(ds, "_run_job", flaky)
    with pytest.raises(OSError):
        generate_dataset([clip], tmp_path / "run", **kwargs)
    journal = (tmp_path / "run/journal.jsonl").read_text().splitlines()
    assert len(journal) == 4 and not (tmp_path / "run/manifest.json").exists()

    seen = []
    monkeypatch.setattr(ds, "_run_job", lambda job: seen.append(len(job.done)) or _run_job(job))
    generate_dataset([clip], tmp_path / "run", **kwargs)
    assert seen and all(n == 4 for n in seen)
    assert tree_bytes(tmp_path / "run") == tree_bytes(tmp_path / "ref")
    assert ref.total_samples == 8


def test_coco_export(small_dataset, tmp_path):
    doc = export_coco(small_dataset[0], tmp_path / "coco.json")
    assert len(doc["images"]) == 48 and len(doc["annotations"]) == 48
    cat = doc["categories"][0]
    assert len(cat["keypoints"]) == 37 and len(cat["skeleton"]) == 36
    ann = doc["annotations"][0]
    assert len(ann["keypoints"]) == 3 * 37
    assert set(ann["keypoints"][2::3]) <= {0, 2}
    assert json.loads((tmp_path / "coco.json").read_text())["images"][0]["width"] == 640
