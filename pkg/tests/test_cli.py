import json
import subprocess
import sys

import pytest
import yaml

from synthmocap.cli import ConfigError, load_config, main
from synthmocap.dataset import read_dataset

SUBCOMMANDS = ["generate", "validate", "stats", "eval", "preview", "demo-clip", "export-coco"]


@pytest.fixture(scope="module")
def cli_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["demo-clip", str(root / "walk.bvh"), "--frames", "3"]) == 0
    cfg = {"clips": ["*.bvh"], "rig": {"count": 3, "width": 96, "height_px": 72}, "seed": 4}
    (root / "run.yaml").write_text(yaml.safe_dump(cfg))
    assert main(["generate", "--config", str(root / "run.yaml"), "--out", str(root / "ds")]) == 0
    return root


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help(cmd, capsys):
    with pytest.raises(SystemExit) as exc:
        main([cmd, "--help"])
    assert exc.value.code == 0
    assert "usage" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "synthmocap", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "generate" in proc.stdout


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--frobnicate"])
    assert exc.value.code == 2


def test_generate_then_validate(cli_dataset, capsys):
    manifest, reader = read_dataset(cli_dataset / "ds")
    assert manifest.total_samples == 9
    assert [c["clip_id"] for c in manifest.clips] == ["walk"]
    assert main(["validate", str(cli_dataset / "ds")]) == 0
    assert "0 violations" in capsys.readouterr().out


def test_validate_fails_on_deleted_image(cli_dataset, tmp_path):
    import shutil
    out = tmp_path / "ds"
    shutil.copytree(cli_dataset / "ds", out)
    (out / "images/walk/cam01/000002.png").unlink()
    assert main(["validate", str(out)]) == 1


def test_validate_missing_dir_is_io_error(tmp_path):
    assert main(["validate", str(tmp_path / "nope")]) in (1, 3)


def test_eval_with_ground_truth(cli_dataset, tmp_path, capsys):
    _, reader = read_dataset(cli_dataset / "ds")
    preds = [{"clip_id": r.clip_id, "frame_index": r.frame_index, "camera_id": r.camera_id,
              "keypoints2d": r.keypoints2d.tolist(), "joints3d_view": r.joints3d_view.tolist()}
             for r in reader]
    (tmp_path / "p.json").write_text(json.dumps({"predictions": preds}))
    code = main(["eval", str(cli_dataset / "ds"), str(tmp_path / "p.json"), "--alpha", "0.05",
                 "--alpha", "0.2", "--report", str(tmp_path / "r.json")])
    assert code == 0
    out = capsys.readouterr().out
    assert "PCK@0.05: 1.0000" in out and "MPJPE: 0.0000" in out
    report = json.loads((tmp_path / "r.json").read_text())
    assert [p["mean"] for p in report["pck"]] == [1.0, 1.0]
    assert report["mpjpe"]["mean"] == 0.0
    assert main(["eval", str(cli_dataset / "ds"), str(tmp_path / "p.json"), "--per-joint"]) == 0
    assert "LPaw_end" in capsys.readouterr().out


def test_stats(cli_dataset, capsys):
    assert main(["stats", str(cli_dataset / "ds")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["total_samples"] == 9 and doc["joint_count"] == 37
    assert main(["stats", str(cli_dataset / "walk.bvh")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["frame_count"] == 3


def test_show_config_prints_defaults(capsys):
    assert main(["stats", "--show-config"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["rig"]["count"] == 12 and doc["augmentation"]["flip_probability"] == 0.5


def test_preview(cli_dataset, tmp_path):
    code = main(["preview", str(cli_dataset / "walk.bvh"), "--frame", "1", "--camera", "2",
                 "--out", str(tmp_path / "pv")])
    assert code == 0
    doc = json.loads((tmp_path / "pv.json").read_text())
    assert doc["camera_id"] == "cam02" and doc["frame_index"] == 1
    assert (tmp_path / "pv.png").stat().st_size > 0
    assert main(["preview", str(cli_dataset / "walk.bvh"), "--frame", "99", "--out", str(tmp_path / "x")]) == 2


def test_export_coco(cli_dataset, tmp_path):
    assert main(["export-coco", str(cli_dataset / "ds"), str(tmp_path / "c.json")]) == 0
    assert len(json.loads((tmp_path / "c.json").read_text())["annotations"]) == 9


def test_config_errors(tmp_path):
    (tmp_path / "bad.json").write_text(json.dumps({"rig": {"count": 0}}))
    with pytest.raises(ConfigError, match="rig/count"):
        load_config(tmp_path / "bad.json")
    (tmp_path / "extra.json").write_text(json.dumps({"colour": 1}))
    with pytest.raises(ConfigError):
        load_config(tmp_path / "extra.json")
    (tmp_path / "glob.json").write_text(json.dumps({"clips": ["missing/*.bvh"]}))
    with pytest.raises(ConfigError, match="matches no file"):
        load_config(tmp_path / "glob.json")
    assert main(["generate", "--config", str(tmp_path / "bad.json"), "--out", str(tmp_path / "o")]) == 2
    assert main(["generate", "--out", str(tmp_path / "o")]) == 2


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("SYNTHMOCAP_WORKERS", "3")
    assert load_config().workers == 3
    monkeypatch.setenv("SYNTHMOCAP_WORKERS", "many")
    with pytest.raises(ConfigError):
        load_config()


def test_malformed_clip_is_io_error(tmp_path):
    (tmp_path / "broken.bvh").write_text("HIERARCHY\nROOT Hips\n{\n")
    assert main(["generate", "--clips", str(tmp_path / "broken.bvh"), "--out", str(tmp_path / "o")]) == 3
