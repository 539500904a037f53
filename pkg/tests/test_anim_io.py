import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthmocap.anim_io import (AnimationClip, BVHError, ClipFormatError, clip_stats, parse_bvh,
                                read_clip, write_bvh, write_clip)
from synthmocap.demo import sample_bvh_paths, walk_clip
from synthmocap.skeleton import Joint, Skeleton

MINIMAL = """HIERARCHY
ROOT root
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT child
  {
    OFFSET 0 1 0
    CHANNELS 3 Zrot Xrot Yrot
    End Site
    {
      OFFSET 0 0.5 0
    }
  }
}
MOTION
Frames: 1
Frame Time: 0.033333
0 0 0 0 0 0 0 0 0
"""


def test_minimal_parse():
    clip = parse_bvh(MINIMAL)
    sk = clip.skeleton
    assert sk.names == ["root", "child", "child_end"]
    assert sk.parents == [None, 0, 1]
    assert sk.joints[1].channels == ("Zrot", "Xrot", "Yrot")
    assert sk.joints[2].channels == ()
    assert sk.joints[2].rest_offset == (0.0, 0.5, 0.0)
    assert clip.frame_count == 1
    assert np.all(clip.frames == 0)
    assert clip.frame_time == 0.033333


def test_short_motion_line_cites_line():
    bad = MINIMAL.replace("0 0 0 0 0 0 0 0 0", "0 0 0 0 0 0 0 0")
    with pytest.raises(BVHError) as err:
        parse_bvh(bad)
    assert err.value.line == 19
    assert "8 values" in str(err.value)


@pytest.mark.parametrize("mutate, fragment", [
    (lambda s: s.replace("HIERARCHY", "HIERARCH"), "HIERARCHY"),
    (lambda s: s.replace("MOTION", "MOTON"), "MOTION"),
    (lambda s: s.replace("Frames: 1", "Frames: 2"), "Frames: 2"),
    (lambda s: s.replace("0 0 0 0 0 0 0 0 0", "0 0 0 0 x 0 0 0 0"), "expected a number"),
    (lambda s: s.replace("Frame Time: 0.033333", "Frame Time: 0"), "positive"),
    (lambda s: s.replace("CHANNELS 3 Zrot", "CHANNELS 3 Qrot"), "unknown channel"),
    (lambda s: s.rstrip("\n").rsplit("\n", 1)[0], "0 motion lines"),
])
def test_malformed_inputs(mutate, fragment):
    with pytest.raises(BVHError) as err:
        parse_bvh(mutate(MINIMAL))
    assert fragment in str(err.value)
    assert err.value.line is not None


def test_whitespace_is_permissive():
    squashed = MINIMAL.replace("\n  ", "\n\t \t").replace("OFFSET 0 1 0", "OFFSET\t0   1\t0")
    assert parse_bvh(squashed).skeleton.names == ["root", "child", "child_end"]


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=400))
def test_parser_totality_bytes(data):
    try:
        parse_bvh(data)
    except BVHError:
        pass


@settings(max_examples=300, deadline=None)
@given(st.data())
def test_parser_totality_token_soup(data):
    vocab = ["HIERARCHY", "ROOT", "JOINT", "End", "Site", "{", "}", "OFFSET", "CHANNELS", "3", "6",
             "Xrotation", "Zpos", "MOTION", "Frames:", "Frame", "Time:", "1", "0", "-2.5", "nan",
             "1e400", "\n", "a"]
    tokens = data.draw(st.lists(st.sampled_from(vocab), max_size=80))
    prefix = data.draw(st.sampled_from(["", MINIMAL[:120], MINIMAL[:300]]))
    try:
        parse_bvh(prefix + " ".join(tokens))
    except BVHError:
        pass


@settings(max_examples=100, deadline=None)
@given(st.integers(0, len(MINIMAL) - 1), st.characters())
def test_parser_totality_single_edits(pos, ch):
    try:
        parse_bvh(MINIMAL[:pos] + ch + MINIMAL[pos + 1:])
    except BVHError:
        pass


def test_clip_roundtrip_bit_exact(rng):
    clip = walk_clip(frames=100)
    noisy = AnimationClip(clip.skeleton, 1 / 30, clip.frames + rng.normal(0, 1e-3, clip.frames.shape))
    buf = io.StringIO()
    write_clip(noisy, buf)
    back = read_clip(io.StringIO(buf.getvalue()))
    assert back.skeleton == noisy.skeleton
    assert back.frame_time == noisy.frame_time
    assert back.frame_count == 100
    assert np.array_equal(back.frames, noisy.frames)


def test_clip_rejects_empty_frames():
    sk = Skeleton((Joint("r", None, (0, 0, 0), ("Xrot",)),))
    with pytest.raises(ValueError):
        AnimationClip(sk, 0.1, np.zeros((0, 1)))


def test_read_clip_version_mismatch(tmp_path):
    p = tmp_path / "c.json"
    write_clip(walk_clip(frames=2), p)
    p.write_text(p.read_text().replace('"format_version": 1', '"format_version": 99'))
    with pytest.raises(ClipFormatError):
        read_clip(p)
    p.write_text("{not json")
    with pytest.raises(ClipFormatError):
        read_clip(p)


@pytest.mark.parametrize("path", sample_bvh_paths(), ids=lambda p: p.name)
def test_bundled_bvh_roundtrip_fk(path):
    clip = parse_bvh(path.read_text())
    buf = io.StringIO()
    write_clip(clip, buf)
    back = read_clip(io.StringIO(buf.getvalue()))
    assert np.abs(back.world_positions() - clip.world_positions()).max() <= 1e-12


def test_write_bvh_roundtrip():
    clip = walk_clip(frames=10)
    buf = io.StringIO()
    write_bvh(clip, buf)
    back = parse_bvh(buf.getvalue())
    assert back.skeleton == clip.skeleton
    assert np.array_equal(back.frames, clip.frames)


def test_clip_stats():
    sk = Skeleton((Joint("r", None, (0, 0, 0), ("Xpos", "Ypos", "Zpos")),))
    stats = clip_stats(AnimationClip(sk, 1 / 24, np.zeros((240, 3))))
    assert stats.duration == pytest.approx(10.0, abs=1e-12)
    assert stats.root_bbox_min == stats.root_bbox_max
    assert clip_stats(walk_clip(frames=3)).joint_count == 37
