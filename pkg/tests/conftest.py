import numpy as np
import pytest

from synthmocap.dataset import generate_dataset
from synthmocap.demo import load_sample, quadruped_rig, walk_clip


@pytest.fixture(scope="session")
def rig37():
    return quadruped_rig()


@pytest.fixture(scope="session")
def demo_clip():
    return load_sample("quadruped_walk.bvh")


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """4 frames x 12 cameras, un-augmented."""
    out = tmp_path_factory.mktemp("small") / "ds"
    manifest = generate_dataset([walk_clip(frames=4)], out, seed=7)
    return out, manifest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
