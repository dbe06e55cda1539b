import numpy as np
import pytest

from mhvc.blockcodec import rate_point
from mhvc.flow import MotionSearchParams
from mhvc.scheduler import GopConfig
from mhvc.structures import get_structure
from mhvc.synthetic import moving_texture_clip


@pytest.fixture(scope="session")
def small_clip():
    """12 textured 32x32 frames under (1.0, 0.25) px/frame global motion."""
    return moving_texture_clip(32, 32, 12, dx=1.0, dy=0.25, seed=7)


@pytest.fixture(scope="session")
def medium_clip():
    return moving_texture_clip(64, 64, 12, dx=1.0, dy=0.5, seed=3)


def quick_config(tag="ls", lam=1626, **kw):
    """Small-search config for fast sequence tests."""
    kw.setdefault("search", MotionSearchParams(block_size=16, search_range=4))
    return GopConfig(structure=get_structure(tag), rate=rate_point(lam), **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
