import numpy as np
import pytest

from ghtsparse import build_overcomplete_dct
from ghtsparse.synth import make_test_image


@pytest.fixture(scope="session")
def dct_64x100():
    return build_overcomplete_dct(8, 10)


@pytest.fixture(scope="session")
def city_image():
    """512x512 8-bit procedural test scene shared by the heavier tests."""
    return make_test_image(512, 512, seed=0)


@pytest.fixture(scope="session")
def camera_image():
    """Canonical 512x512 8-bit natural photograph."""
    data = pytest.importorskip("skimage.data")
    return data.camera().astype(float)
