import numpy as np
import pytest

from chatedit.imaging import Image, Mask
from chatedit.sample_scenes import all_scenes, build_farm
from chatedit.vision import Scene, SceneObject


@pytest.fixture()
def farm():
    return build_farm()


@pytest.fixture(scope="session")
def demo_scenes():
    return all_scenes()


@pytest.fixture()
def tiny_scene():
    """A 4x4 two-object scene small enough to check by hand."""
    pixels = np.zeros((4, 4, 3), dtype=np.uint8)
    pixels[:, :, 0] = 40
    pixels[:, :, 1] = 80
    pixels[:, :, 2] = 120
    top = np.zeros((4, 4), dtype=bool)
    top[:2, :] = True
    bottom = ~top
    objects = (
        SceneObject("a_top", ("the top half", "top"), Mask(top, source_id="a_top")),
        SceneObject("b_bottom", ("the bottom half", "bottom"),
                    Mask(bottom, source_id="b_bottom")),
    )
    return Scene(image_id="tiny", image=Image(pixels), objects=objects)


def random_image(rng: np.random.Generator, height: int = 12, width: int = 10) -> Image:
    return Image(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def random_mask(rng: np.random.Generator, height: int = 12, width: int = 10) -> Mask:
    return Mask(rng.random((height, width)) < 0.5)
