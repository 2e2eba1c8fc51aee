"""Procedurally drawn demo scenes for tests, the CLI, and the web UI.

Three small annotated images: a farm with two cows, a beach, and a
room.  Everything is generated from fixed seeds so fixture bytes are
reproducible; ``write_demo_scenes`` materializes them in the on-disk
fixture layout.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .imaging import Image, Mask
from .vision import Scene, SceneObject, save_scene


def _canvas(height: int, width: int, color, seed: int) -> np.ndarray:
    """Flat color plus a little seeded noise so stats are not degenerate."""
    rng = np.random.default_rng(seed)
    base = np.tile(np.asarray(color, dtype=np.int16), (height, width, 1))
    noise = rng.integers(-8, 9, size=(height, width, 3), dtype=np.int16)
    return np.clip(base + noise, 0, 255).astype(np.uint8)


def _paint(pixels: np.ndarray, member: np.ndarray, color, seed: int) -> None:
    rng = np.random.default_rng(seed)
    noise = rng.integers(-8, 9, size=(int(member.sum()), 3), dtype=np.int16)
    pixels[member] = np.clip(
        np.asarray(color, dtype=np.int16) + noise, 0, 255
    ).astype(np.uint8)


def _rect(height: int, width: int, y0: int, y1: int, x0: int, x1: int) -> np.ndarray:
    member = np.zeros((height, width), dtype=bool)
    member[y0:y1, x0:x1] = True
    return member


def _disk(height: int, width: int, cy: int, cx: int, radius: int) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width]
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= radius ** 2


def build_farm() -> Scene:
    """Two cows on grass under a blue sky; no barn anywhere."""
    h, w = 192, 256
    pixels = _canvas(h, w, (96, 168, 82), seed=11)
    sky = _rect(h, w, 0, 64, 0, w)
    _paint(pixels, sky, (132, 180, 235), seed=12)
    cow_left = _rect(h, w, 100, 140, 30, 80)
    _paint(pixels, cow_left, (94, 62, 40), seed=13)
    cow_right = _rect(h, w, 90, 150, 140, 225)
    _paint(pixels, cow_right, (130, 92, 58), seed=14)

    objects = (
        SceneObject("cow_left", ("the left cow", "left cow", "smaller cow",
                                 "the small cow"),
                    Mask(cow_left, source_id="cow_left")),
        SceneObject("cow_right", ("the right cow", "right cow", "bigger cow",
                                  "the bigger cow"),
                    Mask(cow_right, source_id="cow_right")),
        SceneObject("cows", ("cows", "the cows", "both cows"),
                    Mask(cow_left | cow_right, source_id="cows")),
        SceneObject("sky", ("sky", "the sky", "blue sky"),
                    Mask(sky, source_id="sky")),
    )
    return Scene(image_id="farm", image=Image(pixels), objects=objects)


def build_beach() -> Scene:
    h, w = 192, 256
    pixels = _canvas(h, w, (225, 203, 146), seed=21)
    sea = _rect(h, w, 70, 130, 0, w)
    _paint(pixels, sea, (52, 118, 190), seed=22)
    sun = _disk(h, w, 32, 208, 22)
    _paint(pixels, sun, (250, 216, 80), seed=23)
    boat = _rect(h, w, 88, 112, 60, 120)
    _paint(pixels, boat, (170, 60, 48), seed=24)

    objects = (
        SceneObject("boat", ("the boat", "boat", "small boat",
                             "the red boat"),
                    Mask(boat, source_id="boat")),
        SceneObject("sea", ("the sea", "sea", "the ocean", "water"),
                    Mask(sea & ~boat, source_id="sea")),
        SceneObject("sun", ("the sun", "sun"),
                    Mask(sun, source_id="sun")),
        SceneObject("sand", ("the sand", "sand", "the beach"),
                    Mask(_rect(h, w, 130, h, 0, w), source_id="sand")),
    )
    return Scene(image_id="beach", image=Image(pixels), objects=objects)


def build_room() -> Scene:
    h, w = 192, 256
    pixels = _canvas(h, w, (214, 205, 188), seed=31)
    rug = _rect(h, w, 120, 180, 40, 216)
    _paint(pixels, rug, (150, 48, 60), seed=32)
    table = _rect(h, w, 70, 120, 60, 150)
    _paint(pixels, table, (122, 86, 50), seed=33)
    lamp = _disk(h, w, 40, 200, 18)
    _paint(pixels, lamp, (240, 222, 120), seed=34)
    cat = _disk(h, w, 140, 190, 16)
    _paint(pixels, cat, (110, 110, 116), seed=35)

    objects = (
        SceneObject("cat", ("the cat", "cat", "the gray cat"),
                    Mask(cat, source_id="cat")),
        SceneObject("lamp", ("the lamp", "lamp", "the light"),
                    Mask(lamp, source_id="lamp")),
        SceneObject("rug", ("the rug", "rug", "the carpet"),
                    Mask(rug & ~cat, source_id="rug")),
        SceneObject("table", ("the table", "table", "the wooden table"),
                    Mask(table, source_id="table")),
    )
    return Scene(image_id="room", image=Image(pixels), objects=objects)


def all_scenes() -> list[Scene]:
    return [build_farm(), build_beach(), build_room()]


def write_demo_scenes(root) -> list[Path]:
    """Write every demo scene under ``root`` in the fixture layout."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    return [save_scene(scene, root / scene.image_id)
            for scene in all_scenes()]
