"""Referring-expression grounding against annotated scene fixtures.

A scene is an image plus objects, each carrying one or more referring
phrases and a pixel mask.  ``resolve`` scores every object by lexical
Jaccard overlap with the user's phrase and returns the single best mask,
or nothing when the best score falls below the detection threshold.  The
interface (refer in, one mask with a confidence out) is the seam where a
learned grounding model could be dropped in.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .imaging import Image, Mask
from .ontology import Refer

#: Minimum score for a detection; below it the resolver reports no match.
DEFAULT_THRESHOLD = 0.2

STOP_WORDS = frozenset(
    {"the", "a", "an", "of", "in", "on", "at", "to", "that", "this", "it"}
)

_WORD_RE = re.compile(r"[a-z0-9']+")


class SceneError(Exception):
    """Base for scene-fixture problems; carries the offending object id."""

    def __init__(self, message: str, object_id: Optional[str] = None) -> None:
        self.object_id = object_id
        super().__init__(message)


class MissingFileError(SceneError):
    pass


class DimensionMismatchError(SceneError):
    pass


class EmptyMaskError(SceneError):
    pass


class SceneFormatError(SceneError):
    pass


@dataclass(frozen=True)
class SceneObject:
    """An annotated object: referring phrases plus its pixel mask."""

    object_id: str
    phrases: tuple[str, ...]
    mask: Mask

    def __post_init__(self) -> None:
        if not self.object_id:
            raise SceneFormatError("object id must be non-empty")
        phrases = tuple(p.strip() for p in self.phrases)
        if not phrases or any(not p for p in phrases):
            raise SceneFormatError(
                f"object {self.object_id!r} needs at least one non-empty phrase",
                self.object_id,
            )
        object.__setattr__(self, "phrases", phrases)
        if self.mask.member_count == 0:
            raise EmptyMaskError(
                f"object {self.object_id!r} has an all-zero mask", self.object_id
            )


@dataclass(frozen=True)
class Scene:
    """An image with its annotated objects. Immutable after construction."""

    image_id: str
    image: Image
    objects: tuple[SceneObject, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "objects", tuple(self.objects))
        seen: set[str] = set()
        for obj in self.objects:
            if obj.object_id in seen:
                raise SceneFormatError(
                    f"duplicate object id {obj.object_id!r}", obj.object_id
                )
            seen.add(obj.object_id)
            if (obj.mask.height, obj.mask.width) != (self.height, self.width):
                raise DimensionMismatchError(
                    f"mask of object {obj.object_id!r} is "
                    f"{obj.mask.width}x{obj.mask.height}, "
                    f"image is {self.width}x{self.height}",
                    obj.object_id,
                )

    @property
    def width(self) -> int:
        return self.image.width

    @property
    def height(self) -> int:
        return self.image.height


def _token_set(text: str) -> frozenset[str]:
    return frozenset(_WORD_RE.findall(text.lower())) - STOP_WORDS


def score(refer: Refer, obj: SceneObject) -> float:
    """Best Jaccard overlap between the refer and any phrase of ``obj``.

    Token sets are lowercased and stop-word filtered; two empty sets score
    zero, so contentless refers never match anything.
    """
    refer_tokens = _token_set(refer.text)
    best = 0.0
    for phrase in obj.phrases:
        phrase_tokens = _token_set(phrase)
        union = refer_tokens | phrase_tokens
        if not union:
            continue
        jaccard = len(refer_tokens & phrase_tokens) / len(union)
        best = max(best, jaccard)
    return best


def resolve(refer: Refer, scene: Scene,
            threshold: float = DEFAULT_THRESHOLD) -> Optional[Mask]:
    """Return the highest-scoring object's mask, or None below threshold.

    Deterministic: ties break toward the lowest object id.  The returned
    mask carries the score as its confidence and the chosen object id as
    its source.
    """
    best_score = -1.0
    best_obj: Optional[SceneObject] = None
    for obj in sorted(scene.objects, key=lambda o: o.object_id):
        s = score(refer, obj)
        if s > best_score:
            best_score = s
            best_obj = obj
    if best_obj is None or best_score < threshold:
        return None
    return Mask(best_obj.mask.membership, confidence=best_score,
                source_id=best_obj.object_id)


def load_scene(path) -> Scene:
    """Load one scene fixture directory.

    Expected layout: ``scene.json`` with ``{"image": ..., "objects":
    [{"id": ..., "phrases": [...], "mask": ...}, ...]}`` next to an 8-bit
    RGB PNG image and 8-bit grayscale PNG masks (nonzero = member).
    """
    root = Path(path)
    manifest_path = root / "scene.json"
    if not manifest_path.is_file():
        raise MissingFileError(f"no scene.json in {root}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"{manifest_path}: {exc}") from exc

    image_name = manifest.get("image")
    if not isinstance(image_name, str):
        raise SceneFormatError(f"{manifest_path}: missing 'image' entry")
    image_path = root / image_name
    if not image_path.is_file():
        raise MissingFileError(f"image file {image_path} not found")
    image = Image.open(image_path)

    entries = manifest.get("objects")
    if not isinstance(entries, list):
        raise SceneFormatError(f"{manifest_path}: missing 'objects' list")

    objects = []
    for entry in entries:
        object_id = entry.get("id")
        if not isinstance(object_id, str) or not object_id:
            raise SceneFormatError(f"{manifest_path}: object without an id")
        mask_name = entry.get("mask")
        if not isinstance(mask_name, str):
            raise SceneFormatError(
                f"object {object_id!r} has no mask entry", object_id
            )
        mask_path = root / mask_name
        if not mask_path.is_file():
            raise MissingFileError(
                f"mask file {mask_path} for object {object_id!r} not found",
                object_id,
            )
        phrases = entry.get("phrases") or []
        objects.append(
            SceneObject(
                object_id=object_id,
                phrases=tuple(str(p) for p in phrases),
                mask=Mask.open(mask_path, source_id=object_id),
            )
        )
    return Scene(image_id=root.name, image=image, objects=tuple(objects))


def save_scene(scene: Scene, path) -> Path:
    """Write a scene to a fixture directory in the ``load_scene`` layout."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    scene.image.save(root / "image.png")
    entries = []
    for obj in scene.objects:
        mask_name = f"{obj.object_id}_mask.png"
        obj.mask.save(root / mask_name)
        entries.append(
            {"id": obj.object_id, "phrases": list(obj.phrases), "mask": mask_name}
        )
    manifest = {"image": "image.png", "objects": entries}
    (root / "scene.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return root


class SceneStore:
    """Read-only collection of scene fixtures, keyed by directory name."""

    def __init__(self, scenes: dict[str, Scene]) -> None:
        self._scenes = dict(scenes)

    @classmethod
    def load(cls, root) -> "SceneStore":
        root = Path(root)
        if not root.is_dir():
            raise MissingFileError(f"fixture directory {root} not found")
        scenes = {}
        for child in sorted(root.iterdir()):
            if child.is_dir() and (child / "scene.json").is_file():
                scenes[child.name] = load_scene(child)
        return cls(scenes)

    def image_ids(self) -> list[str]:
        return sorted(self._scenes)

    def get(self, image_id: str) -> Optional[Scene]:
        return self._scenes.get(image_id)

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._scenes

    def __len__(self) -> int:
        return len(self._scenes)
