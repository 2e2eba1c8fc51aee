"""Dialogue-driven image editing.

Type an edit request, confirm the detected region, watch the image
change.  The package splits into slot extraction (`nlu`), state
tracking (`tracker`), the turn policy (`manager`), a phrase-matching
region resolver over annotated scenes (`vision`), masked pixel
transforms (`imaging`), and log-based evaluation (`metrics`), with an
HTTP session API (`service`) and a CLI on top.
"""

from .imaging import Image, Mask, adjust, render_overlay
from .manager import Session, SystemTurn, TemplateSet, next_act, run_script
from .metrics import span_f1, turn_stats, vision_accuracy
from .nlu import extract_frame, tag, tokenize
from .ontology import (
    Attribute,
    DialogueAct,
    DialogueState,
    EditValue,
    Refer,
)
from .vision import Scene, SceneObject, SceneStore, load_scene, resolve

__version__ = "0.1.0"

__all__ = [
    "Attribute",
    "DialogueAct",
    "DialogueState",
    "EditValue",
    "Image",
    "Mask",
    "Refer",
    "Scene",
    "SceneObject",
    "SceneStore",
    "Session",
    "SystemTurn",
    "TemplateSet",
    "adjust",
    "extract_frame",
    "load_scene",
    "next_act",
    "render_overlay",
    "resolve",
    "run_script",
    "span_f1",
    "tag",
    "tokenize",
    "turn_stats",
    "vision_accuracy",
    "__version__",
]
