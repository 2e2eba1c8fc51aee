"""Synthetic imperative edit-request generator.

Produces single-sentence requests that carry an action, an attribute, a
referring phrase and a value, together with their gold BIO labels.  The
grammar is deliberately constructed inside the reference tagger's
coverage, so tagging a generated sentence reproduces its gold labels
exactly; that closure is what the NLU evaluation leans on.

Templates (the {refer} slot is filled from scene phrases):

    T1  {action} the {attribute} of {refer} by {value}
    T2  {action} {attribute} of {refer} by {value}
    T3  please {action} the {attribute} of {refer} by {value}
    T4  {action} the {attribute} of {refer} by {value} .
    T5  {action} {refer} by setting the {attribute} to {value}

T5 exercises the determiner-fallback route, so its refer phrase is made
to start with a determiner; it always renders the value with an explicit
sign and a neutral action.
"""

from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Iterable, Sequence

from .nlu import (
    ACTION_WORDS,
    DETERMINERS,
    REFER_STOP_WORDS,
    _INT_RE,
    _is_punct,
)
from .ontology import ATTRIBUTE_NAMES
from .vision import Scene

NEGATIVE_RENDER_ACTIONS = ("decrease", "lower", "reduce")
POSITIVE_RENDER_ACTIONS = ("increase", "raise", "boost")
NEUTRAL_RENDER_ACTIONS = ("change", "adjust", "modify", "set")

#: (words with {slot} placeholders, True when the template needs a
#: determiner-initial refer phrase)
TEMPLATES: tuple[tuple[tuple[str, ...], bool], ...] = (
    (("{action}", "the", "{attribute}", "of", "{refer}", "by", "{value}"), False),
    (("{action}", "{attribute}", "of", "{refer}", "by", "{value}"), False),
    (("please", "{action}", "the", "{attribute}", "of", "{refer}", "by", "{value}"), False),
    (("{action}", "the", "{attribute}", "of", "{refer}", "by", "{value}", "."), False),
    (("{action}", "{refer}", "by", "setting", "the", "{attribute}", "to", "{value}"), True),
)


class EmptySceneError(ValueError):
    """Scene offers no phrase usable by the generation grammar."""


def _phrase_in_grammar(phrase: str) -> bool:
    """Phrases whose tokens would collide with other spans are rejected."""
    words = phrase.lower().split()
    if not words:
        return False
    for w in words:
        if _INT_RE.fullmatch(w) or _is_punct(w):
            return False
        if w in ATTRIBUTE_NAMES or w in ACTION_WORDS or w in REFER_STOP_WORDS:
            return False
    return True


def eligible_phrases(scene: Scene) -> list[str]:
    phrases = []
    for obj in scene.objects:
        for phrase in obj.phrases:
            if _phrase_in_grammar(phrase):
                phrases.append(phrase.lower())
    return phrases


def generate_illc_ier(seed: int, scene: Scene) -> tuple[str, list[str]]:
    """One seeded request sentence with its gold label sequence.

    Samples a template, an attribute, a nonzero value in [-100, 100] and a
    scene phrase; renders the value per the action's sign convention.
    Deterministic for a given (seed, scene).
    """
    pool = eligible_phrases(scene)
    if not pool:
        raise EmptySceneError(f"scene {scene.image_id!r} has no usable phrases")
    rng = random.Random(seed)

    words_template, needs_determiner = TEMPLATES[rng.randrange(len(TEMPLATES))]
    attribute = rng.choice(ATTRIBUTE_NAMES)
    value = rng.choice([v for v in range(-100, 101) if v != 0])
    phrase = rng.choice(pool)
    if needs_determiner and phrase.split()[0] not in DETERMINERS:
        phrase = "the " + phrase

    if needs_determiner:
        action = rng.choice(NEUTRAL_RENDER_ACTIONS)
        value_text = f"{value:+d}"
    elif value < 0 and rng.random() < 0.5:
        action = rng.choice(NEGATIVE_RENDER_ACTIONS)
        value_text = str(-value)
    elif value < 0:
        action = rng.choice(NEUTRAL_RENDER_ACTIONS)
        value_text = str(value)
    else:
        action = rng.choice(POSITIVE_RENDER_ACTIONS + NEUTRAL_RENDER_ACTIONS)
        value_text = str(value)

    words: list[str] = []
    labels: list[str] = []
    for part in words_template:
        if part == "{action}":
            words.append(action)
            labels.append("B-ACTION")
        elif part == "{attribute}":
            words.append(attribute)
            labels.append("B-ATTRIBUTE")
        elif part == "{value}":
            words.append(value_text)
            labels.append("B-VALUE")
        elif part == "{refer}":
            for i, w in enumerate(phrase.split()):
                words.append(w)
                labels.append("B-REFER" if i == 0 else "I-REFER")
        else:
            words.append(part)
            labels.append("O")
    return " ".join(words), labels


def generate_corpus(n: int, seed: int,
                    scenes: Sequence[Scene]) -> list[dict]:
    """``n`` generated records, cycling through the scenes.

    Record shape matches the corpus file format: text, tokens, labels.
    """
    if not scenes:
        raise EmptySceneError("no scenes supplied")
    rng = random.Random(seed)
    records = []
    for i in range(n):
        scene = scenes[i % len(scenes)]
        sentence, labels = generate_illc_ier(rng.randrange(2**32), scene)
        records.append(
            {"text": sentence, "tokens": sentence.split(), "labels": labels}
        )
    return records


def write_corpus(records: Iterable[dict], path) -> None:
    """JSON-lines, one record per request."""
    path = Path(path)
    with path.open("w") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def read_corpus(path) -> list[dict]:
    records = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
