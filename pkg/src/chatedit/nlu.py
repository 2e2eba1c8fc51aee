"""Turns a raw utterance into a slot frame.

The pipeline: whole-utterance yes/no intent matching first; otherwise
tokenize, BIO-tag spans for ACTION / REFER / ATTRIBUTE / VALUE, then
collect the first span of each category into a TurnFrame.  The reference
tagger is a deterministic rule cascade; anything statistical can be
plugged in behind the same ``Tagger`` callable signature (tokens in, one
label per token out).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .ontology import (
    ATTRIBUTE_NAMES,
    Attribute,
    EditValue,
    OutOfRangeError,
    Refer,
    make_edit_value,
    parse_attribute,
)

#: Imperative verbs recognized as the edit ACTION.
ACTION_WORDS: tuple[str, ...] = (
    "increase", "decrease", "raise", "lower", "reduce", "boost",
    "change", "set", "adjust", "modify", "make", "turn",
)

#: Actions that flip the sign of the value ("decrease X by 10" == -10).
NEGATIVE_ACTIONS = frozenset({"decrease", "lower", "reduce"})

AFFIRM_WORDS = frozenset({"yes", "y", "yeah", "yep", "correct", "sure"})
DENY_WORDS = frozenset({"no", "n", "nope", "wrong", "incorrect"})

#: Prepositions that introduce the referring expression after an attribute.
REFER_PREPOSITIONS = frozenset({"of", "on", "in", "for"})

#: Determiners that may open a referring noun phrase.
DETERMINERS = frozenset({"the", "a", "an", "this", "that", "my"})

#: Function words that never join a refer span.
REFER_STOP_WORDS = frozenset({"by", "to", "please"})

_PUNCT_CHARS = ".,!?"

CATEGORIES: tuple[str, ...] = ("ACTION", "ATTRIBUTE", "REFER", "VALUE")

BIO_LABELS: tuple[str, ...] = ("O",) + tuple(
    f"{prefix}-{cat}" for cat in CATEGORIES for prefix in ("B", "I")
)

_INT_RE = re.compile(r"[+-]?\d+")
_CHUNK_RE = re.compile(r"\S+")


class NotAnIntegerError(ValueError):
    """Value token is numeric-looking but not a plain signed integer."""


class Intent(enum.Enum):
    AFFIRM = "affirm"
    DENY = "deny"
    NONE = "none"


@dataclass(frozen=True)
class Token:
    """A lowercased token with character offsets into the utterance."""

    text: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValueError(f"token span [{self.start}, {self.end}) is empty")


#: A tagger maps tokens to one BIO label per token.
Tagger = Callable[[Sequence[Token]], list[str]]


@dataclass(frozen=True)
class TurnFrame:
    """Per-utterance NLU output.

    Either a pure yes/no intent, or any subset of the slot values.  When
    the value token failed normalization, ``value`` stays empty and
    ``value_error`` records why ("out_of_range" or "not_integer") so the
    policy can re-request with the range suggestion.
    """

    refer: Optional[Refer] = None
    attribute: Optional[Attribute] = None
    value: Optional[EditValue] = None
    action_negative: bool = False
    intent: Intent = Intent.NONE
    value_error: Optional[str] = None

    def __post_init__(self) -> None:
        if self.intent is not Intent.NONE:
            if (self.refer is not None or self.attribute is not None
                    or self.value is not None or self.value_error is not None):
                raise ValueError("an intent frame carries no slot values")


def tokenize(text: str) -> list[Token]:
    """Lowercase and split on whitespace; terminal ``. , ! ?`` become
    their own tokens.  A sign glued to digits stays with the number, so
    "-10" is a single token.  Deterministic; empty input gives []."""
    lowered = text.lower()
    tokens: list[Token] = []
    for match in _CHUNK_RE.finditer(lowered):
        chunk = match.group(0)
        start = match.start()
        tail: list[Token] = []
        while len(chunk) > 1 and chunk[-1] in _PUNCT_CHARS:
            split_at = start + len(chunk) - 1
            tail.append(Token(chunk[-1], split_at, split_at + 1))
            chunk = chunk[:-1]
        tokens.append(Token(chunk, start, start + len(chunk)))
        tokens.extend(reversed(tail))
    return tokens


def _is_punct(text: str) -> bool:
    return all(ch in _PUNCT_CHARS for ch in text)


def _refer_span(tokens: Sequence[Token], claimed: list[Optional[str]]) -> list[int]:
    """Locate the refer span; returns token indices (possibly empty).

    Primary route: the run of free tokens right after the first
    of/on/in/for that follows the attribute.  Fallback: the run starting
    at a determiner after the action (from the start when there is no
    action), provided the run holds more than bare determiners.  Function
    words by/to/please and punctuation never join a span.
    """

    def free(i: int) -> bool:
        t = tokens[i].text
        return claimed[i] is None and t not in REFER_STOP_WORDS and not _is_punct(t)

    def run_from(start: int) -> list[int]:
        span = []
        for i in range(start, len(tokens)):
            if not free(i):
                break
            span.append(i)
        return span

    attr_indices = [i for i, c in enumerate(claimed) if c == "ATTRIBUTE"]
    if attr_indices:
        for j in range(attr_indices[0] + 1, len(tokens)):
            if claimed[j] is None and tokens[j].text in REFER_PREPOSITIONS:
                span = run_from(j + 1)
                if span:
                    return span
                break

    action_indices = [i for i, c in enumerate(claimed) if c == "ACTION"]
    scan_start = action_indices[0] + 1 if action_indices else 0
    i = scan_start
    while i < len(tokens):
        if claimed[i] is None and tokens[i].text in DETERMINERS:
            span = run_from(i)
            if any(tokens[j].text not in DETERMINERS for j in span):
                return span
            i = span[-1] + 1 if span else i + 1
        i += 1
    return []


def tag(tokens: Sequence[Token]) -> list[str]:
    """Reference rule tagger.

    In order: every optional-sign integer token is a VALUE; every exact
    attribute name is an ATTRIBUTE; the first token from the action
    lexicon is the ACTION; the refer span is found per ``_refer_span``.
    Utterances outside the grammar come back all-O.
    """
    n = len(tokens)
    claimed: list[Optional[str]] = [None] * n
    for i, tok in enumerate(tokens):
        if _INT_RE.fullmatch(tok.text):
            claimed[i] = "VALUE"
    for i, tok in enumerate(tokens):
        if claimed[i] is None and tok.text in ATTRIBUTE_NAMES:
            claimed[i] = "ATTRIBUTE"
    for i, tok in enumerate(tokens):
        if claimed[i] is None and tok.text in ACTION_WORDS:
            claimed[i] = "ACTION"
            break

    labels = ["O"] * n
    for i, category in enumerate(claimed):
        if category is not None:
            labels[i] = f"B-{category}"
    refer = _refer_span(tokens, claimed)
    for pos, i in enumerate(refer):
        labels[i] = "B-REFER" if pos == 0 else "I-REFER"
    return labels


def is_valid_bio(labels: Sequence[str]) -> bool:
    """True when no I- label follows O or a different category."""
    previous = "O"
    for label in labels:
        if label not in BIO_LABELS:
            return False
        if label.startswith("I-") and previous[2:] != label[2:]:
            return False
        previous = label
    return True


def normalize_value(value_token: str, action_negative: bool) -> EditValue:
    """Parse the integer and apply the action sign.

    A negative action forces magnitude -|v| (never a double negative),
    matching the equivalence of "decrease X by 10" and "change X by -10".
    Raises NotAnIntegerError for fractional tokens and OutOfRangeError
    beyond +/-100.
    """
    token = value_token.strip()
    if not _INT_RE.fullmatch(token):
        raise NotAnIntegerError(f"{value_token!r} is not a signed integer")
    v = int(token)
    magnitude = -abs(v) if action_negative else v
    return make_edit_value(magnitude)


def match_intent(text: str) -> Intent:
    """Whole-utterance yes/no matching, case-insensitive and trimmed.

    Trailing punctuation is ignored so "Yes!" still affirms.
    """
    word = text.strip().lower().rstrip(_PUNCT_CHARS).strip()
    if word in AFFIRM_WORDS:
        return Intent.AFFIRM
    if word in DENY_WORDS:
        return Intent.DENY
    return Intent.NONE


def _first_spans(labels: Sequence[str]) -> dict[str, tuple[int, int]]:
    """First (start, end) token span per category, in utterance order."""
    spans: dict[str, tuple[int, int]] = {}
    i = 0
    while i < len(labels):
        label = labels[i]
        if label.startswith("B-"):
            category = label[2:]
            j = i + 1
            while j < len(labels) and labels[j] == f"I-{category}":
                j += 1
            spans.setdefault(category, (i, j))
            i = j
        else:
            i += 1
    return spans


def extract_frame(text: str, tagger: Optional[Tagger] = None) -> TurnFrame:
    """Extract a TurnFrame from an utterance.  Total: never raises.

    Yes/no intents short-circuit to an intent-only frame.  Otherwise the
    tagger runs and the first span of each category is kept.
    """
    intent = match_intent(text)
    if intent is not Intent.NONE:
        return TurnFrame(intent=intent)

    tokens = tokenize(text)
    if not tokens:
        return TurnFrame()
    labels = (tagger or tag)(tokens)
    spans = _first_spans(labels)

    refer = None
    if "REFER" in spans:
        start, end = spans["REFER"]
        refer = Refer(" ".join(t.text for t in tokens[start:end]))

    attribute = None
    if "ATTRIBUTE" in spans:
        attribute = parse_attribute(tokens[spans["ATTRIBUTE"][0]].text)

    action_negative = False
    if "ACTION" in spans:
        action_negative = tokens[spans["ACTION"][0]].text in NEGATIVE_ACTIONS

    value = None
    value_error = None
    if "VALUE" in spans:
        try:
            value = normalize_value(tokens[spans["VALUE"][0]].text, action_negative)
        except OutOfRangeError:
            value_error = "out_of_range"
        except NotAnIntegerError:
            value_error = "not_integer"

    return TurnFrame(
        refer=refer,
        attribute=attribute,
        value=value,
        action_negative=action_negative,
        value_error=value_error,
    )
