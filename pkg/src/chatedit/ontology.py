"""Core domain types shared by every component: slots, dialogue acts, state.

The edit operation takes three arguments: a pixel mask (resolved from a
referring expression), an attribute, and a signed magnitude.  The dialogue
state tracks those slots plus the act counters used for evaluation.  All
types here are immutable values; invariants are enforced at construction,
so any reachable state is a valid one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .imaging import Mask


class Attribute(enum.Enum):
    """The five adjustable image properties. Closed set."""

    BRIGHTNESS = "brightness"
    CONTRAST = "contrast"
    HUE = "hue"
    SATURATION = "saturation"
    LIGHTNESS = "lightness"

    def __str__(self) -> str:
        return self.value


#: Canonical lowercase spellings; the wire/file format everywhere.
ATTRIBUTE_NAMES: tuple[str, ...] = tuple(a.value for a in Attribute)

VALUE_MIN = -100
VALUE_MAX = 100


class OutOfRangeError(ValueError):
    """Requested magnitude falls outside [-100, 100]."""

    def __init__(self, magnitude: int) -> None:
        self.magnitude = magnitude
        super().__init__(
            f"edit value {magnitude} outside [{VALUE_MIN}, {VALUE_MAX}]"
        )


def parse_attribute(word: str) -> Optional[Attribute]:
    """Exact, case-insensitive match against the five attribute names.

    Anything else returns None; absence is a value, not an error.
    """
    try:
        return Attribute(word.strip().lower())
    except ValueError:
        return None


@dataclass(frozen=True)
class EditValue:
    """Signed, unit-free adjustment magnitude in [-100, 100]."""

    magnitude: int

    def __post_init__(self) -> None:
        if not isinstance(self.magnitude, int) or isinstance(self.magnitude, bool):
            raise TypeError(f"magnitude must be an int, got {self.magnitude!r}")
        if not VALUE_MIN <= self.magnitude <= VALUE_MAX:
            raise OutOfRangeError(self.magnitude)


def make_edit_value(n: int) -> EditValue:
    """Construct an EditValue; raises OutOfRangeError when |n| > 100."""
    return EditValue(n)


@dataclass(frozen=True)
class Refer:
    """A referring expression as typed by the user. Non-empty after trimming."""

    text: str

    def __post_init__(self) -> None:
        trimmed = self.text.strip()
        if not trimmed:
            raise ValueError("referring expression must be non-empty")
        object.__setattr__(self, "text", trimmed)

    def same_as(self, other: "Refer") -> bool:
        """Case-folded string equality; the tracker's notion of 'same refer'."""
        return self.text.casefold() == other.text.casefold()


class ActKind(enum.Enum):
    REQUEST = "request"
    CONFIRM = "confirm"
    QUERY = "query"
    EXECUTE = "execute"


#: Slot names a Request/Confirm act may carry.
SLOT_NAMES: tuple[str, ...] = ("refer", "mask", "attribute", "value")


@dataclass(frozen=True)
class DialogueAct:
    """A system decision: Request(slot), Confirm(slot), Query, or Execute."""

    kind: ActKind
    slot: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind in (ActKind.REQUEST, ActKind.CONFIRM):
            if self.slot not in SLOT_NAMES:
                raise ValueError(
                    f"{self.kind.value} act needs a slot from {SLOT_NAMES}, got {self.slot!r}"
                )
        elif self.slot is not None:
            raise ValueError(f"{self.kind.value} act carries no slot")

    @classmethod
    def request(cls, slot: str) -> "DialogueAct":
        return cls(ActKind.REQUEST, slot)

    @classmethod
    def confirm(cls, slot: str) -> "DialogueAct":
        return cls(ActKind.CONFIRM, slot)

    @classmethod
    def query(cls) -> "DialogueAct":
        return cls(ActKind.QUERY)

    @classmethod
    def execute(cls) -> "DialogueAct":
        return cls(ActKind.EXECUTE)


@dataclass(frozen=True)
class DialogueState:
    """The tracked slot frame plus lifecycle counters.

    Structural invariants, checked on every construction (and therefore on
    every transition, since transitions build new states):

      * a confirmed mask implies a mask is present;
      * a mask implies a refer (the mask slot depends on the refer slot);
      * execute_count never exceeds query_count.
    """

    refer: Optional[Refer] = None
    mask: Optional["Mask"] = None
    mask_confirmed: bool = False
    attribute: Optional[Attribute] = None
    value: Optional[EditValue] = None
    query_count: int = 0
    execute_count: int = 0
    turn_index: int = 0

    def __post_init__(self) -> None:
        if self.mask_confirmed and self.mask is None:
            raise ValueError("mask_confirmed requires a mask")
        if self.mask is not None and self.refer is None:
            raise ValueError("a mask requires a refer")
        if min(self.query_count, self.execute_count, self.turn_index) < 0:
            raise ValueError("counters must be non-negative")
        if self.execute_count > self.query_count:
            raise ValueError(
                f"execute_count {self.execute_count} exceeds query_count {self.query_count}"
            )


@dataclass(frozen=True)
class AdjustRequest:
    """Complete argument set for one edit: mask, attribute, value."""

    mask: "Mask"
    attribute: Attribute
    value: EditValue

    def __post_init__(self) -> None:
        if self.mask is None or self.attribute is None or self.value is None:
            raise ValueError("adjust requires mask, attribute and value")
