"""Turn-level state aggregation rules.

Pure transition functions over the immutable DialogueState.  Slot values
present in a frame overwrite the state; a changed refer drops the tracked
mask (each edit selects its region afresh); Execute clears every slot but
keeps the lifecycle counters.  ``*_with_trace`` variants wrap the same
transitions in a StateTransition record for the audit log.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .imaging import Mask
from .nlu import Intent, TurnFrame
from .ontology import DialogueState


class InvalidContextError(RuntimeError):
    """A confirmation arrived without an unconfirmed mask to confirm."""


@dataclass(frozen=True)
class StateTransition:
    """One audited transition: before + frame -> after, with rule ids."""

    before: DialogueState
    frame: Optional[TurnFrame]
    after: DialogueState
    rule_fired: tuple[str, ...]


def _update(state: DialogueState, frame: TurnFrame) -> tuple[DialogueState, tuple[str, ...]]:
    rules: list[str] = []
    refer = state.refer
    mask = state.mask
    confirmed = state.mask_confirmed

    attribute = state.attribute
    value = state.value

    if frame.intent is Intent.NONE:
        if frame.refer is not None:
            if refer is None or not refer.same_as(frame.refer):
                if mask is not None:
                    mask = None
                    confirmed = False
                    rules.append("mask_removed_on_new_refer")
                rules.append("fill_refer")
            refer = frame.refer
        if frame.attribute is not None:
            attribute = frame.attribute
            rules.append("fill_attribute")
        if frame.value is not None:
            value = frame.value
            rules.append("fill_value")

    rules.append("advance_turn")
    after = replace(
        state,
        refer=refer,
        mask=mask,
        mask_confirmed=confirmed,
        attribute=attribute,
        value=value,
        turn_index=state.turn_index + 1,
    )
    return after, tuple(rules)


def update(state: DialogueState, frame: TurnFrame) -> DialogueState:
    """Aggregate one frame into the state.

    Slots absent from the frame are never cleared here; the only removal
    is the mask when a genuinely new refer arrives.  Intent frames carry
    no slots and just advance the turn.
    """
    return _update(state, frame)[0]


def update_with_trace(state: DialogueState, frame: TurnFrame) -> StateTransition:
    after, rules = _update(state, frame)
    return StateTransition(before=state, frame=frame, after=after, rule_fired=rules)


def apply_confirmation(state: DialogueState, intent: Intent) -> DialogueState:
    """Resolve a pending mask confirmation.

    Affirm marks the mask confirmed; Deny drops both mask and refer so the
    user describes the object afresh.  Requires an unconfirmed mask.
    """
    if state.mask is None or state.mask_confirmed:
        raise InvalidContextError("no unconfirmed mask to confirm")
    if intent is Intent.AFFIRM:
        return replace(state, mask_confirmed=True, turn_index=state.turn_index + 1)
    if intent is Intent.DENY:
        return replace(
            state,
            refer=None,
            mask=None,
            mask_confirmed=False,
            turn_index=state.turn_index + 1,
        )
    raise ValueError(f"expected a yes/no intent, got {intent}")


def apply_confirmation_with_trace(state: DialogueState, intent: Intent) -> StateTransition:
    after = apply_confirmation(state, intent)
    rule = "mask_confirmed" if intent is Intent.AFFIRM else "mask_rejected"
    return StateTransition(before=state, frame=TurnFrame(intent=intent),
                           after=after, rule_fired=(rule, "advance_turn"))


def reset_after_execute(state: DialogueState) -> DialogueState:
    """Clear all four slots after an executed edit; counters survive.

    Idempotent: resetting a cleared state changes nothing.
    """
    return replace(
        state,
        refer=None,
        mask=None,
        mask_confirmed=False,
        attribute=None,
        value=None,
    )


def record_query_hit(state: DialogueState, mask: Mask) -> DialogueState:
    """Bookkeeping for a resolver call that produced a mask."""
    return replace(
        state, mask=mask, mask_confirmed=False, query_count=state.query_count + 1
    )


def record_query_miss(state: DialogueState) -> DialogueState:
    """Bookkeeping for a resolver call that found nothing.

    The failed refer is dropped so the follow-up refer request starts
    clean; the attempt still counts as a query.
    """
    return replace(
        state,
        refer=None,
        mask=None,
        mask_confirmed=False,
        query_count=state.query_count + 1,
    )


def record_execute(state: DialogueState) -> DialogueState:
    """Count the executed edit, then clear the slots."""
    return reset_after_execute(
        replace(state, execute_count=state.execute_count + 1)
    )


def abandon_confirmation(state: DialogueState) -> DialogueState:
    """Give up on an unanswered confirmation: drop mask and refer."""
    return replace(state, refer=None, mask=None, mask_confirmed=False)
