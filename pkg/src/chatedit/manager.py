"""Dialogue policy, response templates, and per-session orchestration.

The policy walks a fixed slot order (refer, mask, mask confirmation,
attribute, value) and emits the first unmet requirement; with everything
filled it executes the edit.  ``Session.step`` runs one full user turn:
frame extraction, state aggregation, resolver calls, image updates, and
log records for both speakers.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import tracker
from .imaging import Image, adjust, render_overlay
from .logs import (
    DialogueLog,
    SPEAKER_SYSTEM,
    SPEAKER_USER,
    TurnRecord,
    state_snapshot,
)
from .nlu import Intent, Tagger, TurnFrame, extract_frame
from .ontology import (
    ActKind,
    ATTRIBUTE_NAMES,
    DialogueAct,
    DialogueState,
)
from .vision import Scene, resolve


class MissingTemplateError(KeyError):
    pass


class SessionClosedError(RuntimeError):
    pass


class EmptyUtteranceError(ValueError):
    pass


DEFAULT_TEMPLATES = {
    "greeting": "Hi! Which part of the image would you like to edit?",
    "request_refer": "Which region should I edit? Please describe the object.",
    "request_attribute": "Which attribute should I change: {attributes}?",
    "request_value": "What value should I apply for {attribute}? (-100 to 100)",
    "confirm_mask": "Is the current detected region correct? (yes/no)",
    "confirm_repeat": (
        "Please answer yes or no. "
        "Is the current detected region correct? (yes/no)"
    ),
    "query": 'Looking for "{refer}".',
    "no_detection": (
        'Sorry, I could not find a region matching "{refer}". '
        "Could you describe it differently?"
    ),
    "deny_retry": "Okay, let us try again. Which region should I edit?",
    "abandon_confirm": (
        "Let us start over. Which region should I edit? "
        "Please describe the object."
    ),
    "invalid_value": (
        "I need an integer for {attribute}. "
        "What value should I apply? (-100 to 100)"
    ),
    "execute": 'Done! I applied {attribute} {value} to "{refer}".',
    "request_more": "Anything else you would like to edit?",
    "farewell": "We reached the turn limit for this session. Goodbye!",
}


@dataclass(frozen=True)
class TemplateSet:
    """Response templates keyed by situation, str.format placeholders."""

    entries: dict

    def get(self, key: str) -> str:
        try:
            return self.entries[key]
        except KeyError:
            raise MissingTemplateError(key) from None

    @classmethod
    def defaults(cls) -> "TemplateSet":
        return cls(entries=dict(DEFAULT_TEMPLATES))

    @classmethod
    def from_file(cls, path) -> "TemplateSet":
        """Load key=template overrides on top of the defaults."""
        entries = dict(DEFAULT_TEMPLATES)
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"expected key=template, got {line!r}")
            key, template = line.split("=", 1)
            entries[key.strip()] = template.strip()
        return cls(entries=entries)


def next_act(state: DialogueState) -> DialogueAct:
    """First unmet requirement wins; complete state means execute."""
    if state.refer is None:
        return DialogueAct.request("refer")
    if state.mask is None:
        return DialogueAct.query()
    if not state.mask_confirmed:
        return DialogueAct.confirm("mask")
    if state.attribute is None:
        return DialogueAct.request("attribute")
    if state.value is None:
        return DialogueAct.request("value")
    return DialogueAct.execute()


def _format_args(state: DialogueState) -> dict:
    return {
        "attributes": ", ".join(ATTRIBUTE_NAMES),
        "attribute": str(state.attribute) if state.attribute else "the attribute",
        "value": f"{state.value.magnitude:+d}" if state.value else "",
        "refer": state.refer.text if state.refer else "the region",
    }


def _template_key(act: DialogueAct) -> str:
    if act.kind is ActKind.REQUEST:
        return f"request_{act.slot}"
    if act.kind is ActKind.CONFIRM:
        return "confirm_mask"
    if act.kind is ActKind.QUERY:
        return "query"
    return "execute"


def render_response(act: DialogueAct, state: DialogueState,
                    templates: TemplateSet) -> str:
    """Fill the template for an act from the current state."""
    return templates.get(_template_key(act)).format(**_format_args(state))


@dataclass(frozen=True)
class SystemTurn:
    """What the system did and said in response to one user turn."""

    act: DialogueAct
    acts: tuple[DialogueAct, ...]
    utterance: str
    mask_overlay_present: bool = False
    image_updated: bool = False


class Session:
    """One dialogue over one scene, with a working image and a log."""

    def __init__(self, scene: Scene, session_id: Optional[str] = None,
                 templates: Optional[TemplateSet] = None,
                 max_turns: Optional[int] = None,
                 tagger: Optional[Tagger] = None):
        self.session_id = session_id or uuid.uuid4().hex
        self.scene = scene
        self.templates = templates or TemplateSet.defaults()
        self.max_turns = max_turns
        self.tagger = tagger
        self.image = Image(scene.image.pixels)
        self.state = DialogueState()
        self.records: list[TurnRecord] = []
        self.started_at = datetime.now(timezone.utc).isoformat()
        self.closed = False
        self.image_version = 0
        self.user_turns = 0
        self.last_executed: dict[str, int] = {}
        self._confirm_reprompts = 0
        self._record_system(self.templates.get("greeting"),
                            (DialogueAct.request("refer"),))

    # -- log plumbing ----------------------------------------------------

    def _record_system(self, text: str, acts: tuple[DialogueAct, ...],
                       rules: tuple[str, ...] = ()) -> None:
        self.records.append(TurnRecord(
            turn_index=len(self.records),
            speaker=SPEAKER_SYSTEM,
            text=text,
            acts=acts,
            state_after=state_snapshot(self.state),
            rules=rules,
        ))

    def _record_user(self, text: str, frame: TurnFrame,
                     rules: tuple[str, ...]) -> None:
        self.records.append(TurnRecord(
            turn_index=len(self.records),
            speaker=SPEAKER_USER,
            text=text,
            frame=frame,
            state_after=state_snapshot(self.state),
            rules=rules,
        ))

    def current_log(self) -> DialogueLog:
        return DialogueLog(
            session_id=self.session_id,
            image_id=self.scene.image_id,
            records=tuple(self.records),
            query_count=self.state.query_count,
            execute_count=self.state.execute_count,
            started_at=self.started_at,
        )

    def close(self) -> DialogueLog:
        self.closed = True
        return self.current_log()

    # -- images ----------------------------------------------------------

    @property
    def overlay_available(self) -> bool:
        return self.state.mask is not None

    def overlay_image(self) -> Image:
        if self.state.mask is None:
            raise ValueError("no tracked mask to overlay")
        return render_overlay(self.image, self.state.mask)

    def greeting(self) -> str:
        return self.records[0].text

    # -- the turn --------------------------------------------------------

    def step(self, user_text: str) -> SystemTurn:
        """Process one user utterance and produce the system reply."""
        if self.closed:
            raise SessionClosedError(self.session_id)
        text = user_text.strip()
        if not text:
            raise EmptyUtteranceError("utterance must not be empty")
        self.user_turns += 1

        frame = extract_frame(text, tagger=self.tagger)
        confirm_pending = (self.state.mask is not None
                           and not self.state.mask_confirmed)
        rules: tuple[str, ...]

        if frame.intent is not Intent.NONE and confirm_pending:
            transition = tracker.apply_confirmation_with_trace(
                self.state, frame.intent)
            self.state = transition.after
            rules = transition.rule_fired
            self._confirm_reprompts = 0
        else:
            new_refer = frame.refer is not None and (
                self.state.refer is None
                or not self.state.refer.same_as(frame.refer))
            transition = tracker.update_with_trace(self.state, frame)
            self.state = transition.after
            rules = transition.rule_fired
            if confirm_pending and not new_refer:
                # Neither an answer nor a fresh description: repeat the
                # question once, then drop the candidate region.
                self._confirm_reprompts += 1
                if self._confirm_reprompts > 1:
                    self.state = tracker.abandon_confirmation(self.state)
                    rules = rules + ("confirmation_abandoned",)
                    self._confirm_reprompts = 0
            elif new_refer:
                self._confirm_reprompts = 0

        self._record_user(text, frame, rules)
        turn = self._respond(frame)

        if self.max_turns is not None and self.user_turns >= self.max_turns:
            farewell = self.templates.get("farewell")
            self.records[-1] = TurnRecord(
                turn_index=self.records[-1].turn_index,
                speaker=SPEAKER_SYSTEM,
                text=self.records[-1].text + " " + farewell,
                acts=self.records[-1].acts,
                state_after=self.records[-1].state_after,
                rules=self.records[-1].rules,
            )
            turn = SystemTurn(
                act=turn.act,
                acts=turn.acts,
                utterance=turn.utterance + " " + farewell,
                mask_overlay_present=turn.mask_overlay_present,
                image_updated=turn.image_updated,
            )
            self.closed = True
        return turn

    def _respond(self, frame: TurnFrame) -> SystemTurn:
        """Pick the system acts for the updated state and render them."""
        acts: list[DialogueAct] = []
        sys_rules: list[str] = []
        args = _format_args(self.state)
        act = next_act(self.state)

        if act.kind is ActKind.QUERY:
            acts.append(act)
            failed_refer = self.state.refer.text
            mask = resolve(self.state.refer, self.scene)
            if mask is None:
                self.state = tracker.record_query_miss(self.state)
                sys_rules.append("query_miss")
                act = next_act(self.state)
                acts.append(act)
                utterance = self.templates.get("no_detection").format(
                    **dict(args, refer=failed_refer))
                turn = SystemTurn(act=act, acts=tuple(acts),
                                  utterance=utterance)
                self._record_system(utterance, tuple(acts), tuple(sys_rules))
                return turn
            self.state = tracker.record_query_hit(self.state, mask)
            sys_rules.append("query_hit")
            self._confirm_reprompts = 0
            act = next_act(self.state)

        if act.kind is ActKind.EXECUTE:
            args = _format_args(self.state)
            utterance = (self.templates.get("execute").format(**args)
                         + " " + self.templates.get("request_more"))
            self.image = adjust(self.image, self.state.mask,
                                self.state.attribute, self.state.value)
            self.image_version += 1
            self.last_executed[str(self.state.attribute)] = \
                self.state.value.magnitude
            self.state = tracker.record_execute(self.state)
            sys_rules.append("executed")
            acts.append(act)
            acts.append(DialogueAct.request("refer"))
            turn = SystemTurn(act=act, acts=tuple(acts), utterance=utterance,
                              image_updated=True)
            self._record_system(utterance, tuple(acts), tuple(sys_rules))
            return turn

        acts.append(act)
        utterance = self._choose_prompt(act, frame)
        turn = SystemTurn(
            act=act,
            acts=tuple(acts),
            utterance=utterance,
            mask_overlay_present=(act.kind is ActKind.CONFIRM),
        )
        self._record_system(utterance, tuple(acts), tuple(sys_rules))
        return turn

    def _choose_prompt(self, act: DialogueAct, frame: TurnFrame) -> str:
        """Contextual wording for request/confirm prompts."""
        args = _format_args(self.state)
        if act.kind is ActKind.CONFIRM and self._confirm_reprompts == 1:
            return self.templates.get("confirm_repeat").format(**args)
        if act.kind is ActKind.REQUEST and act.slot == "refer":
            if frame.intent is Intent.DENY:
                return self.templates.get("deny_retry").format(**args)
            if "confirmation_abandoned" in self.records[-1].rules:
                return self.templates.get("abandon_confirm").format(**args)
        if (act.kind is ActKind.REQUEST and act.slot == "value"
                and frame.value_error is not None):
            return self.templates.get("invalid_value").format(**args)
        return render_response(act, self.state, self.templates)


def run_script(session: Session, lines) -> list[SystemTurn]:
    """Feed a list of user utterances through a session, in order."""
    turns = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        turns.append(session.step(line))
    return turns
