"""Dialogue logs and their JSON-lines wire format.

A log file holds one session-header object on the first line and one
TurnRecord object per following line.  Records carry everything needed
to replay the dialogue: the raw text, the extracted frame, the system
acts, the fired update rules, and a snapshot of the state afterwards.
Masks are logged by source object id and confidence, not by pixels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .nlu import Intent, TurnFrame
from .ontology import (
    ActKind,
    DialogueAct,
    DialogueState,
    make_edit_value,
    parse_attribute,
    Refer,
)

SPEAKER_USER = "user"
SPEAKER_SYSTEM = "system"


class LogFormatError(ValueError):
    """Raised when a log file does not parse back into a DialogueLog."""


def act_to_json(act: DialogueAct) -> dict:
    return {"kind": act.kind.value, "slot": act.slot}


def act_from_json(obj: dict) -> DialogueAct:
    return DialogueAct(kind=ActKind(obj["kind"]), slot=obj.get("slot"))


def frame_to_json(frame: Optional[TurnFrame]) -> Optional[dict]:
    if frame is None:
        return None
    return {
        "refer": frame.refer.text if frame.refer is not None else None,
        "attribute": str(frame.attribute) if frame.attribute is not None else None,
        "value": frame.value.magnitude if frame.value is not None else None,
        "action_negative": frame.action_negative,
        "intent": frame.intent.value,
        "value_error": frame.value_error,
    }


def frame_from_json(obj: Optional[dict]) -> Optional[TurnFrame]:
    if obj is None:
        return None
    refer = Refer(obj["refer"]) if obj.get("refer") else None
    attribute = parse_attribute(obj["attribute"]) if obj.get("attribute") else None
    value = make_edit_value(obj["value"]) if obj.get("value") is not None else None
    return TurnFrame(
        refer=refer,
        attribute=attribute,
        value=value,
        action_negative=bool(obj.get("action_negative", False)),
        intent=Intent(obj.get("intent", "none")),
        value_error=obj.get("value_error"),
    )


def state_snapshot(state: DialogueState) -> dict:
    """Project a DialogueState onto plain JSON values.

    The mask is summarized (which object, what confidence, how many
    member pixels); pixel data stays with the session.
    """
    mask = None
    if state.mask is not None:
        mask = {
            "source_id": state.mask.source_id,
            "confidence": state.mask.confidence,
            "member_count": state.mask.member_count,
        }
    return {
        "refer": state.refer.text if state.refer is not None else None,
        "mask": mask,
        "mask_confirmed": state.mask_confirmed,
        "attribute": str(state.attribute) if state.attribute is not None else None,
        "value": state.value.magnitude if state.value is not None else None,
        "query_count": state.query_count,
        "execute_count": state.execute_count,
        "turn_index": state.turn_index,
    }


@dataclass(frozen=True)
class TurnRecord:
    """One logged turn from either speaker."""

    turn_index: int
    speaker: str
    text: str
    acts: tuple[DialogueAct, ...] = ()
    frame: Optional[TurnFrame] = None
    state_after: Optional[dict] = None
    rules: tuple[str, ...] = ()

    def __post_init__(self):
        if self.speaker not in (SPEAKER_USER, SPEAKER_SYSTEM):
            raise ValueError(f"unknown speaker {self.speaker!r}")
        object.__setattr__(self, "acts", tuple(self.acts))
        object.__setattr__(self, "rules", tuple(self.rules))

    def to_json(self) -> dict:
        return {
            "turn_index": self.turn_index,
            "speaker": self.speaker,
            "text": self.text,
            "acts": [act_to_json(a) for a in self.acts],
            "frame": frame_to_json(self.frame),
            "state_after": self.state_after,
            "rules": list(self.rules),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TurnRecord":
        return cls(
            turn_index=int(obj["turn_index"]),
            speaker=obj["speaker"],
            text=obj["text"],
            acts=tuple(act_from_json(a) for a in obj.get("acts", [])),
            frame=frame_from_json(obj.get("frame")),
            state_after=obj.get("state_after"),
            rules=tuple(obj.get("rules", [])),
        )


@dataclass(frozen=True)
class DialogueLog:
    """A finished or in-progress session transcript with act counters."""

    session_id: str
    image_id: str
    records: tuple[TurnRecord, ...] = ()
    query_count: int = 0
    execute_count: int = 0
    started_at: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if self.query_count < 0 or self.execute_count < 0:
            raise ValueError("act counters must be non-negative")
        if self.execute_count > self.query_count:
            raise ValueError(
                f"execute_count {self.execute_count} exceeds "
                f"query_count {self.query_count}"
            )
        indices = [r.turn_index for r in self.records]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("turn_index must be strictly increasing")

    def user_utterances(self) -> list[str]:
        return [r.text for r in self.records if r.speaker == SPEAKER_USER]


def recount_acts(records: Iterable[TurnRecord]) -> tuple[int, int]:
    """Recount (query, execute) acts directly from the records."""
    n_query = 0
    n_execute = 0
    for record in records:
        for act in record.acts:
            if act.kind is ActKind.QUERY:
                n_query += 1
            elif act.kind is ActKind.EXECUTE:
                n_execute += 1
    return n_query, n_execute


def counters_consistent(log: DialogueLog) -> bool:
    """True when the stored counters match a fresh recount."""
    return recount_acts(log.records) == (log.query_count, log.execute_count)


def log_to_lines(log: DialogueLog) -> list[str]:
    header = {
        "session_id": log.session_id,
        "image_id": log.image_id,
        "query_count": log.query_count,
        "execute_count": log.execute_count,
        "started_at": log.started_at,
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines.extend(json.dumps(r.to_json(), sort_keys=True) for r in log.records)
    return lines


def log_from_lines(lines: Iterable[str]) -> DialogueLog:
    rows = [line for line in (ln.strip() for ln in lines) if line]
    if not rows:
        raise LogFormatError("empty log")
    try:
        header = json.loads(rows[0])
        records = tuple(TurnRecord.from_json(json.loads(row)) for row in rows[1:])
    except (KeyError, ValueError, TypeError) as exc:
        raise LogFormatError(f"bad log line: {exc}") from exc
    if "session_id" not in header or "image_id" not in header:
        raise LogFormatError("first line is not a session header")
    return DialogueLog(
        session_id=header["session_id"],
        image_id=header["image_id"],
        records=records,
        query_count=int(header.get("query_count", 0)),
        execute_count=int(header.get("execute_count", 0)),
        started_at=header.get("started_at"),
    )


def write_log(log: DialogueLog, path) -> None:
    Path(path).write_text("\n".join(log_to_lines(log)) + "\n", encoding="utf-8")


def read_log(path) -> DialogueLog:
    return log_from_lines(Path(path).read_text(encoding="utf-8").splitlines())


def load_log_dir(root) -> list[DialogueLog]:
    """Read every *.jsonl file under a directory, sorted by file name."""
    root = Path(root)
    return [read_log(p) for p in sorted(root.glob("*.jsonl"))]
