import json

import pytest

from chatedit.logs import (
    DialogueLog,
    LogFormatError,
    SPEAKER_SYSTEM,
    SPEAKER_USER,
    TurnRecord,
    act_from_json,
    act_to_json,
    counters_consistent,
    frame_from_json,
    frame_to_json,
    load_log_dir,
    log_from_lines,
    log_to_lines,
    read_log,
    recount_acts,
    state_snapshot,
    write_log,
)
from chatedit.nlu import Intent, TurnFrame
from chatedit.ontology import (
    Attribute,
    DialogueAct,
    DialogueState,
    Refer,
    make_edit_value,
)


def _record(i, speaker=SPEAKER_USER, acts=(), text="hi"):
    return TurnRecord(turn_index=i, speaker=speaker, text=text, acts=acts)


def _sample_log():
    records = (
        _record(0, SPEAKER_SYSTEM, (DialogueAct.request("refer"),)),
        _record(1, SPEAKER_USER, text="brighten the cow by 20",
                acts=()),
        _record(2, SPEAKER_SYSTEM,
                (DialogueAct.query(), DialogueAct.confirm("mask"))),
        _record(3, SPEAKER_USER, text="yes"),
        _record(4, SPEAKER_SYSTEM,
                (DialogueAct.execute(), DialogueAct.request("refer"))),
    )
    return DialogueLog(session_id="s1", image_id="farm", records=records,
                       query_count=1, execute_count=1,
                       started_at="2024-05-01T10:00:00")


# --- serialization ------------------------------------------------------

def test_act_round_trip():
    for act in (DialogueAct.request("value"), DialogueAct.confirm("mask"),
                DialogueAct.query(), DialogueAct.execute()):
        assert act_from_json(act_to_json(act)) == act


def test_frame_round_trip():
    frame = TurnFrame(refer=Refer("the left cow"),
                      attribute=Attribute.SATURATION,
                      value=make_edit_value(-40), action_negative=True)
    assert frame_from_json(frame_to_json(frame)) == frame
    assert frame_to_json(None) is None
    assert frame_from_json(None) is None


def test_frame_round_trip_intent_and_error():
    frame = TurnFrame(intent=Intent.DENY)
    assert frame_from_json(frame_to_json(frame)) == frame
    broken = TurnFrame(attribute=Attribute.HUE, value_error="out_of_range")
    assert frame_from_json(frame_to_json(broken)) == broken


def test_state_snapshot_plain_state():
    snap = state_snapshot(DialogueState(refer=Refer("sky"), turn_index=3))
    assert snap == {
        "refer": "sky", "mask": None, "mask_confirmed": False,
        "attribute": None, "value": None,
        "query_count": 0, "execute_count": 0, "turn_index": 3,
    }


def test_record_round_trip():
    record = TurnRecord(
        turn_index=7, speaker=SPEAKER_SYSTEM, text="Is it right?",
        acts=(DialogueAct.confirm("mask"),),
        frame=None,
        state_after=state_snapshot(DialogueState(refer=Refer("cow"))),
        rules=("fill_refer", "advance_turn"),
    )
    assert TurnRecord.from_json(record.to_json()) == record


def test_record_rejects_unknown_speaker():
    with pytest.raises(ValueError):
        TurnRecord(turn_index=0, speaker="narrator", text="x")


# --- DialogueLog invariants ---------------------------------------------

def test_log_counter_invariants():
    with pytest.raises(ValueError):
        DialogueLog(session_id="s", image_id="i", query_count=-1)
    with pytest.raises(ValueError):
        DialogueLog(session_id="s", image_id="i",
                    query_count=1, execute_count=2)


def test_log_requires_increasing_turn_index():
    records = (_record(0), _record(0))
    with pytest.raises(ValueError):
        DialogueLog(session_id="s", image_id="i", records=records)


def test_user_utterances():
    log = _sample_log()
    assert log.user_utterances() == ["brighten the cow by 20", "yes"]


def test_recount_and_consistency():
    log = _sample_log()
    assert recount_acts(log.records) == (1, 1)
    assert counters_consistent(log)
    drifted = DialogueLog(session_id="s", image_id="i",
                          records=log.records, query_count=1,
                          execute_count=0)
    assert not counters_consistent(drifted)


# --- wire format --------------------------------------------------------

def test_lines_round_trip():
    log = _sample_log()
    assert log_from_lines(log_to_lines(log)) == log


def test_header_line_shape():
    lines = log_to_lines(_sample_log())
    header = json.loads(lines[0])
    assert header == {"session_id": "s1", "image_id": "farm",
                      "query_count": 1, "execute_count": 1,
                      "started_at": "2024-05-01T10:00:00"}
    assert len(lines) == 1 + len(_sample_log().records)


def test_every_line_is_json_object():
    for line in log_to_lines(_sample_log()):
        assert isinstance(json.loads(line), dict)


def test_log_from_lines_rejects_garbage():
    with pytest.raises(LogFormatError):
        log_from_lines([])
    with pytest.raises(LogFormatError):
        log_from_lines(["not json"])
    with pytest.raises(LogFormatError):
        log_from_lines([json.dumps({"foo": 1})])


def test_file_round_trip(tmp_path):
    log = _sample_log()
    path = tmp_path / "session.jsonl"
    write_log(log, path)
    assert read_log(path) == log
    text = path.read_text()
    assert text.endswith("\n") and "\n\n" not in text


def test_load_log_dir_sorted(tmp_path):
    a = DialogueLog(session_id="a", image_id="farm")
    b = DialogueLog(session_id="b", image_id="beach")
    write_log(b, tmp_path / "2.jsonl")
    write_log(a, tmp_path / "1.jsonl")
    (tmp_path / "notes.txt").write_text("ignored")
    loaded = load_log_dir(tmp_path)
    assert [lg.session_id for lg in loaded] == ["a", "b"]
