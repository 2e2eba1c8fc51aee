import math
import random

import pytest
import scipy.stats

from chatedit.logs import DialogueLog, SPEAKER_SYSTEM, SPEAKER_USER, TurnRecord
from chatedit.metrics import (
    EmptyInputError,
    LengthMismatchError,
    dialogue_report,
    evaluate_corpus,
    extract_spans,
    ks_statistic,
    pearson,
    span_f1,
    turn_stats,
    vision_accuracy,
)
from chatedit.nlu import BIO_LABELS, CATEGORIES
from chatedit.ontology import DialogueAct


def _log(n_records, execute_at=(), queries=None, session="s"):
    """Fabricate a log: records 1..n, Execute acts on the given 1-based ones."""
    execute_at = set(execute_at)
    records = []
    for i in range(1, n_records + 1):
        speaker = SPEAKER_USER if i % 2 else SPEAKER_SYSTEM
        acts = (DialogueAct.execute(),) if i in execute_at else ()
        records.append(TurnRecord(turn_index=i - 1, speaker=speaker,
                                  text=f"t{i}", acts=acts))
    n_exec = len(execute_at)
    return DialogueLog(session_id=session, image_id="farm",
                       records=tuple(records),
                       query_count=n_exec if queries is None else queries,
                       execute_count=n_exec)


# --- vision accuracy ----------------------------------------------------

def test_vision_accuracy_ratio():
    assert vision_accuracy(_log(4, execute_at=(4,), queries=2)) == 0.5
    assert vision_accuracy(_log(2, execute_at=(2,), queries=1)) == 1.0
    assert vision_accuracy(_log(6, queries=3)) == 0.0


def test_vision_accuracy_undefined_without_queries():
    assert vision_accuracy(_log(4)) is None


def test_report_excludes_undefined_accuracy():
    logs = [_log(2, execute_at=(2,), queries=1, session="a"),
            _log(4, queries=2, session="b"),
            _log(3, session="c")]  # never queried
    report = dialogue_report(logs)
    assert report["mean_vision_accuracy"] == pytest.approx(0.5)
    assert report["vision_accuracy_defined"] == 2
    assert report["vision_accuracy_undefined"] == 1
    assert report["n_dialogues"] == 3


# --- span extraction ----------------------------------------------------

def test_extract_spans_basic():
    labels = ["B-ACTION", "O", "B-ATTRIBUTE", "O",
              "B-REFER", "I-REFER", "I-REFER", "O", "B-VALUE"]
    assert extract_spans(labels) == [
        ("ACTION", 0, 1), ("ATTRIBUTE", 2, 3), ("REFER", 4, 7),
        ("VALUE", 8, 9)]


def test_extract_spans_handles_adjacent_and_stray():
    assert extract_spans(["B-REFER", "B-REFER"]) == [
        ("REFER", 0, 1), ("REFER", 1, 2)]
    assert extract_spans(["I-REFER", "I-REFER", "O"]) == [("REFER", 0, 2)]
    assert extract_spans(["B-ACTION", "I-REFER"]) == [
        ("ACTION", 0, 1), ("REFER", 1, 2)]
    assert extract_spans([]) == []
    assert extract_spans(["O", "O"]) == []


def _oracle_spans(labels):
    """Second opinion on span reading, coded as a plain scan."""
    out = []
    i = 0
    while i < len(labels):
        if labels[i] == "O":
            i += 1
            continue
        cat = labels[i][2:]
        j = i + 1
        while j < len(labels) and labels[j] == "I-" + cat:
            j += 1
        out.append((cat, i, j))
        i = j
    return out


def test_extract_spans_matches_oracle_on_random_sequences():
    rng = random.Random(901)
    for _ in range(500):
        labels = [rng.choice(BIO_LABELS) for _ in range(rng.randrange(12))]
        assert extract_spans(labels) == _oracle_spans(labels)


# --- span F1 ------------------------------------------------------------

def test_span_f1_perfect():
    gold = [["B-ACTION", "B-ATTRIBUTE", "O", "B-VALUE"]]
    report = span_f1(gold, gold)
    assert report.mean == 1.0
    for cat in CATEGORIES:
        assert report.f1(cat) == 1.0


def test_span_f1_empty_category_is_vacuously_perfect():
    gold = [["B-ACTION", "O"]]
    report = span_f1(gold, gold)
    assert report.f1("VALUE") == 1.0
    assert report.categories["VALUE"].tp == 0


def test_span_f1_boundary_error_is_fp_plus_fn():
    gold = [["B-REFER", "I-REFER", "I-REFER"]]
    pred = [["B-REFER", "I-REFER", "O"]]
    report = span_f1(gold, pred)
    cat = report.categories["REFER"]
    assert (cat.tp, cat.fp, cat.fn) == (0, 1, 1)
    assert cat.f1 == 0.0


def test_span_f1_micro_accumulates_across_sentences():
    gold = [["B-ACTION"], ["B-ACTION"], ["B-ACTION"]]
    pred = [["B-ACTION"], ["O"], ["B-ACTION"]]
    cat = span_f1(gold, pred).categories["ACTION"]
    assert (cat.tp, cat.fp, cat.fn) == (2, 0, 1)
    assert cat.precision == 1.0
    assert cat.recall == pytest.approx(2 / 3)
    assert cat.f1 == pytest.approx(0.8)


def test_span_f1_hand_tally():
    gold = [
        ["B-ACTION", "O", "B-ATTRIBUTE", "O", "B-REFER", "I-REFER",
         "O", "B-VALUE"],
        ["B-ACTION", "B-ATTRIBUTE", "O", "B-VALUE"],
    ]
    pred = [
        ["B-ACTION", "O", "B-ATTRIBUTE", "O", "B-REFER", "O",
         "O", "B-VALUE"],   # refer boundary wrong
        ["O", "B-ATTRIBUTE", "O", "B-VALUE"],  # action missed
    ]
    report = span_f1(gold, pred)
    assert report.categories["ACTION"].tp == 1
    assert report.categories["ACTION"].fn == 1
    assert report.categories["ATTRIBUTE"].f1 == 1.0
    assert report.categories["VALUE"].f1 == 1.0
    assert report.categories["REFER"].f1 == 0.0
    action_f1 = 2 * 1.0 * 0.5 / 1.5
    assert report.mean == pytest.approx((action_f1 + 1.0 + 1.0 + 0.0) / 4)


def test_span_f1_rejects_mismatched_shapes():
    with pytest.raises(LengthMismatchError):
        span_f1([["O"]], [["O"], ["O"]])
    with pytest.raises(LengthMismatchError):
        span_f1([["O", "O"]], [["O"]])


def _oracle_f1(gold, pred):
    scores = {}
    for cat in CATEGORIES:
        tp = fp = fn = 0
        for g, p in zip(gold, pred):
            gs = {s for s in _oracle_spans(g) if s[0] == cat}
            ps = {s for s in _oracle_spans(p) if s[0] == cat}
            tp += len(gs & ps)
            fp += len(ps - gs)
            fn += len(gs - ps)
        if tp == fp == fn == 0:
            scores[cat] = (1.0, 1.0, 1.0)
            continue
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        scores[cat] = (prec, rec, f1)
    mean = sum(v[2] for v in scores.values()) / len(scores)
    return scores, mean


def test_span_f1_matches_oracle_on_random_corpora():
    rng = random.Random(31337)
    for _ in range(60):
        gold, pred = [], []
        for _ in range(rng.randrange(1, 8)):
            n = rng.randrange(1, 10)
            gold.append([rng.choice(BIO_LABELS) for _ in range(n)])
            pred.append([rng.choice(BIO_LABELS) for _ in range(n)])
        report = span_f1(gold, pred)
        scores, mean = _oracle_f1(gold, pred)
        assert report.mean == pytest.approx(mean, abs=1e-12)
        for cat in CATEGORIES:
            got = report.categories[cat]
            assert (got.precision, got.recall, got.f1) == pytest.approx(
                scores[cat], abs=1e-12)


def test_evaluate_corpus_uses_supplied_tagger():
    records = [{"text": "increase brightness by 10",
                "labels": ["B-ACTION", "B-ATTRIBUTE", "O", "B-VALUE"]}]
    assert evaluate_corpus(records).mean == 1.0
    all_o = lambda tokens: ["O"] * len(tokens)
    report = evaluate_corpus(records, tagger=all_o)
    assert report.mean < 1.0


# --- turn statistics ----------------------------------------------------

def test_mean_turns_over_two_dialogues():
    stats = turn_stats([_log(16, session="a"), _log(18, session="b")])
    assert stats.mean_turns_per_dialogue == 17.0
    assert stats.mean_user_turns_per_dialogue == 8.5


def test_turns_per_edit_two_cycles():
    log = _log(10, execute_at=(5, 10), queries=2)
    stats = turn_stats([log])
    assert stats.mean_turns_per_edit == 5.0
    assert stats.edits_per_dialogue == (2,)
    assert stats.first_edit_turns == (5,)
    assert stats.second_edit_turns == (5,)


def test_turns_per_edit_uneven_cycles():
    log = _log(9, execute_at=(4, 9), queries=2)
    stats = turn_stats([log])
    assert stats.mean_turns_per_edit == pytest.approx(4.5)
    assert stats.first_edit_turns == (4,)
    assert stats.second_edit_turns == (5,)


def test_dialogues_without_edits_excluded_from_per_edit():
    with_edit = _log(6, execute_at=(6,), queries=1, session="a")
    without = _log(8, session="b")
    stats = turn_stats([with_edit, without])
    assert stats.mean_turns_per_edit == 6.0
    assert stats.edits_per_dialogue == (1, 0)
    assert turn_stats([without]).mean_turns_per_edit is None


def test_trailing_records_after_last_execute_ignored():
    log = _log(7, execute_at=(4,), queries=1)
    assert turn_stats([log]).mean_turns_per_edit == 4.0


def test_turn_stats_empty_input():
    with pytest.raises(EmptyInputError):
        turn_stats([])


# --- correlation and distribution distance ------------------------------

def test_pearson_perfect_lines():
    xs = [1.0, 2.0, 3.0, 4.0]
    assert pearson(xs, [2 * x + 1 for x in xs]) == pytest.approx(1.0)
    assert pearson(xs, [-x for x in xs]) == pytest.approx(-1.0)


def test_pearson_zero_variance_is_none():
    assert pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]) is None
    assert pearson([1.0, 2.0, 3.0], [5.0, 5.0, 5.0]) is None


def test_pearson_guards():
    with pytest.raises(LengthMismatchError):
        pearson([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        pearson([1.0], [2.0])


def test_pearson_matches_scipy():
    rng = random.Random(77)
    for _ in range(25):
        n = rng.randrange(3, 40)
        xs = [rng.gauss(0, 3) for _ in range(n)]
        ys = [0.4 * x + rng.gauss(0, 1) for x in xs]
        expected = scipy.stats.pearsonr(xs, ys).statistic
        assert pearson(xs, ys) == pytest.approx(expected, abs=1e-9)


def test_ks_statistic_edges():
    assert ks_statistic([1, 2, 3], [1, 2, 3]) == 0.0
    assert ks_statistic([0, 1, 2], [10, 11]) == 1.0
    with pytest.raises(EmptyInputError):
        ks_statistic([], [1.0])


def test_ks_statistic_matches_scipy():
    rng = random.Random(41)
    for _ in range(25):
        xs = [rng.gauss(0, 1) for _ in range(rng.randrange(2, 30))]
        ys = [rng.gauss(0.5, 1.5) for _ in range(rng.randrange(2, 30))]
        expected = scipy.stats.ks_2samp(xs, ys).statistic
        assert ks_statistic(xs, ys) == pytest.approx(expected, abs=1e-12)


def test_ks_statistic_with_ties():
    xs = [1, 1, 2, 2, 3]
    ys = [1, 2, 2, 2, 4]
    expected = scipy.stats.ks_2samp(xs, ys).statistic
    assert ks_statistic(xs, ys) == pytest.approx(expected, abs=1e-12)
