"""Evaluation over dialogue logs and tagged corpora.

Covers the accepted-edit ratio per dialogue (executes over queries),
exact-boundary span F1 for the four tagging categories, turn-count
statistics with edit-cycle segmentation, sample Pearson correlation,
and a two-sample Kolmogorov-Smirnov statistic for comparing turn-count
distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .logs import DialogueLog
from .nlu import CATEGORIES, tag, tokenize
from .ontology import ActKind


class LengthMismatchError(ValueError):
    pass


class EmptyInputError(ValueError):
    pass


def vision_accuracy(log: DialogueLog) -> Optional[float]:
    """Accepted-and-executed fraction of resolver queries.

    None when the dialogue never queried; callers exclude those logs
    from aggregates rather than defaulting to 0 or 1.
    """
    if log.query_count == 0:
        return None
    return log.execute_count / log.query_count


def extract_spans(labels: Sequence[str]) -> list[tuple[str, int, int]]:
    """(category, start, end_exclusive) spans from one BIO sequence.

    A stray I- tag without a matching open span begins a new span, the
    usual lenient reading of malformed sequences.
    """
    spans: list[tuple[str, int, int]] = []
    cat: Optional[str] = None
    start = 0
    for i, label in enumerate(labels):
        if label.startswith("B-"):
            if cat is not None:
                spans.append((cat, start, i))
            cat = label[2:]
            start = i
        elif label.startswith("I-"):
            inner = label[2:]
            if cat == inner:
                continue
            if cat is not None:
                spans.append((cat, start, i))
            cat = inner
            start = i
        else:
            if cat is not None:
                spans.append((cat, start, i))
            cat = None
    if cat is not None:
        spans.append((cat, start, len(labels)))
    return spans


@dataclass(frozen=True)
class CategoryF1:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class F1Report:
    categories: dict
    mean: float

    def f1(self, category: str) -> float:
        return self.categories[category].f1


def _category_f1(tp: int, fp: int, fn: int) -> CategoryF1:
    if tp + fp + fn == 0:
        # nothing annotated and nothing predicted: vacuously perfect
        return CategoryF1(1.0, 1.0, 1.0, 0, 0, 0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    return CategoryF1(precision, recall, f1, tp, fp, fn)


def span_f1(gold: Sequence[Sequence[str]],
            pred: Sequence[Sequence[str]]) -> F1Report:
    """Micro-averaged per-category span F1, exact boundary matching.

    A predicted span is correct only if a gold span has the same
    category, start, and end.  The mean is the unweighted average of
    the four category F1 values.
    """
    if len(gold) != len(pred):
        raise LengthMismatchError(
            f"{len(gold)} gold sentences vs {len(pred)} predicted")
    tallies = {c: [0, 0, 0] for c in CATEGORIES}  # tp, fp, fn
    for g_labels, p_labels in zip(gold, pred):
        if len(g_labels) != len(p_labels):
            raise LengthMismatchError(
                "gold and predicted sentences differ in token count")
        g_spans = set(extract_spans(g_labels))
        p_spans = set(extract_spans(p_labels))
        for span in p_spans:
            if span[0] not in tallies:
                continue
            if span in g_spans:
                tallies[span[0]][0] += 1
            else:
                tallies[span[0]][1] += 1
        for span in g_spans - p_spans:
            if span[0] in tallies:
                tallies[span[0]][2] += 1
    categories = {c: _category_f1(*tallies[c]) for c in CATEGORIES}
    mean = sum(categories[c].f1 for c in CATEGORIES) / len(CATEGORIES)
    return F1Report(categories=categories, mean=mean)


def evaluate_corpus(records: Iterable[dict], tagger=None) -> F1Report:
    """Tag each corpus record's text and score against its gold labels."""
    tagger = tagger or tag
    golds = []
    preds = []
    for record in records:
        golds.append(list(record["labels"]))
        preds.append(tagger(tokenize(record["text"])))
    return span_f1(golds, preds)


@dataclass(frozen=True)
class TurnStats:
    n_dialogues: int
    mean_turns_per_dialogue: float
    mean_user_turns_per_dialogue: float
    mean_turns_per_edit: Optional[float]
    edits_per_dialogue: tuple
    first_edit_turns: tuple
    second_edit_turns: tuple


def _edit_cycle_lengths(log: DialogueLog) -> list[int]:
    """Record counts per completed edit, both speakers included.

    A cycle runs from the record after the previous execute (or the
    dialogue start) through the record that carries the Execute act.
    """
    lengths = []
    cycle_start = 0
    for i, record in enumerate(log.records):
        if any(a.kind is ActKind.EXECUTE for a in record.acts):
            lengths.append(i - cycle_start + 1)
            cycle_start = i + 1
    return lengths


def turn_stats(logs: Sequence[DialogueLog]) -> TurnStats:
    if not logs:
        raise EmptyInputError("no dialogue logs given")
    turns = [len(log.records) for log in logs]
    user_turns = [sum(1 for r in log.records if r.speaker == "user")
                  for log in logs]
    per_edit: list[int] = []
    edits: list[int] = []
    first_edit: list[int] = []
    second_edit: list[int] = []
    for log in logs:
        lengths = _edit_cycle_lengths(log)
        edits.append(len(lengths))
        per_edit.extend(lengths)
        if len(lengths) >= 1:
            first_edit.append(lengths[0])
        if len(lengths) >= 2:
            second_edit.append(lengths[1])
    return TurnStats(
        n_dialogues=len(logs),
        mean_turns_per_dialogue=sum(turns) / len(logs),
        mean_user_turns_per_dialogue=sum(user_turns) / len(logs),
        mean_turns_per_edit=(sum(per_edit) / len(per_edit)
                             if per_edit else None),
        edits_per_dialogue=tuple(edits),
        first_edit_turns=tuple(first_edit),
        second_edit_turns=tuple(second_edit),
    )


def pearson(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Sample Pearson r; None when either side has zero variance."""
    if len(xs) != len(ys):
        raise LengthMismatchError(f"{len(xs)} xs vs {len(ys)} ys")
    n = len(xs)
    if n < 2:
        raise ValueError("need at least two points")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        return None
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)


def ks_statistic(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Two-sample Kolmogorov-Smirnov statistic, no p-value."""
    if not xs or not ys:
        raise EmptyInputError("both samples must be non-empty")
    ax = sorted(xs)
    ay = sorted(ys)
    nx, ny = len(ax), len(ay)
    i = j = 0
    d = 0.0
    while i < nx and j < ny:
        if ax[i] <= ay[j]:
            x = ax[i]
        else:
            x = ay[j]
        while i < nx and ax[i] <= x:
            i += 1
        while j < ny and ay[j] <= x:
            j += 1
        d = max(d, abs(i / nx - j / ny))
    return d


def dialogue_report(logs: Sequence[DialogueLog]) -> dict:
    """Aggregate numbers for a batch of logs, JSON-friendly."""
    stats = turn_stats(logs)
    accuracies = []
    undefined = 0
    for log in logs:
        va = vision_accuracy(log)
        if va is None:
            undefined += 1
        else:
            accuracies.append(va)
    return {
        "n_dialogues": stats.n_dialogues,
        "mean_turns_per_dialogue": stats.mean_turns_per_dialogue,
        "mean_user_turns_per_dialogue": stats.mean_user_turns_per_dialogue,
        "mean_turns_per_edit": stats.mean_turns_per_edit,
        "edits_per_dialogue": list(stats.edits_per_dialogue),
        "mean_vision_accuracy": (sum(accuracies) / len(accuracies)
                                 if accuracies else None),
        "vision_accuracy_defined": len(accuracies),
        "vision_accuracy_undefined": undefined,
        "first_edit_turns": list(stats.first_edit_turns),
        "second_edit_turns": list(stats.second_edit_turns),
    }
