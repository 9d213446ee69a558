"""Presence-polling questions, answer classification, and scoring.

For each image the generator asks one question per present label and a
fixed number of questions about labels sampled from the rest of the
vocabulary.  Free-text answers are reduced to Yes/No/Unsure from their
leading token, and the scorer folds verdicts into confusion-matrix
metrics.
"""

from __future__ import annotations

import enum
import json
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .coco import COCO_LABELS
from .rng import SplitMix64

PROMPT_SUFFIX = "Answer Yes, No, or Not Sure"
PROMPT_TEMPLATE = "Is there a {label} in the image? " + PROMPT_SUFFIX

DEFAULT_K_ABSENT = 3


class Verdict(enum.Enum):
    YES = "Yes"
    NO = "No"
    UNSURE = "Unsure"


@dataclass(frozen=True)
class PopeQuestion:
    image_id: int | str
    label: str
    ground_truth: str  # "present" | "absent"
    prompt_text: str

    def __post_init__(self) -> None:
        if self.ground_truth not in ("present", "absent"):
            raise ValueError(f"bad ground truth {self.ground_truth!r}")
        if not self.prompt_text.endswith(PROMPT_SUFFIX):
            raise ValueError(f"prompt must end with {PROMPT_SUFFIX!r}")

    @property
    def question_id(self) -> str:
        return f"{self.image_id}:{self.label}"


@dataclass(frozen=True)
class PopeAnswer:
    question: PopeQuestion
    raw_text: str
    verdict: Verdict

    @classmethod
    def from_text(cls, question: PopeQuestion, raw_text: str) -> "PopeAnswer":
        return cls(question=question, raw_text=raw_text, verdict=classify_answer(raw_text))


@dataclass(frozen=True)
class PopeMetrics:
    """Confusion-matrix metrics as percentages rounded to 2 decimals.

    Metrics whose denominator is zero are ``None`` and render as "-".
    Unsure answers are never credited: they enter accuracy's denominator and
    the recall/TNR denominators on their ground-truth side, but are kept out
    of precision entirely.
    """

    accuracy: float | None
    precision: float | None
    recall: float | None
    tnr: float | None
    f1: float | None
    unsure_rate: float | None
    tp: int
    fp: int
    tn: int
    fn: int
    unsure_pos: int
    unsure_neg: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn + self.unsure_pos + self.unsure_neg

    def as_row(self) -> dict[str, float | None]:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "tnr": self.tnr,
            "f1": self.f1,
        }

    def to_dict(self) -> dict:
        return {
            **self.as_row(),
            "unsure_rate": self.unsure_rate,
            "counts": {
                "tp": self.tp,
                "fp": self.fp,
                "tn": self.tn,
                "fn": self.fn,
                "unsure_pos": self.unsure_pos,
                "unsure_neg": self.unsure_neg,
            },
        }


def generate_questions(
    present_labels: Iterable[str],
    image_id: int | str,
    seed: int,
    vocabulary: tuple[str, ...] = COCO_LABELS,
    k_absent: int = DEFAULT_K_ABSENT,
) -> list[PopeQuestion]:
    """One present-question per label plus ``k_absent`` sampled absentees.

    Absent labels are drawn without replacement from the vocabulary minus
    the present set, using the documented portable generator keyed by
    (seed, image_id), so runs are reproducible everywhere.
    """
    present = set(present_labels)
    unknown = present - set(vocabulary)
    if unknown:
        raise ValueError(f"labels not in vocabulary: {sorted(unknown)}")
    candidates = [label for label in vocabulary if label not in present]
    if len(candidates) < k_absent:
        raise ValueError(
            f"need {k_absent} absent candidates, vocabulary leaves {len(candidates)}"
        )
    rng = SplitMix64(seed, key=image_id)
    absent = rng.sample(candidates, k_absent)

    questions = [
        PopeQuestion(
            image_id=image_id,
            label=label,
            ground_truth="present",
            prompt_text=PROMPT_TEMPLATE.format(label=label),
        )
        for label in vocabulary
        if label in present
    ]
    questions.extend(
        PopeQuestion(
            image_id=image_id,
            label=label,
            ground_truth="absent",
            prompt_text=PROMPT_TEMPLATE.format(label=label),
        )
        for label in absent
    )
    return questions


def classify_answer(raw_text: str) -> Verdict:
    """Verdict from the leading whitespace-delimited token.

    The token is lowercased and stripped of punctuation; anything that is
    not "yes" or "no" counts as Unsure.
    """
    tokens = raw_text.split()
    if not tokens:
        return Verdict.UNSURE
    head = tokens[0].strip(string.punctuation).lower()
    if head == "yes":
        return Verdict.YES
    if head == "no":
        return Verdict.NO
    return Verdict.UNSURE


def _pct(numerator: float, denominator: float) -> float | None:
    if denominator <= 0:
        return None
    return round(100.0 * numerator / denominator, 2)


def score(answers: list[PopeAnswer]) -> PopeMetrics:
    """Fold answers into confusion counts and percentage metrics."""
    if not answers:
        raise ValueError("cannot score an empty answer list")
    tp = fp = tn = fn = unsure_pos = unsure_neg = 0
    for ans in answers:
        present = ans.question.ground_truth == "present"
        if ans.verdict is Verdict.YES:
            tp += present
            fp += not present
        elif ans.verdict is Verdict.NO:
            fn += present
            tn += not present
        else:
            unsure_pos += present
            unsure_neg += not present

    total = tp + fp + tn + fn + unsure_pos + unsure_neg
    precision_raw = tp / (tp + fp) if tp + fp > 0 else None
    recall_raw = tp / (tp + fn + unsure_pos) if tp + fn + unsure_pos > 0 else None
    if precision_raw is not None and recall_raw is not None and precision_raw + recall_raw > 0:
        f1 = round(100.0 * 2 * precision_raw * recall_raw / (precision_raw + recall_raw), 2)
    else:
        f1 = None
    return PopeMetrics(
        accuracy=_pct(tp + tn, total),
        precision=_pct(tp, tp + fp),
        recall=_pct(tp, tp + fn + unsure_pos),
        tnr=_pct(tn, tn + fp + unsure_neg),
        f1=f1,
        unsure_rate=_pct(unsure_pos + unsure_neg, total),
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        unsure_pos=unsure_pos,
        unsure_neg=unsure_neg,
    )


# --- JSON-lines serialization -------------------------------------------

def question_record(q: PopeQuestion) -> dict:
    return {
        "question_id": q.question_id,
        "image_id": q.image_id,
        "label": q.label,
        "ground_truth": q.ground_truth,
        "prompt": q.prompt_text,
    }


def question_from_record(rec: dict) -> PopeQuestion:
    return PopeQuestion(
        image_id=rec["image_id"],
        label=rec["label"],
        ground_truth=rec["ground_truth"],
        prompt_text=rec["prompt"],
    )


def write_questions(questions: list[PopeQuestion], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in questions:
            fh.write(json.dumps(question_record(q), sort_keys=True) + "\n")


def read_questions(path: str | Path) -> list[PopeQuestion]:
    questions = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                questions.append(question_from_record(json.loads(line)))
    return questions


def write_answers(answers: list[PopeAnswer], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ans in answers:
            rec = {"question_id": ans.question.question_id, "raw_text": ans.raw_text}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_answers(path: str | Path, questions: list[PopeQuestion]) -> list[PopeAnswer]:
    """Join raw answer records back onto their questions by question id."""
    by_id = {q.question_id: q for q in questions}
    answers = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            qid = rec["question_id"]
            if qid not in by_id:
                raise ValueError(f"answer references unknown question {qid!r}")
            answers.append(PopeAnswer.from_text(by_id[qid], rec["raw_text"]))
    return answers
