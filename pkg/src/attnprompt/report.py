"""Aggregate scored runs into comparison tables and stratified analyses.

Every report renders twice: as an aligned plain-text table for reading and
as JSON for plotting.  Comparison cells carry a leading marker, filled
triangle for a strict improvement over the baseline and open triangle for
a strict decline; equal values stay unmarked.  For lower-is-better columns
the polarity inverts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .alignment import AlignmentRecord
from .pope import PopeAnswer, PopeMetrics, Verdict, score

MARK_UP = "▲"  # ▲
MARK_DOWN = "▽"  # ▽

DEFAULT_IOU_THRESHOLD = 10.0
DEFAULT_CUTOFFS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
DEFAULT_SIZE_EDGES = (0.01, 0.05, 0.1, 0.25, 1.0)


@dataclass(frozen=True)
class ColumnSpec:
    key: str
    label: str
    higher_is_better: bool = True


POPE_COLUMNS = (
    ColumnSpec("accuracy", "Acc."),
    ColumnSpec("precision", "Prec."),
    ColumnSpec("recall", "Rec."),
    ColumnSpec("tnr", "TNR"),
    ColumnSpec("f1", "F1"),
)

ALIGNMENT_COLUMNS = (
    ColumnSpec("precision", "Prec."),
    ColumnSpec("recall", "Rec."),
    ColumnSpec("iou", "IoU"),
    ColumnSpec("mse", "MSE", higher_is_better=False),
)


@dataclass
class TableDoc:
    """A rendered table plus its machine-readable twin."""

    title: str
    header: list[str]
    rows: list[list[str]]
    data: dict
    notes: list[str] = field(default_factory=list)

    def render_text(self) -> str:
        widths = [len(h) for h in self.header]
        for row in self.rows:
            for i, cell in enumerate(row):
                widths[i] = max(widths[i], len(cell))
        lines = [self.title]
        lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(self.header)))
        lines.append("  ".join("-" * w for w in widths))
        for row in self.rows:
            lines.append(
                "  ".join(
                    cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                    for i, cell in enumerate(row)
                )
            )
        lines.extend(self.notes)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.2f}"


def marker(value: float | None, base: float | None, higher_is_better: bool) -> str:
    """Strict-inequality comparison marker against the baseline cell."""
    if value is None or base is None or value == base:
        return ""
    improved = value > base if higher_is_better else value < base
    return MARK_UP if improved else MARK_DOWN


def delta_table(
    baseline: Mapping[str, float | None],
    variants: Sequence[tuple[str, Mapping[str, float | None]]],
    columns: Sequence[ColumnSpec] = POPE_COLUMNS,
    baseline_name: str = "baseline",
    title: str = "Results vs. baseline",
) -> TableDoc:
    """Baseline row plus one marked row per variant."""
    for name, row in variants:
        missing = [c.key for c in columns if c.key not in row]
        if missing:
            raise ValueError(f"variant {name!r} lacks metrics {missing}")
    missing = [c.key for c in columns if c.key not in baseline]
    if missing:
        raise ValueError(f"baseline lacks metrics {missing}")

    header = ["run"] + [c.label for c in columns]
    rows = [[baseline_name] + [_fmt(baseline[c.key]) for c in columns]]
    variants_data = []
    for name, row in variants:
        cells = [name]
        marks = {}
        for c in columns:
            m = marker(row[c.key], baseline[c.key], c.higher_is_better)
            cells.append(m + _fmt(row[c.key]))
            marks[c.key] = m
        rows.append(cells)
        variants_data.append(
            {"name": name, "metrics": {c.key: row[c.key] for c in columns}, "markers": marks}
        )
    data = {
        "title": title,
        "baseline": {
            "name": baseline_name,
            "metrics": {c.key: baseline[c.key] for c in columns},
        },
        "variants": variants_data,
    }
    return TableDoc(title=title, header=header, rows=rows, data=data)


def pope_delta_table(
    baseline: PopeMetrics,
    variants: Sequence[tuple[str, PopeMetrics]],
    baseline_name: str = "w/o prompt",
    title: str = "Presence-question results",
) -> TableDoc:
    return delta_table(
        baseline.as_row(),
        [(name, pm.as_row()) for name, pm in variants],
        columns=POPE_COLUMNS,
        baseline_name=baseline_name,
        title=title,
    )


def answer_correct(ans: PopeAnswer) -> bool:
    """Yes on a present object or No on an absent one; Unsure never counts."""
    if ans.question.ground_truth == "present":
        return ans.verdict is Verdict.YES
    return ans.verdict is Verdict.NO


@dataclass(frozen=True)
class SegStrata:
    n_correct: int
    n_incorrect: int
    correct_share: float
    incorrect_share: float
    correct_metrics: PopeMetrics | None
    incorrect_metrics: PopeMetrics | None


def stratify_by_seg_case(
    seg_answers: list[PopeAnswer], variant_answers: list[PopeAnswer]
) -> SegStrata:
    """Split a variant run by whether the segmentation run got each question right."""
    seg_by_id = {a.question.question_id: a for a in seg_answers}
    var_ids = {a.question.question_id for a in variant_answers}
    if set(seg_by_id) != var_ids:
        only_seg = sorted(set(seg_by_id) - var_ids)[:3]
        only_var = sorted(var_ids - set(seg_by_id))[:3]
        raise ValueError(
            f"answer sets do not share question ids "
            f"(seg-only: {only_seg}, variant-only: {only_var})"
        )
    correct: list[PopeAnswer] = []
    incorrect: list[PopeAnswer] = []
    for ans in variant_answers:
        bucket = correct if answer_correct(seg_by_id[ans.question.question_id]) else incorrect
        bucket.append(ans)
    total = len(variant_answers)
    return SegStrata(
        n_correct=len(correct),
        n_incorrect=len(incorrect),
        correct_share=round(100.0 * len(correct) / total, 2),
        incorrect_share=round(100.0 * len(incorrect) / total, 2),
        correct_metrics=score(correct) if correct else None,
        incorrect_metrics=score(incorrect) if incorrect else None,
    )


@dataclass(frozen=True)
class IouSplit:
    threshold: float
    n_at_or_above: int
    n_below: int
    recall_at_or_above: float | None
    recall_below: float | None


def split_by_iou(
    records: list[AlignmentRecord],
    answers: list[PopeAnswer],
    threshold: float = DEFAULT_IOU_THRESHOLD,
) -> IouSplit:
    """Recall on present-object questions, split at an IoU threshold.

    Each present-object answer must have a matching alignment record keyed
    by (image_id, label).
    """
    iou_by_key = {(r.image_id, r.label): r.score.iou for r in records}
    above: list[PopeAnswer] = []
    below: list[PopeAnswer] = []
    for ans in answers:
        if ans.question.ground_truth != "present":
            continue
        key = (ans.question.image_id, ans.question.label)
        if key not in iou_by_key:
            raise ValueError(f"no alignment record for present object {key}")
        iou = iou_by_key[key]
        if iou is None:
            raise ValueError(f"alignment record {key} has undefined IoU")
        (above if iou >= threshold else below).append(ans)
    return IouSplit(
        threshold=threshold,
        n_at_or_above=len(above),
        n_below=len(below),
        recall_at_or_above=score(above).recall if above else None,
        recall_below=score(below).recall if below else None,
    )


def cutoff_sweep(
    baseline_answers: list[PopeAnswer],
    answers_by_cutoff: Mapping[float, list[PopeAnswer]],
    cutoffs: Sequence[float] = DEFAULT_CUTOFFS,
    baseline_name: str = "w/o prompt",
) -> TableDoc:
    """One metric row per cutoff value, marked against the baseline run."""
    missing = [t for t in cutoffs if t not in answers_by_cutoff]
    if missing:
        raise ValueError(f"missing answer sets for cutoffs {missing}")
    base = score(baseline_answers)
    variants = [
        (f"cutoff={theta:g}", score(answers_by_cutoff[theta])) for theta in cutoffs
    ]
    return pope_delta_table(
        base, variants, baseline_name=baseline_name, title="Minimum-cutoff sweep"
    )


@dataclass(frozen=True)
class SizeBin:
    low: float
    high: float
    count: int
    recall: float | None


def size_bins(
    fractions: Mapping[tuple[int | str, str], float],
    answers: list[PopeAnswer],
    edges: Sequence[float] = DEFAULT_SIZE_EDGES,
) -> list[SizeBin]:
    """Recall on present-object questions bucketed by object size fraction.

    Bins are (low, high] over the ascending edge list, starting from 0; a
    fraction exactly on an edge lands in the lower bin.
    """
    edges = tuple(edges)
    if not edges or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ValueError(f"edges must be strictly increasing, got {edges}")
    buckets: list[list[PopeAnswer]] = [[] for _ in edges]
    for ans in answers:
        if ans.question.ground_truth != "present":
            continue
        key = (ans.question.image_id, ans.question.label)
        if key not in fractions:
            raise ValueError(f"no size fraction for present object {key}")
        frac = fractions[key]
        idx = _bin_index(frac, edges)
        buckets[idx].append(ans)
    bins = []
    low = 0.0
    for i, high in enumerate(edges):
        group = buckets[i]
        bins.append(
            SizeBin(
                low=low,
                high=high,
                count=len(group),
                recall=score(group).recall if group else None,
            )
        )
        low = high
    return bins


def _bin_index(value: float, edges: tuple[float, ...]) -> int:
    for i, edge in enumerate(edges):
        if value <= edge:
            return i
    raise ValueError(f"size fraction {value} exceeds the last bin edge {edges[-1]}")


def size_bins_table(bins: list[SizeBin], edges: Sequence[float]) -> TableDoc:
    header = ["size bin", "n", "Rec."]
    rows = [
        [f"({b.low:g}, {b.high:g}]", str(b.count), _fmt(b.recall)] for b in bins
    ]
    data = {
        "title": "Recall by object size fraction",
        "edges": list(edges),
        "bins": [
            {"low": b.low, "high": b.high, "count": b.count, "recall": b.recall}
            for b in bins
        ],
    }
    return TableDoc(
        title="Recall by object size fraction",
        header=header,
        rows=rows,
        data=data,
        notes=[f"bin edges: {list(edges)}"],
    )


def seg_strata_table(
    strata: SegStrata,
    variant_name: str = "variant",
) -> TableDoc:
    header = ["group", "share", "n"] + [c.label for c in POPE_COLUMNS]
    rows = []
    groups = [
        ("correct", strata.correct_share, strata.n_correct, strata.correct_metrics),
        ("incorrect", strata.incorrect_share, strata.n_incorrect, strata.incorrect_metrics),
    ]
    for name, share, n, pm in groups:
        cells = [name, f"{share:.2f}%", str(n)]
        row = pm.as_row() if pm is not None else {c.key: None for c in POPE_COLUMNS}
        cells.extend(_fmt(row[c.key]) for c in POPE_COLUMNS)
        rows.append(cells)
    data = {
        "title": f"{variant_name} stratified by segmentation-run correctness",
        "groups": [
            {
                "name": name,
                "share": share,
                "count": n,
                "metrics": pm.as_row() if pm is not None else None,
            }
            for name, share, n, pm in groups
        ],
    }
    return TableDoc(
        title=f"{variant_name} stratified by segmentation-run correctness",
        header=header,
        rows=rows,
        data=data,
    )


def iou_split_table(split: IouSplit) -> TableDoc:
    header = ["IoU group", "n", "Rec."]
    rows = [
        [f">= {split.threshold:g}", str(split.n_at_or_above), _fmt(split.recall_at_or_above)],
        [f"< {split.threshold:g}", str(split.n_below), _fmt(split.recall_below)],
    ]
    data = {
        "title": "Recall split by attention-object IoU",
        "threshold": split.threshold,
        "at_or_above": {"count": split.n_at_or_above, "recall": split.recall_at_or_above},
        "below": {"count": split.n_below, "recall": split.recall_below},
    }
    return TableDoc(
        title="Recall split by attention-object IoU", header=header, rows=rows, data=data
    )
