"""Corpus-level alignment metrics: fertility, boundary P/R/F1, morpheme F1, MCR.

Boundary precision/recall are pooled over the corpus (sums in numerator and
denominator); morpheme F1 and MCR are per-word means.  Per-word-averaged
boundary scores are computed as well so both readings can be checked.  A
zero denominator yields 0 by convention unless configured to skip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .alignment import TokenEntry, TokenMismatchError, WordAlignment, build_alignment
from .corpus import FlaggedWord, GoldCorpus
from .errors import DataError

BOUNDARY_AVERAGING_MODES = ("pooled", "macro")
ZERO_DENOMINATOR_MODES = ("zero", "skip")


@dataclass(frozen=True)
class MetricOptions:
    """Metric conventions surfaced in report metadata.

    ``boundary_averaging`` selects which boundary scores fill the primary
    report columns (pooled is the default; both are always computed).
    ``zero_denominator`` controls per-word means over undefined ratios:
    count them as 0 or skip those words.  Pooled scores always use the
    0 convention on an all-zero corpus denominator.
    """

    boundary_averaging: str = "pooled"
    zero_denominator: str = "zero"

    def __post_init__(self):
        if self.boundary_averaging not in BOUNDARY_AVERAGING_MODES:
            raise DataError(f"unknown boundary averaging {self.boundary_averaging!r}")
        if self.zero_denominator not in ZERO_DENOMINATOR_MODES:
            raise DataError(f"unknown zero-denominator mode {self.zero_denominator!r}")


@dataclass(frozen=True)
class AlignmentReport:
    """Corpus-level metric bundle with counts."""

    fertility: float
    total_tokens: int
    boundary_precision: float
    boundary_recall: float
    boundary_f1: float
    morpheme_f1: float
    mcr: float
    word_count: int
    excluded_count: int
    boundary_precision_macro: float = 0.0
    boundary_recall_macro: float = 0.0
    boundary_f1_macro: float = 0.0
    options: MetricOptions = field(default=MetricOptions())


def _harmonic(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def fertility(alignments: Sequence[WordAlignment]) -> float:
    """Average number of tokens per word."""
    if not alignments:
        raise DataError("fertility undefined for an empty corpus")
    return sum(a.token_count for a in alignments) / len(alignments)


def boundary_prf(alignments: Iterable[WordAlignment]) -> tuple[float, float, float]:
    """Pooled boundary precision, recall, and their harmonic mean."""
    hits = 0
    gold_total = 0
    pred_total = 0
    for a in alignments:
        hits += len(a.gold_boundaries & a.pred_boundaries)
        gold_total += len(a.gold_boundaries)
        pred_total += len(a.pred_boundaries)
    precision = hits / pred_total if pred_total else 0.0
    recall = hits / gold_total if gold_total else 0.0
    return precision, recall, _harmonic(precision, recall)


def boundary_prf_macro(
    alignments: Sequence[WordAlignment], zero_denominator: str = "zero"
) -> tuple[float, float, float]:
    """Per-word-averaged boundary precision, recall, and F1."""
    if not alignments:
        raise DataError("boundary metrics undefined for an empty corpus")
    precisions = []
    recalls = []
    f1s = []
    for a in alignments:
        hits = len(a.gold_boundaries & a.pred_boundaries)
        has_pred = bool(a.pred_boundaries)
        has_gold = bool(a.gold_boundaries)
        p = hits / len(a.pred_boundaries) if has_pred else 0.0
        r = hits / len(a.gold_boundaries) if has_gold else 0.0
        if zero_denominator == "zero":
            precisions.append(p)
            recalls.append(r)
            f1s.append(_harmonic(p, r))
        else:
            if has_pred:
                precisions.append(p)
            if has_gold:
                recalls.append(r)
            if has_pred or has_gold:
                f1s.append(_harmonic(p, r))

    def mean(values: list[float]) -> float:
        return math.fsum(values) / len(values) if values else 0.0

    return mean(precisions), mean(recalls), mean(f1s)


def morpheme_f1(alignments: Sequence[WordAlignment]) -> float:
    """Mean per-word F1 over exact morpheme spans (both endpoints match)."""
    if not alignments:
        raise DataError("morpheme F1 undefined for an empty corpus")
    scores = []
    for a in alignments:
        matched = len(a.gold_spans & a.pred_spans)
        scores.append(2 * matched / (len(a.gold_spans) + len(a.pred_spans)))
    return math.fsum(scores) / len(scores)


def mcr(alignments: Sequence[WordAlignment]) -> float:
    """Mean fraction of gold morphemes contained intact in one token."""
    if not alignments:
        raise DataError("MCR undefined for an empty corpus")
    scores = []
    for a in alignments:
        covered = sum(
            1
            for (gs, ge) in a.gold_spans
            if any(ps <= gs and ge <= pe for (ps, pe) in a.pred_spans)
        )
        scores.append(covered / len(a.gold_spans))
    return math.fsum(scores) / len(scores)


def summarize(
    alignments: Sequence[WordAlignment],
    excluded_count: int = 0,
    options: MetricOptions = MetricOptions(),
) -> AlignmentReport:
    """Compute the full metric bundle from per-word alignments."""
    if not alignments:
        raise DataError("no evaluable words")
    total_tokens = sum(a.token_count for a in alignments)
    precision, recall, f1 = boundary_prf(alignments)
    p_macro, r_macro, f1_macro = boundary_prf_macro(
        alignments, options.zero_denominator
    )
    return AlignmentReport(
        fertility=total_tokens / len(alignments),
        total_tokens=total_tokens,
        boundary_precision=precision,
        boundary_recall=recall,
        boundary_f1=f1,
        morpheme_f1=morpheme_f1(alignments),
        mcr=mcr(alignments),
        word_count=len(alignments),
        excluded_count=excluded_count,
        boundary_precision_macro=p_macro,
        boundary_recall_macro=r_macro,
        boundary_f1_macro=f1_macro,
        options=options,
    )


def evaluate(
    gold: GoldCorpus,
    token_entries: Sequence[TokenEntry],
    options: MetricOptions = MetricOptions(),
) -> AlignmentReport:
    """Evaluate a tokenization file against a gold corpus.

    Pairs word-for-word in order.  Gold-flagged words and words whose tokens
    fail to reconstruct the surface are excluded from all metrics and
    counted in ``excluded_count``.
    """
    gold_words = list(gold.words())
    if len(gold_words) != len(token_entries):
        raise DataError(
            f"pairing mismatch: {len(gold_words)} gold words vs "
            f"{len(token_entries)} tokenized words"
        )
    alignments = []
    excluded = 0
    for word, entry in zip(gold_words, token_entries):
        if isinstance(word, FlaggedWord):
            excluded += 1
            continue
        if entry.surface != word.surface:
            raise DataError(
                f"tokens line {entry.line_no}: surface {entry.surface!r} "
                f"does not match gold {word.surface!r}"
            )
        try:
            alignments.append(build_alignment(word, entry.tokens))
        except TokenMismatchError:
            excluded += 1
    return summarize(alignments, excluded_count=excluded, options=options)


# ---------------------------------------------------------------------------
# Report formatting

REPORT_CSV_HEADER = (
    "dataset,system,fertility,tokens,morpheme_f1,"
    "boundary_p,boundary_r,boundary_f1,mcr,words,excluded"
)


def _pct(value: float) -> str:
    return f"{100 * value:.2f}"


def _boundary_columns(report: AlignmentReport) -> tuple[float, float, float]:
    if report.options.boundary_averaging == "macro":
        return (
            report.boundary_precision_macro,
            report.boundary_recall_macro,
            report.boundary_f1_macro,
        )
    return report.boundary_precision, report.boundary_recall, report.boundary_f1


def report_csv_row(report: AlignmentReport, dataset: str, system: str) -> str:
    """One CSV row, percentages with two decimals."""
    bp, br, bf1 = _boundary_columns(report)
    return ",".join(
        [
            dataset,
            system,
            f"{report.fertility:.2f}",
            str(report.total_tokens),
            _pct(report.morpheme_f1),
            _pct(bp),
            _pct(br),
            _pct(bf1),
            _pct(report.mcr),
            str(report.word_count),
            str(report.excluded_count),
        ]
    )


def report_metadata(report: AlignmentReport) -> str:
    """Conventions and supplementary values for the metadata comment."""
    return (
        f"boundary_offsets=characters "
        f"boundary_averaging={report.options.boundary_averaging} "
        f"zero_denominator={report.options.zero_denominator} "
        f"boundary_p_macro={_pct(report.boundary_precision_macro)} "
        f"boundary_r_macro={_pct(report.boundary_recall_macro)} "
        f"boundary_f1_macro={_pct(report.boundary_f1_macro)}"
    )


def format_report(report: AlignmentReport, dataset: str, system: str) -> str:
    """Human-readable single-system table."""
    bp, br, bf1 = _boundary_columns(report)
    headers = [
        "Data", "Model", "Fertility", "# Tokens", "F1",
        "Boundary P", "Boundary R", "Boundary F1", "MCR", "Words", "Excl",
    ]
    values = [
        dataset, system, f"{report.fertility:.2f}", f"{report.total_tokens:,}",
        _pct(report.morpheme_f1), _pct(bp), _pct(br), _pct(bf1),
        _pct(report.mcr), f"{report.word_count:,}", str(report.excluded_count),
    ]
    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    head = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    row = "  ".join(v.ljust(w) for v, w in zip(values, widths))
    return f"{head}\n{'-' * len(head)}\n{row}"


def parse_report_csv(lines: Iterable[str]) -> list[dict]:
    """Read rows written by ``report_csv_row`` (metadata comments skipped)."""
    rows = []
    header = REPORT_CSV_HEADER.split(",")
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == REPORT_CSV_HEADER:
            continue
        fields = line.split(",")
        if len(fields) != len(header):
            raise DataError(f"bad report row: {line!r}")
        row: dict = dict(zip(header, fields))
        for key in ("fertility", "morpheme_f1", "boundary_p", "boundary_r",
                    "boundary_f1", "mcr"):
            row[key] = float(row[key])
        for key in ("tokens", "words", "excluded"):
            row[key] = int(row[key])
        rows.append(row)
    return rows
