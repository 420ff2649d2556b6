"""Shared test utilities: random corpora, a brute-force metrics oracle, and
a canonical real-root dataset fixture."""

import math
import random

from morphoprobe.datagen import DatasetInstance, STRONG_CONSONANTS
from morphoprobe.templatic import (
    DEFAULT_PATTERN_SOURCES,
    Root,
    RootCategory,
    apply_pattern,
    attach_affixes,
    compile_pattern,
)

ALPHABET = STRONG_CONSONANTS


def random_word(rng: random.Random, min_len: int = 1, max_len: int = 10) -> str:
    return "".join(
        rng.choice(ALPHABET) for _ in range(rng.randint(min_len, max_len))
    )


def random_split(rng: random.Random, word: str, p: float = 0.4) -> list[str]:
    """Split a word at each interior offset with probability p."""
    cuts = [i for i in range(1, len(word)) if rng.random() < p]
    pieces = []
    prev = 0
    for cut in cuts + [len(word)]:
        pieces.append(word[prev:cut])
        prev = cut
    return pieces


def random_triples(rng: random.Random, n: int) -> list[tuple[str, list[str], list[str]]]:
    """(surface, gold morphemes, predicted tokens) with exact concatenation."""
    triples = []
    for _ in range(n):
        word = random_word(rng, 1, 12)
        triples.append((word, random_split(rng, word), random_split(rng, word)))
    return triples


def brute_force_metrics(triples):
    """Independent metric computation straight from the raw strings.

    Everything is rebuilt with explicit loops over lists: spans by walking
    each piece, boundaries by collecting non-final span ends, intersections
    by membership tests.  No pooling shortcuts, no shared code with the
    package's metric path.
    """
    word_count = 0
    token_total = 0
    hit_sum = 0
    gold_boundary_sum = 0
    pred_boundary_sum = 0
    mf1_scores = []
    mcr_scores = []
    for surface, morphemes, tokens in triples:
        word_count += 1
        token_total += len(tokens)

        def spans_of(pieces):
            spans = []
            position = 0
            for piece in pieces:
                spans.append((position, position + len(piece)))
                position += len(piece)
            return spans

        gold_spans = spans_of(morphemes)
        pred_spans = spans_of(tokens)
        gold_bounds = [end for (_, end) in gold_spans if end != len(surface)]
        pred_bounds = [end for (_, end) in pred_spans if end != len(surface)]
        hits = 0
        for boundary in gold_bounds:
            if boundary in pred_bounds:
                hits += 1
        hit_sum += hits
        gold_boundary_sum += len(gold_bounds)
        pred_boundary_sum += len(pred_bounds)

        span_matches = 0
        for gold_span in gold_spans:
            if gold_span in pred_spans:
                span_matches += 1
        mf1_scores.append(2 * span_matches / (len(gold_spans) + len(pred_spans)))

        covered = 0
        for (gs, ge) in gold_spans:
            contained = False
            for (ps, pe) in pred_spans:
                if ps <= gs and ge <= pe:
                    contained = True
            if contained:
                covered += 1
        mcr_scores.append(covered / len(gold_spans))

    precision = hit_sum / pred_boundary_sum if pred_boundary_sum else 0.0
    recall = hit_sum / gold_boundary_sum if gold_boundary_sum else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return {
        "fertility": token_total / word_count,
        "boundary_precision": precision,
        "boundary_recall": recall,
        "boundary_f1": f1,
        "morpheme_f1": math.fsum(mf1_scores) / word_count,
        "mcr": math.fsum(mcr_scores) / word_count,
    }


def gold_file_text(triples) -> str:
    """Gold file for (surface, morphemes, _) triples, 20 words per sentence."""
    lines = []
    for index, (surface, morphemes, _) in enumerate(triples):
        lines.append(f"{surface}\t{'+'.join(morphemes)}")
        if index % 20 == 19:
            lines.append("")
    return "\n".join(lines) + "\n"


US = "\x1f"


def tokens_file_text(triples, predicted: bool = True) -> str:
    """Tokens file paired with gold_file_text (gold side when predicted=False)."""
    lines = []
    for surface, morphemes, tokens in triples:
        pieces = tokens if predicted else morphemes
        lines.append(surface + "\t" + US.join(pieces))
    return "\n".join(lines) + "\n"


# Ten fixed roots for the canonical real fixture (strong consonants only).
FIXTURE_ROOTS = ("كتب", "درس", "ثمر", "جبل", "قلم", "نظر", "شغل", "حمل", "رسم", "طلب")

AFFIX_VARIANTS = (("ال", ""), ("", "هم"))


def build_real_fixture() -> list[DatasetInstance]:
    """13 patterns x 10 roots = 130 pairs, each in 3 surface forms (390 rows)."""
    instances = []
    for root_index, root_text in enumerate(FIXTURE_ROOTS):
        category = (
            RootCategory.REAL_HIGH_FREQUENCY
            if root_index % 2 == 0
            else RootCategory.REAL_LOW_FREQUENCY
        )
        root = Root.from_string(root_text, category)
        for source in DEFAULT_PATTERN_SOURCES:
            pattern = compile_pattern(source)
            base = apply_pattern(root, pattern)
            forms = [("", "")] + list(AFFIX_VARIANTS)
            for prefix, suffix in forms:
                instances.append(
                    DatasetInstance(
                        root=root_text,
                        template=pattern.source,
                        base_form=base,
                        prefix=prefix,
                        suffix=suffix,
                        full_form=attach_affixes(base, prefix, suffix),
                        has_affix=bool(prefix or suffix),
                        root_category=category,
                    )
                )
    return instances
