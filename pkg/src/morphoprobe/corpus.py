"""Arabic corpus ingestion, normalization, and cleaning.

Normalization is deliberately minimal: only diacritics (harakat, shadda,
sukun, tanwin, superscript alef) and the tatweel stretch character are
removed.  Hamza forms and alef variants are lexically contrastive and are
left untouched.

Gold segmentation file format (UTF-8):
    - one word per line: ``surface<TAB>m1+m2+...+mk``
    - a blank line ends a sentence
    - lines beginning with ``#`` are comments
Words whose morpheme concatenation cannot be reconciled with the surface
are flagged and excluded from metrics, never silently repaired.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .alignment import ReconcileError, reconcile_gold
from .errors import DataError, GoldParseError

# Combining marks U+064B-U+0652 (tanwin, fatha, damma, kasra, shadda, sukun),
# superscript alef U+0670, and tatweel U+0640.  Quranic annotation marks
# beyond this range are out of scope.
DIACRITICS = frozenset(chr(c) for c in range(0x064B, 0x0653)) | {"ٰ", "ـ"}

_DIACRITIC_TABLE = {ord(c): None for c in DIACRITICS}

# Standard Arabic letter inventory U+0621-U+063A and U+0641-U+064A: the 28
# base letters plus hamza forms, ta marbuta, and alef maqsura.  The rare
# U+063B-U+063F additions are excluded.
ARABIC_LETTERS = frozenset(chr(c) for c in range(0x0621, 0x063B)) | frozenset(
    chr(c) for c in range(0x0641, 0x064B)
)


def strip_diacritics(text: str) -> str:
    """Remove harakat, shadda, sukun, tanwin, superscript alef, and tatweel.

    Idempotent; every non-diacritic character is preserved in order.
    """
    return text.translate(_DIACRITIC_TABLE)


def is_arabic_word(word: str) -> bool:
    """True if ``word`` is non-empty and consists only of Arabic letters."""
    return bool(word) and all(c in ARABIC_LETTERS for c in word)


def clean_words(words: Iterable[str]) -> list[str]:
    """Strip diacritics and keep only all-Arabic-letter words.

    Punctuation-only, numeric, and Latin-containing tokens are dropped;
    mixed tokens are dropped wholesale rather than trimmed.
    """
    out = []
    for word in words:
        stripped = strip_diacritics(word)
        if is_arabic_word(stripped):
            out.append(stripped)
    return out


@dataclass(frozen=True)
class GoldWord:
    """A surface word with its gold morpheme segmentation.

    ``spans`` are contiguous, non-overlapping character offsets covering the
    surface exactly; ``boundaries`` are the span ends except the last.
    """

    surface: str
    morphemes: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]

    @property
    def boundaries(self) -> frozenset[int]:
        return frozenset(end for _, end in self.spans[:-1])

    def span_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.spans)


@dataclass(frozen=True)
class FlaggedWord:
    """A gold word whose segmentation could not be reconciled."""

    surface: str
    morphemes: tuple[str, ...]
    reason: str
    line_no: int


def make_gold_word(surface: str, morphemes: Sequence[str]) -> GoldWord:
    """Build a GoldWord, reconciling morphemes against the surface.

    Raises ReconcileError when the segmentation cannot be aligned.
    """
    spans = reconcile_gold(surface, morphemes)
    return GoldWord(surface=surface, morphemes=tuple(morphemes), spans=spans)


@dataclass
class GoldCorpus:
    """Parsed gold file: sentences of GoldWord with flagged words in place.

    Flagged words stay in position so tokenization files can be paired
    line-for-line; metrics skip them and count them as excluded.
    """

    sentences: list[list[GoldWord | FlaggedWord]]

    def words(self) -> Iterator[GoldWord | FlaggedWord]:
        for sentence in self.sentences:
            yield from sentence

    @property
    def flagged(self) -> list[FlaggedWord]:
        return [w for w in self.words() if isinstance(w, FlaggedWord)]

    @property
    def word_count(self) -> int:
        return sum(len(s) for s in self.sentences)


def parse_gold(lines: Iterable[str]) -> GoldCorpus:
    """Parse a gold segmentation stream into a GoldCorpus.

    Malformed lines (missing separator) raise GoldParseError with the line
    number; irreconcilable words are flagged, not fatal.
    """
    sentences: list[list[GoldWord | FlaggedWord]] = []
    current: list[GoldWord | FlaggedWord] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if line.startswith("#"):
            continue
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise GoldParseError(
                f"expected 'surface<TAB>m1+m2+...', got {line!r}", line_no
            )
        surface, morph_field = fields
        morphemes = tuple(morph_field.split("+"))
        try:
            current.append(make_gold_word(surface, morphemes))
        except ReconcileError as exc:
            current.append(
                FlaggedWord(
                    surface=surface,
                    morphemes=morphemes,
                    reason=str(exc),
                    line_no=line_no,
                )
            )
    if current:
        sentences.append(current)
    return GoldCorpus(sentences=sentences)


def load_gold(path) -> GoldCorpus:
    with open(path, encoding="utf-8") as f:
        return parse_gold(f)


def write_gold(corpus: GoldCorpus) -> str:
    """Serialize a GoldCorpus back to the gold file format.

    Round-trips bit-exactly for well-formed files (no comments, sentences
    separated by single blank lines).
    """
    blocks = []
    for sentence in corpus.sentences:
        blocks.append(
            "\n".join(f"{w.surface}\t{'+'.join(w.morphemes)}" for w in sentence)
        )
    return "\n\n".join(blocks) + "\n"


@dataclass(frozen=True)
class CorpusStats:
    sentence_count: int
    word_count: int
    token_count: int
    avg_tokens_per_sentence: float


def corpus_stats(
    sentences: Sequence[Sequence[str]], tokens_per_word: Sequence[Sequence[int]]
) -> CorpusStats:
    """Count sentences, words, and tokens for a tokenized corpus.

    ``tokens_per_word`` mirrors the sentence structure and gives the number
    of tokens each word was split into.  Empty corpus yields zeros with
    avg 0.0 by convention.
    """
    if len(sentences) != len(tokens_per_word) or any(
        len(s) != len(t) for s, t in zip(sentences, tokens_per_word)
    ):
        raise DataError("tokenization does not cover the corpus word-for-word")
    sentence_count = len(sentences)
    word_count = sum(len(s) for s in sentences)
    token_count = sum(sum(counts) for counts in tokens_per_word)
    avg = token_count / sentence_count if sentence_count else 0.0
    return CorpusStats(
        sentence_count=sentence_count,
        word_count=word_count,
        token_count=token_count,
        avg_tokens_per_sentence=avg,
    )
