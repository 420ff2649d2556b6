"""Character-offset alignment between gold segmentations and tokenizer output.

Boundaries are computed in character offsets, not bytes: gold morphemes are
character sequences, so a byte-level split inside one character can never
match a gold boundary.  Such splits are dropped from the boundary set (the
partial pieces merge into one predicted span) but still count toward the
word's token count, which keeps fertility honest for byte-level tokenizers.

Tokenization file format (UTF-8): one word per line as
``surface<TAB>tok1<US>tok2<US>...`` with ``<US>`` = U+001F; blank lines and
``#`` comments mirror the gold format, and word lines must pair one-for-one
with the gold file.  Tokens are the *decoded* token texts: adapters strip
whitespace sentinels and decode byte escapes before the file is written
(raw byte fragments survive via surrogate escapes).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import DataError

if TYPE_CHECKING:
    from .corpus import GoldWord

UNIT_SEPARATOR = "\x1f"


class ReconcileError(Exception):
    """Gold morphemes could not be aligned to the surface."""


class TokenMismatchError(Exception):
    """Tokens do not reconstruct the surface; the word is excluded."""


def reconcile_gold(
    surface: str, morphemes: Sequence[str]
) -> tuple[tuple[int, int], ...]:
    """Recover morpheme character spans for ``surface``.

    If the morphemes concatenate to the surface exactly, spans are the
    cumulative-length cuts.  Otherwise a greedy left-to-right alignment is
    attempted in which morpheme characters may be absent from the surface
    (orthographic alternation), but each morpheme must anchor at least one
    surface character and no surface character may be left unexplained.

    Raises ReconcileError naming the failure (character mismatch, length
    mismatch, empty morpheme).
    """
    if not morphemes:
        raise ReconcileError("no morphemes")
    if any(m == "" for m in morphemes):
        raise ReconcileError("empty morpheme")
    if "".join(morphemes) == surface:
        spans = []
        pos = 0
        for m in morphemes:
            spans.append((pos, pos + len(m)))
            pos += len(m)
        return tuple(spans)
    spans = []
    i = 0
    for m in morphemes:
        start = i
        matched = 0
        for ch in m:
            if i < len(surface) and surface[i] == ch:
                i += 1
                matched += 1
        if matched == 0:
            raise ReconcileError(
                f"character mismatch: no character of {m!r} found at offset {start}"
            )
        spans.append((start, i))
    if i != len(surface):
        raise ReconcileError(
            f"length mismatch: {len(surface) - i} trailing surface character(s) unexplained"
        )
    return tuple(spans)


def align_tokens(
    surface: str, tokens: Sequence[str | bytes]
) -> tuple[frozenset[int], frozenset[tuple[int, int]], int]:
    """Convert a token sequence into boundaries, spans, and a token count.

    Returns ``(pred_boundaries, pred_spans, token_count)``.  Boundaries are
    the cumulative character offsets between consecutive tokens; boundaries
    falling strictly inside one character are dropped (the pieces merge into
    one span) while both pieces still count toward ``token_count``.

    Raises TokenMismatchError when the tokens do not concatenate to the
    surface at the byte level.
    """
    if not surface:
        raise DataError("empty surface")
    if not tokens:
        raise TokenMismatchError("no tokens")
    surface_bytes = surface.encode("utf-8")
    token_bytes = [
        t if isinstance(t, bytes) else t.encode("utf-8", "surrogateescape")
        for t in tokens
    ]
    if b"".join(token_bytes) != surface_bytes:
        raise TokenMismatchError(
            f"tokens do not reconstruct surface {surface!r}"
        )
    # byte offset -> character index, defined only at character starts
    char_at_byte = {}
    offset = 0
    for idx, ch in enumerate(surface):
        char_at_byte[offset] = idx
        offset += len(ch.encode("utf-8"))
    cuts: list[int] = []
    offset = 0
    for tb in token_bytes[:-1]:
        offset += len(tb)
        char_index = char_at_byte.get(offset)
        if char_index is None:  # mid-character byte split
            continue
        if 0 < char_index < len(surface) and (not cuts or cuts[-1] != char_index):
            cuts.append(char_index)
    spans = []
    prev = 0
    for cut in cuts:
        spans.append((prev, cut))
        prev = cut
    spans.append((prev, len(surface)))
    return frozenset(cuts), frozenset(spans), len(tokens)


@dataclass(frozen=True)
class WordAlignment:
    """Gold and predicted segmentations of one word, offset-comparable."""

    surface: str
    gold_boundaries: frozenset[int]
    gold_spans: frozenset[tuple[int, int]]
    pred_boundaries: frozenset[int]
    pred_spans: frozenset[tuple[int, int]]
    token_count: int


def build_alignment(
    gold: "GoldWord",
    tokens: Sequence[str | bytes],
    surface: str | None = None,
) -> WordAlignment:
    """Pair a gold word with a token sequence.

    ``surface``, when given, is the surface recorded alongside the tokens
    (e.g. from a tokenization file) and must equal the gold surface.
    """
    if surface is not None and surface != gold.surface:
        raise DataError(
            f"surface mismatch: gold {gold.surface!r} vs tokens {surface!r}"
        )
    pred_boundaries, pred_spans, token_count = align_tokens(gold.surface, tokens)
    return WordAlignment(
        surface=gold.surface,
        gold_boundaries=gold.boundaries,
        gold_spans=gold.span_set(),
        pred_boundaries=pred_boundaries,
        pred_spans=pred_spans,
        token_count=token_count,
    )


@dataclass(frozen=True)
class TokenEntry:
    """One line of a tokenization file."""

    line_no: int
    surface: str
    tokens: tuple[str, ...]


def parse_tokens(lines: Iterable[str]) -> list[TokenEntry]:
    """Parse a tokenization stream (see module docstring for the format)."""
    entries = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if line.startswith("#") or not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise DataError(
                f"line {line_no}: expected 'surface<TAB>tok1<US>tok2...', got {line!r}"
            )
        surface, token_field = fields
        tokens = tuple(token_field.split(UNIT_SEPARATOR))
        if not surface:
            raise DataError(f"line {line_no}: empty surface")
        if any(t == "" for t in tokens):
            raise DataError(f"line {line_no}: empty token")
        entries.append(TokenEntry(line_no=line_no, surface=surface, tokens=tokens))
    return entries


def load_tokens(path) -> list[TokenEntry]:
    # surrogateescape keeps raw byte fragments from byte-level tokenizers
    with open(path, encoding="utf-8", errors="surrogateescape") as f:
        return parse_tokens(f)


def write_tokens(entries: Iterable[TokenEntry | tuple[str, Sequence[str]]]) -> str:
    """Serialize (surface, tokens) pairs to the tokenization file format."""
    lines = []
    for entry in entries:
        if isinstance(entry, TokenEntry):
            surface, tokens = entry.surface, entry.tokens
        else:
            surface, tokens = entry
        lines.append(f"{surface}\t{UNIT_SEPARATOR.join(tokens)}")
    return "\n".join(lines) + "\n"
