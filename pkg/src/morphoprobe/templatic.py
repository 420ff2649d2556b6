"""Non-concatenative word formation: derivational patterns and affixation.

A pattern is written with the slot letters ف/ع/ل standing for root radicals
1/2/3 (a repeated ل marks slot 4); every other character is copied
literally.  Patterns are compiled from undiacritized citation forms, so
patterns distinguished only by short vowels collapse.  No phonological
repair is applied: interleaving is plain character substitution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import ARABIC_LETTERS, strip_diacritics
from .errors import DataError, PatternError

SLOT_LETTERS = {"ف": 1, "ع": 2, "ل": 3}  # ف ع ل

REPEAT3 = "repeat3"  # slot 4 repeats radical 3 for trilateral roots
REQUIRE4 = "require4"  # slot 4 demands a quadriliteral root
SLOT4_POLICIES = (REPEAT3, REQUIRE4)


class RootCategory(enum.Enum):
    REAL_HIGH_FREQUENCY = "high_frequency"
    REAL_LOW_FREQUENCY = "low_frequency"
    NONCE = "nonce"


@dataclass(frozen=True)
class Root:
    """An ordered tuple of 3 or 4 consonantal radicals."""

    radicals: tuple[str, ...]
    category: RootCategory = RootCategory.NONCE

    def __post_init__(self):
        if len(self.radicals) not in (3, 4):
            raise DataError(f"root must have 3 or 4 radicals, got {self.radicals!r}")
        for radical in self.radicals:
            if len(radical) != 1 or radical not in ARABIC_LETTERS:
                raise DataError(f"radical {radical!r} is not a single Arabic letter")

    @property
    def text(self) -> str:
        return "".join(self.radicals)

    @classmethod
    def from_string(cls, text: str, category: RootCategory = RootCategory.NONCE) -> "Root":
        return cls(radicals=tuple(text), category=category)


@dataclass(frozen=True)
class CompiledPattern:
    """A derivational pattern split into literal runs and radical slots.

    ``segments`` holds ``str`` literals and ``int`` slot indices; replacing
    slot i with its slot letter reproduces ``source``.
    """

    source: str
    segments: tuple[str | int, ...]
    slot4_policy: str = REPEAT3

    @property
    def max_slot(self) -> int:
        return max(seg for seg in self.segments if isinstance(seg, int))


def compile_pattern(text: str, slot4_policy: str = REPEAT3) -> CompiledPattern:
    """Compile a pattern's citation form (diacritics are stripped first).

    ف maps to slot 1, ع to slot 2, the first ل to slot 3, any subsequent ل
    to slot 4.  Slot indices must first occur in increasing order.
    """
    if slot4_policy not in SLOT4_POLICIES:
        raise PatternError(f"unknown slot-4 policy {slot4_policy!r}")
    source = strip_diacritics(text)
    segments: list[str | int] = []
    seen: list[int] = []
    lam_used = False
    for ch in source:
        slot = SLOT_LETTERS.get(ch)
        if slot == 3:
            slot = 4 if lam_used else 3
            lam_used = True
        if slot is None:
            if segments and isinstance(segments[-1], str):
                segments[-1] += ch
            else:
                segments.append(ch)
            continue
        if slot not in seen:
            if seen and slot < seen[-1]:
                raise PatternError(
                    f"pattern {source!r}: slot letters out of order"
                )
            seen.append(slot)
        segments.append(slot)
    if not seen:
        raise PatternError(f"pattern {source!r} contains no slot letters")
    return CompiledPattern(
        source=source, segments=tuple(segments), slot4_policy=slot4_policy
    )


def apply_pattern(root: Root, pattern: CompiledPattern) -> str:
    """Interleave the root's radicals into the pattern."""
    radicals = root.radicals
    if pattern.max_slot > len(radicals):
        if pattern.max_slot == 4 and len(radicals) == 3:
            if pattern.slot4_policy == REQUIRE4:
                raise PatternError(
                    f"pattern {pattern.source!r} requires a 4-radical root, "
                    f"got {root.text!r}"
                )
            radicals = radicals + (radicals[2],)
        else:
            raise PatternError(
                f"pattern {pattern.source!r} needs {pattern.max_slot} radicals, "
                f"root {root.text!r} has {len(radicals)}"
            )
    return "".join(
        seg if isinstance(seg, str) else radicals[seg - 1] for seg in pattern.segments
    )


def extract_radicals(word: str, pattern: CompiledPattern) -> tuple[str, ...]:
    """Read the radicals back out of a word formed by ``pattern``."""
    if len(word) != len(pattern.source):
        raise PatternError(
            f"word {word!r} does not fit pattern {pattern.source!r}"
        )
    radicals = []
    pos = 0
    for seg in pattern.segments:
        if isinstance(seg, int):
            radicals.append(word[pos])
            pos += 1
        else:
            pos += len(seg)
    return tuple(radicals)


def attach_affixes(base: str, prefix: str, suffix: str) -> str:
    """Plain concatenation ``prefix + base + suffix``; no sandhi."""
    if not base:
        raise DataError("base form must be non-empty")
    return prefix + base + suffix


# The shipped derivational pattern inventory (13 patterns).
DEFAULT_PATTERN_SOURCES = (
    "مفعول",
    "فاعل",
    "فعالة",
    "استفعل",
    "فعليل",
    "فعلان",
    "مفعال",
    "انفعل",
    "مفتعل",
    "افتعال",
    "فعول",
    "فعال",
    "فعلاء",
)

# Patterns paired with nonce roots by default (the five attested for nonce use).
NONCE_PATTERN_SOURCES = ("مفعول", "فاعل", "استفعل", "فعول", "فعال")


def default_patterns() -> list[CompiledPattern]:
    return [compile_pattern(p) for p in DEFAULT_PATTERN_SOURCES]


def nonce_patterns() -> list[CompiledPattern]:
    return [compile_pattern(p) for p in NONCE_PATTERN_SOURCES]


def parse_pattern_file(lines: Iterable[str]) -> list[CompiledPattern]:
    """Pattern inventory: one pattern per line, optional ``<TAB>policy=...``."""
    patterns = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if line.startswith("#") or not line.strip():
            continue
        fields = line.split("\t")
        policy = REPEAT3
        if len(fields) == 2:
            key, _, value = fields[1].partition("=")
            if key != "policy" or value not in SLOT4_POLICIES:
                raise DataError(f"line {line_no}: bad pattern option {fields[1]!r}")
            policy = value
        elif len(fields) != 1:
            raise DataError(f"line {line_no}: too many fields in {line!r}")
        patterns.append(compile_pattern(fields[0], slot4_policy=policy))
    return patterns


def load_pattern_file(path) -> list[CompiledPattern]:
    with open(path, encoding="utf-8") as f:
        return parse_pattern_file(f)


def compile_all(sources: Sequence[str | CompiledPattern]) -> list[CompiledPattern]:
    return [
        s if isinstance(s, CompiledPattern) else compile_pattern(s) for s in sources
    ]
