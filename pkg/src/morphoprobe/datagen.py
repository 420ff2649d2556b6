"""Probe dataset construction: nonce roots, record assembly, validation.

Dataset files are JSON lines with exactly the eight record fields (root,
template, base_form, prefix, suffix, full_form, has_affix, root_category);
``has_affix`` is serialized as the string "true"/"false".
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DataError, PatternError
from .templatic import (
    CompiledPattern,
    Root,
    RootCategory,
    apply_pattern,
    compile_pattern,
)

# Strong consonants: the 28 base letters minus the weak ا/و/ي.  Hamza forms
# and the positional variants ة/ى are excluded too, so plain interleaving
# never yields an orthographically ill-formed word.
STRONG_CONSONANTS = "بتثجحخدذرزسشصضطظعغفقكلمنه"

DEFAULT_ATTEMPT_CAP_FACTOR = 10_000

FIELD_NAMES = (
    "root",
    "template",
    "base_form",
    "prefix",
    "suffix",
    "full_form",
    "has_affix",
    "root_category",
)


@dataclass(frozen=True)
class DatasetInstance:
    """One probe row (see FIELD_NAMES for the serialized schema)."""

    root: str
    template: str
    base_form: str
    prefix: str
    suffix: str
    full_form: str
    has_affix: bool
    root_category: RootCategory


def generate_nonce_roots(
    n: int,
    seed: int,
    lexicon: Iterable[str] = (),
    *,
    alphabet: str = STRONG_CONSONANTS,
    distinct: bool = True,
    attempt_cap_factor: int = DEFAULT_ATTEMPT_CAP_FACTOR,
) -> list[Root]:
    """Draw ``n`` unique 3-consonant nonce roots, seeded and reproducible.

    Radicals are uniform over ``alphabet`` and pairwise distinct unless
    ``distinct=False``.  Roots present in ``lexicon`` (or already drawn) are
    rejected; exceeding ``attempt_cap_factor * n`` attempts raises DataError
    naming the constraint.
    """
    if n < 1:
        raise DataError("n must be >= 1")
    letters = list(dict.fromkeys(alphabet))
    if len(letters) < 3:
        raise DataError("consonant alphabet needs at least 3 letters")
    known = set(lexicon)
    rng = random.Random(seed)
    cap = attempt_cap_factor * n
    roots: list[Root] = []
    taken: set[str] = set()
    attempts = 0
    while len(roots) < n:
        attempts += 1
        if attempts > cap:
            raise DataError(
                f"gave up after {cap} attempts: cannot draw {n} roots outside "
                f"the lexicon ({len(known)} entries) from a "
                f"{len(letters)}-letter alphabet with "
                f"{'distinct' if distinct else 'repeatable'} radicals"
            )
        if distinct:
            radicals = tuple(rng.sample(letters, 3))
        else:
            radicals = tuple(rng.choice(letters) for _ in range(3))
        text = "".join(radicals)
        if text in known or text in taken:
            continue
        taken.add(text)
        roots.append(Root(radicals=radicals, category=RootCategory.NONCE))
    return roots


def build_nonce_set(
    roots: Sequence[Root], patterns: Sequence[CompiledPattern]
) -> tuple[list[DatasetInstance], list[str]]:
    """Cross every root with every pattern into unaffixed nonce instances.

    Returns ``(instances, errors)``; per-instance pattern failures are
    collected, not fatal.
    """
    if not patterns:
        raise DataError("no patterns given")
    instances = []
    errors = []
    for root in roots:
        for pattern in patterns:
            try:
                base = apply_pattern(root, pattern)
            except PatternError as exc:
                errors.append(str(exc))
                continue
            instances.append(
                DatasetInstance(
                    root=root.text,
                    template=pattern.source,
                    base_form=base,
                    prefix="",
                    suffix="",
                    full_form=base,
                    has_affix=False,
                    root_category=root.category,
                )
            )
    return instances, errors


def validate_real_record(record: DatasetInstance) -> list[str]:
    """Check every record invariant; returns the violations (never raises)."""
    violations = []
    if not isinstance(record.root_category, RootCategory):
        violations.append(f"unknown root_category {record.root_category!r}")
    expected_affix = bool(record.prefix or record.suffix)
    if record.has_affix != expected_affix:
        violations.append(
            f"has_affix={record.has_affix} but affixes are "
            f"prefix={record.prefix!r} suffix={record.suffix!r}"
        )
    expected_full = record.prefix + record.base_form + record.suffix
    if record.full_form != expected_full:
        violations.append(
            f"full_form {record.full_form!r} != prefix+base_form+suffix "
            f"{expected_full!r}"
        )
    try:
        root = Root.from_string(record.root)
        pattern = compile_pattern(record.template)
        expected_base = apply_pattern(root, pattern)
    except DataError as exc:
        violations.append(str(exc))
    else:
        if record.base_form != expected_base:
            violations.append(
                f"base_form {record.base_form!r} != template applied to root "
                f"{expected_base!r}"
            )
    return violations


@dataclass(frozen=True)
class ShapeExpectation:
    """Expected dataset shape: patterns, pairs, and per-pair multiplicity."""

    pattern_count: int
    pair_count: int
    unaffixed_per_pair: int
    affixed_per_pair: int

    @classmethod
    def real_default(cls) -> "ShapeExpectation":
        return cls(13, 130, 1, 2)

    @classmethod
    def nonce_default(cls) -> "ShapeExpectation":
        return cls(5, 100, 1, 0)

    @classmethod
    def from_string(cls, text: str) -> "ShapeExpectation":
        parts = text.split(",")
        if len(parts) != 4:
            raise DataError(
                "shape must be 'patterns,pairs,unaffixed_per_pair,affixed_per_pair'"
            )
        try:
            return cls(*(int(p) for p in parts))
        except ValueError as exc:
            raise DataError(f"bad shape {text!r}: {exc}") from exc


def dataset_shape_check(
    instances: Sequence[DatasetInstance], expectation: ShapeExpectation
) -> list[str]:
    """Verify pattern count, pair count, and per-pair form multiplicity."""
    violations = []
    templates = {i.template for i in instances}
    if len(templates) != expectation.pattern_count:
        violations.append(
            f"expected {expectation.pattern_count} patterns, found {len(templates)}"
        )
    pairs: dict[tuple[str, str], list[int]] = {}
    for instance in instances:
        counts = pairs.setdefault((instance.root, instance.template), [0, 0])
        counts[1 if instance.has_affix else 0] += 1
    if len(pairs) != expectation.pair_count:
        violations.append(
            f"expected {expectation.pair_count} unique (root, template) pairs, "
            f"found {len(pairs)}"
        )
    want = [expectation.unaffixed_per_pair, expectation.affixed_per_pair]
    for (root, template), counts in sorted(pairs.items()):
        if counts != want:
            violations.append(
                f"pair ({root}, {template}): {counts[0]} unaffixed / "
                f"{counts[1]} affixed, expected {want[0]}/{want[1]}"
            )
    return violations


# ---------------------------------------------------------------------------
# Serialization (JSON lines)


def instance_to_dict(instance: DatasetInstance) -> dict:
    return {
        "root": instance.root,
        "template": instance.template,
        "base_form": instance.base_form,
        "prefix": instance.prefix,
        "suffix": instance.suffix,
        "full_form": instance.full_form,
        "has_affix": "true" if instance.has_affix else "false",
        "root_category": instance.root_category.value,
    }


def instance_from_dict(data: dict) -> DatasetInstance:
    if set(data) != set(FIELD_NAMES):
        missing = set(FIELD_NAMES) - set(data)
        extra = set(data) - set(FIELD_NAMES)
        raise DataError(
            f"record fields mismatch (missing {sorted(missing)}, extra {sorted(extra)})"
        )
    has_affix = data["has_affix"]
    if isinstance(has_affix, str):
        if has_affix not in ("true", "false"):
            raise DataError(f"has_affix must be 'true' or 'false', got {has_affix!r}")
        has_affix = has_affix == "true"
    elif not isinstance(has_affix, bool):
        raise DataError(f"has_affix must be 'true' or 'false', got {has_affix!r}")
    try:
        category = RootCategory(data["root_category"])
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    return DatasetInstance(
        root=data["root"],
        template=data["template"],
        base_form=data["base_form"],
        prefix=data["prefix"],
        suffix=data["suffix"],
        full_form=data["full_form"],
        has_affix=has_affix,
        root_category=category,
    )


def write_dataset(instances: Iterable[DatasetInstance]) -> str:
    lines = [
        json.dumps(instance_to_dict(i), ensure_ascii=False) for i in instances
    ]
    return "\n".join(lines) + "\n" if lines else ""


def parse_dataset(lines: Iterable[str]) -> list[DatasetInstance]:
    instances = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {line_no}: invalid JSON: {exc}") from exc
        try:
            instances.append(instance_from_dict(data))
        except DataError as exc:
            raise DataError(f"line {line_no}: {exc}") from exc
    return instances


def load_dataset(path) -> list[DatasetInstance]:
    with open(path, encoding="utf-8") as f:
        return parse_dataset(f)


def load_lexicon(path) -> set[str]:
    """Newline-delimited known-root list; diacritics are stripped."""
    from .corpus import strip_diacritics

    lexicon = set()
    with open(path, encoding="utf-8") as f:
        for raw in f:
            word = strip_diacritics(raw.strip())
            if word and not word.startswith("#"):
                lexicon.add(word)
    return lexicon
