"""Arabic tokenizer-morphology alignment metrics and root-pattern probes."""

__version__ = "0.1.0"

from .alignment import WordAlignment, align_tokens, build_alignment, reconcile_gold
from .corpus import (
    CorpusStats,
    GoldCorpus,
    GoldWord,
    clean_words,
    corpus_stats,
    parse_gold,
    strip_diacritics,
)
from .datagen import (
    DatasetInstance,
    ShapeExpectation,
    build_nonce_set,
    dataset_shape_check,
    generate_nonce_roots,
    validate_real_record,
)
from .metrics import AlignmentReport, MetricOptions, evaluate
from .probe import (
    Language,
    ProbeConfig,
    ProbeResult,
    PromptSpec,
    Task,
    accuracy,
    complete,
    lenient_match,
    render_prompt,
    run_probe,
)
from .templatic import (
    CompiledPattern,
    Root,
    RootCategory,
    apply_pattern,
    attach_affixes,
    compile_pattern,
)
from .analysis import SystemRow, correlate, emit_report, pearson

__all__ = [
    "__version__",
    "AlignmentReport",
    "CompiledPattern",
    "CorpusStats",
    "DatasetInstance",
    "GoldCorpus",
    "GoldWord",
    "Language",
    "MetricOptions",
    "ProbeConfig",
    "ProbeResult",
    "PromptSpec",
    "Root",
    "RootCategory",
    "ShapeExpectation",
    "SystemRow",
    "Task",
    "WordAlignment",
    "accuracy",
    "align_tokens",
    "apply_pattern",
    "attach_affixes",
    "build_alignment",
    "build_nonce_set",
    "clean_words",
    "compile_pattern",
    "complete",
    "correlate",
    "corpus_stats",
    "dataset_shape_check",
    "emit_report",
    "evaluate",
    "generate_nonce_roots",
    "lenient_match",
    "parse_gold",
    "pearson",
    "reconcile_gold",
    "render_prompt",
    "run_probe",
    "strip_diacritics",
    "validate_real_record",
]
