"""Command-line entry point wiring all modules together.

Exit codes: 0 success, 1 usage error, 2 data error, 3 endpoint error.
Every output file begins with a metadata comment carrying the tool
version, the seed, and a hash of the effective configuration, so the same
configuration over deterministic inputs reproduces files byte-for-byte.

An optional JSON config file (``--config``) supplies defaults; flags
override file values, and ``--dump-config`` prints the effective
configuration without running.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analysis import (
    SystemRow,
    correlate,
    emit_report,
    format_matrix,
    matrix_to_csv,
    parse_scores_csv,
    scores_to_csv,
)
from .corpus import GoldWord, clean_words, corpus_stats, load_gold
from .alignment import load_tokens
from .datagen import (
    ShapeExpectation,
    build_nonce_set,
    dataset_shape_check,
    generate_nonce_roots,
    load_dataset,
    load_lexicon,
    validate_real_record,
    write_dataset,
)
from .errors import AuthenticationError, DataError, EndpointError
from .metrics import (
    AlignmentReport,
    MetricOptions,
    REPORT_CSV_HEADER,
    evaluate,
    format_report,
    parse_report_csv,
    report_csv_row,
    report_metadata,
)
from .probe import (
    Language,
    ProbeConfig,
    PromptSpec,
    Task,
    accuracy,
    derive_exemplar,
    format_accuracy,
    load_results,
    render_prompt,
    results_to_jsonl,
    run_probe,
    select_task_instances,
    target_for,
    task_key,
)
from .templatic import load_pattern_file, nonce_patterns

GOLD_FORMAT = (
    "gold file: UTF-8, one word per line as 'surface<TAB>m1+m2+...+mk'; "
    "a blank line ends a sentence; '#' lines are comments"
)
TOKENS_FORMAT = (
    "tokens file: UTF-8, one word per line as 'surface<TAB>tok1<US>tok2...' "
    "with <US> = U+001F; word lines pair one-for-one with the gold file"
)
DATASET_FORMAT = (
    "dataset file: JSON lines with fields root, template, base_form, prefix, "
    "suffix, full_form, has_affix ('true'/'false'), root_category"
)
PATTERNS_FORMAT = (
    "patterns file: one pattern per line, optional '<TAB>policy=repeat3|require4'"
)


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument(
        "--dump-config",
        action="store_true",
        help="print the effective configuration and exit",
    )
    common.add_argument("--seed", type=int, help="seed recorded in output metadata")
    return common


def build_parser() -> _Parser:
    parser = _Parser(prog="morphoprobe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()

    p = sub.add_parser(
        "clean",
        parents=[common],
        help="strip diacritics and drop non-Arabic tokens",
        epilog="input: plain text, one sentence per line (whitespace-tokenized)",
    )
    p.add_argument("--in", dest="input", required=True, help="raw text file")
    p.add_argument("--out", required=True, help="cleaned text file")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser(
        "eval-tokenizer",
        parents=[common],
        help="score a tokenization against gold segmentation",
        epilog=f"{GOLD_FORMAT}. {TOKENS_FORMAT}.",
    )
    p.add_argument("--gold", required=True, help="gold segmentation file")
    p.add_argument("--tokens", required=True, help="tokenization file")
    p.add_argument("--out", required=True, help="report CSV")
    p.add_argument("--dataset", help="dataset name for the report (default: gold stem)")
    p.add_argument("--system", help="system name for the report (default: tokens stem)")
    p.add_argument(
        "--boundary-averaging",
        choices=("pooled", "macro"),
        dest="boundary_averaging",
        help="which boundary scores fill the primary columns (default pooled)",
    )
    p.add_argument(
        "--zero-denominator",
        choices=("zero", "skip"),
        dest="zero_denominator",
        help="per-word means over undefined ratios: count as 0 or skip (default zero)",
    )
    p.set_defaults(func=cmd_eval_tokenizer)

    p = sub.add_parser(
        "make-nonce",
        parents=[common],
        help="generate a nonce-root probe dataset",
        epilog=f"{PATTERNS_FORMAT}. lexicon: newline-delimited known roots. "
        f"{DATASET_FORMAT}.",
    )
    p.add_argument("--n", type=int, help="number of nonce roots (default 20)")
    p.add_argument("--patterns", help="pattern inventory file (default: 5 nonce patterns)")
    p.add_argument("--lexicon", help="known-root list; generated roots avoid it")
    p.add_argument("--out", required=True, help="dataset JSONL")
    p.set_defaults(func=cmd_make_nonce)

    p = sub.add_parser(
        "build-dataset",
        parents=[common],
        help="validate real-root records and emit a normalized dataset",
        epilog=f"{DATASET_FORMAT}. --shape checks "
        "'patterns,pairs,unaffixed_per_pair,affixed_per_pair' (e.g. 13,130,1,2).",
    )
    p.add_argument("--real", required=True, help="real-root records (JSONL)")
    p.add_argument("--out", required=True, help="validated dataset JSONL")
    p.add_argument("--shape", help="expected dataset shape to enforce")
    p.set_defaults(func=cmd_build_dataset)

    def add_prompt_flags(p):
        p.add_argument("--dataset", required=True, help="dataset JSONL")
        p.add_argument(
            "--task",
            required=True,
            choices=("root-pattern", "affix-build"),
            help="probe task",
        )
        p.add_argument("--lang", choices=("en", "ar"), help="prompt language (default en)")
        p.add_argument("--shots", type=int, choices=(0, 1), help="0- or 1-shot (default 0)")
        p.add_argument(
            "--exemplar-root",
            dest="exemplar_root",
            help="root used to derive one-shot exemplars",
        )
        p.add_argument(
            "--all-rows",
            dest="all_rows",
            action="store_true",
            help="keep all rows instead of the task's default selection "
            "(unaffixed rows for root-pattern, affixed rows for affix-build)",
        )

    p = sub.add_parser(
        "render-prompts",
        parents=[common],
        help="render prompts without calling any endpoint",
        epilog=f"{DATASET_FORMAT}.",
    )
    add_prompt_flags(p)
    p.add_argument("--out", required=True, help="prompts JSONL")
    p.set_defaults(func=cmd_render_prompts)

    p = sub.add_parser(
        "probe",
        parents=[common],
        help="drive a chat-completion endpoint over a dataset",
        epilog="API key (if needed) comes from the environment variable "
        "MORPHOPROBE_API_KEY. results file: JSON lines, one result per "
        "instance, dataset order.",
    )
    add_prompt_flags(p)
    p.add_argument("--model", required=True, help="model name sent to the endpoint")
    p.add_argument("--endpoint", help="chat-completion URL (flag or config file)")
    p.add_argument("--out", required=True, help="results JSONL")
    p.add_argument("--temperature", type=float, help="sampling temperature (default 0.6)")
    p.add_argument(
        "--max-tokens", dest="max_tokens", type=int,
        help="completion budget (default 80; use 8 for terse models)",
    )
    p.add_argument("--retry-limit", dest="retry_limit", type=int, help="default 3")
    p.add_argument(
        "--concurrency", dest="concurrency_limit", type=int,
        help="max in-flight requests (default 4)",
    )
    p.add_argument("--timeout", type=float, help="per-request timeout seconds")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser(
        "score",
        parents=[common],
        help="accuracy over a results file",
        epilog="scores CSV columns: system,task,accuracy,correct,total,failed",
    )
    p.add_argument("--results", required=True, help="results JSONL from probe")
    p.add_argument("--by", choices=("root_category", "task"), help="group accuracies")
    p.add_argument("--system", help="system name for the scores CSV (default: model)")
    p.add_argument("--out", help="scores CSV")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser(
        "correlate",
        parents=[common],
        help="Pearson correlation between alignment metrics and accuracies",
        epilog="reads eval-tokenizer CSVs from --reports and score CSVs from "
        "--scores; matrix CSV columns: metric,task,n,r (NA = undefined)",
    )
    p.add_argument("--reports", required=True, help="directory of report CSVs")
    p.add_argument("--scores", required=True, help="directory of scores CSVs")
    p.add_argument("--out", required=True, help="matrix CSV")
    p.add_argument("--dataset", help="restrict report rows to one dataset name")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser(
        "report",
        parents=[common],
        help="emit combined tables and plot-ready CSVs",
        epilog="writes systems.csv, correlation_matrix.csv, tables.txt into --out",
    )
    p.add_argument("--reports", required=True, help="directory of report CSVs")
    p.add_argument("--scores", required=True, help="directory of scores CSVs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dataset", help="restrict report rows to one dataset name")
    p.set_defaults(func=cmd_report)

    return parser


# ---------------------------------------------------------------------------
# Configuration plumbing

_NON_CONFIG_KEYS = ("command", "func", "config", "dump_config")


def effective_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise DataError(f"config file not found: {path}")
        try:
            cfg = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise DataError("config file must hold a JSON object")
    for key, value in vars(args).items():
        if key in _NON_CONFIG_KEYS:
            continue
        if value is not None and value is not False:
            cfg[key] = value
    cfg.setdefault("seed", 0)
    return cfg


def metadata_line(cfg: dict, **extra) -> str:
    # the output path does not shape the output's content
    hashed = {k: v for k, v in cfg.items() if k != "out"}
    digest = hashlib.sha256(
        json.dumps(hashed, sort_keys=True, ensure_ascii=False, default=str).encode("utf-8")
    ).hexdigest()[:12]
    parts = [
        f"morphoprobe={__version__}",
        f"seed={cfg['seed']}",
        f"config=sha256:{digest}",
    ]
    parts.extend(f"{key}={value}" for key, value in extra.items())
    return "# " + " ".join(parts)


def _require_paths(cfg: dict, *keys: str):
    for key in keys:
        path = Path(cfg[key])
        if not path.exists():
            raise DataError(f"--{key.replace('_', '-')} path not found: {path}")


def _write(path, metadata: str, body: str):
    Path(path).write_text(f"{metadata}\n{body}", encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_clean(cfg: dict) -> int:
    _require_paths(cfg, "input")
    lines = Path(cfg["input"]).read_text(encoding="utf-8").splitlines()
    words_in = 0
    words_out = 0
    sentences = []
    for line in lines:
        words = line.split()
        kept = clean_words(words)
        words_in += len(words)
        words_out += len(kept)
        sentences.append(" ".join(kept))
    _write(cfg["out"], metadata_line(cfg), "\n".join(sentences) + "\n")
    retention = words_out / words_in if words_in else 0.0
    print(
        f"sentences={len(sentences)} words_in={words_in} "
        f"words_out={words_out} retention={retention:.4f}"
    )
    return 0


def cmd_eval_tokenizer(cfg: dict) -> int:
    _require_paths(cfg, "gold", "tokens")
    options = MetricOptions(
        boundary_averaging=cfg.get("boundary_averaging", "pooled"),
        zero_denominator=cfg.get("zero_denominator", "zero"),
    )
    gold = load_gold(cfg["gold"])
    entries = load_tokens(cfg["tokens"])
    report = evaluate(gold, entries, options)
    dataset = cfg.get("dataset") or Path(cfg["gold"]).stem
    system = cfg.get("system") or Path(cfg["tokens"]).stem
    body = (
        f"# {report_metadata(report)}\n"
        f"{REPORT_CSV_HEADER}\n{report_csv_row(report, dataset, system)}\n"
    )
    _write(cfg["out"], metadata_line(cfg, dataset=dataset, system=system), body)
    token_counts = []
    index = 0
    for sentence in gold.sentences:
        counts = []
        for word in sentence:
            counts.append(len(entries[index].tokens) if isinstance(word, GoldWord) else 0)
            index += 1
        token_counts.append(counts)
    stats = corpus_stats(
        [[w.surface for w in sentence] for sentence in gold.sentences], token_counts
    )
    print(
        f"sentences={stats.sentence_count} words={stats.word_count} "
        f"tokens={stats.token_count} avg_tokens_per_sentence="
        f"{stats.avg_tokens_per_sentence:.2f}"
    )
    print(format_report(report, dataset, system))
    return 0


def cmd_make_nonce(cfg: dict) -> int:
    if cfg.get("patterns"):
        _require_paths(cfg, "patterns")
        patterns = load_pattern_file(cfg["patterns"])
    else:
        patterns = nonce_patterns()
    lexicon = set()
    if cfg.get("lexicon"):
        _require_paths(cfg, "lexicon")
        lexicon = load_lexicon(cfg["lexicon"])
    n = int(cfg.get("n", 20))
    roots = generate_nonce_roots(n, cfg["seed"], lexicon)
    instances, errors = build_nonce_set(roots, patterns)
    for error in errors:
        print(f"warning: {error}", file=sys.stderr)
    _write(cfg["out"], metadata_line(cfg, n=n, patterns=len(patterns)),
           write_dataset(instances))
    print(
        f"wrote {len(instances)} instances "
        f"({len(roots)} roots x {len(patterns)} patterns, {len(errors)} errors)"
    )
    return 0


def cmd_build_dataset(cfg: dict) -> int:
    _require_paths(cfg, "real")
    records = load_dataset(cfg["real"])
    bad = 0
    for index, record in enumerate(records, start=1):
        violations = validate_real_record(record)
        if violations:
            bad += 1
            for violation in violations:
                print(f"record {index}: {violation}", file=sys.stderr)
    if bad:
        raise DataError(f"{bad} of {len(records)} records failed validation")
    if cfg.get("shape"):
        expectation = ShapeExpectation.from_string(str(cfg["shape"]))
        violations = dataset_shape_check(records, expectation)
        if violations:
            for violation in violations:
                print(f"shape: {violation}", file=sys.stderr)
            raise DataError(f"dataset shape check failed ({len(violations)} violations)")
    _write(cfg["out"], metadata_line(cfg, records=len(records)), write_dataset(records))
    print(f"validated {len(records)} records")
    return 0


def _prompt_inputs(cfg: dict):
    _require_paths(cfg, "dataset")
    task = Task.ROOT_PATTERN if cfg["task"] == "root-pattern" else Task.AFFIX_BUILD
    language = Language(cfg.get("lang", "en"))
    shots = int(cfg.get("shots", 0))
    dataset = load_dataset(cfg["dataset"])
    if not cfg.get("all_rows"):
        dataset = select_task_instances(dataset, task)
    if not dataset:
        raise DataError("no instances selected for this task")
    spec = PromptSpec(task=task, language=language, shots=shots)
    return dataset, spec


def cmd_render_prompts(cfg: dict) -> int:
    dataset, spec = _prompt_inputs(cfg)
    exemplar_root = cfg.get("exemplar_root")
    lines = []
    for index, instance in enumerate(dataset):
        instance_spec = spec
        if spec.shots == 1:
            exemplar = (
                derive_exemplar(instance, exemplar_root)
                if exemplar_root
                else derive_exemplar(instance)
            )
            instance_spec = replace(spec, exemplar=exemplar)
        lines.append(
            json.dumps(
                {
                    "instance_id": index,
                    "target": target_for(instance, spec.task),
                    "prompt": render_prompt(instance, instance_spec),
                },
                ensure_ascii=False,
            )
        )
    _write(
        cfg["out"],
        metadata_line(cfg, task=spec.task.value, lang=spec.language.value,
                      shots=spec.shots),
        "\n".join(lines) + "\n",
    )
    print(f"rendered {len(lines)} prompts")
    return 0


def cmd_probe(cfg: dict) -> int:
    dataset, spec = _prompt_inputs(cfg)
    config = ProbeConfig(
        endpoint=cfg.get("endpoint", ""),
        model_name=cfg["model"],
        temperature=float(cfg.get("temperature", 0.6)),
        max_tokens=int(cfg.get("max_tokens", 80)),
        retry_limit=int(cfg.get("retry_limit", 3)),
        concurrency_limit=int(cfg.get("concurrency_limit", 4)),
        timeout=float(cfg.get("timeout", 30.0)),
    )
    results = run_probe(dataset, spec, config)
    failed = sum(1 for r in results if r.error is not None)
    if failed == len(results):
        raise EndpointError(
            f"all {failed} calls failed; first error: {results[0].error}"
        )
    _write(
        cfg["out"],
        metadata_line(cfg, model=config.model_name, task=spec.task.value,
                      lang=spec.language.value, shots=spec.shots),
        results_to_jsonl(results),
    )
    completed = [r for r in results if r.error is None]
    print(
        f"instances={len(results)} failed={failed} "
        f"accuracy={format_accuracy(accuracy(results))} "
        f"accuracy_completed="
        f"{format_accuracy(accuracy(completed)) if completed else 'NA'}"
    )
    return 0


def cmd_score(cfg: dict) -> int:
    _require_paths(cfg, "results")
    results = load_results(cfg["results"])
    if not results:
        raise DataError("results file holds no records")
    system = cfg.get("system") or results[0].model
    print(f"overall: n={len(results)} accuracy={format_accuracy(accuracy(results))}")
    by = cfg.get("by")
    if by:
        keys = sorted({getattr(r, by) for r in results})
        for key in keys:
            subset = [r for r in results if getattr(r, by) == key]
            completed = [r for r in subset if r.error is None]
            excl = format_accuracy(accuracy(completed)) if completed else "NA"
            print(
                f"{by}={key}: n={len(subset)} "
                f"accuracy={format_accuracy(accuracy(subset))} "
                f"accuracy_completed={excl}"
            )
    if cfg.get("out"):
        task_stats = {}
        for result in results:
            key = task_key(result)
            correct, total, failed = task_stats.get(key, (0, 0, 0))
            task_stats[key] = (
                correct + int(result.correct),
                total + 1,
                failed + int(result.error is not None),
            )
        _write(cfg["out"], metadata_line(cfg, system=system),
               scores_to_csv(system, task_stats))
    return 0


def _load_system_rows(cfg: dict) -> list[SystemRow]:
    _require_paths(cfg, "reports", "scores")
    dataset_filter = cfg.get("dataset")
    reports: dict[str, AlignmentReport] = {}
    for path in sorted(Path(cfg["reports"]).glob("*.csv")):
        with open(path, encoding="utf-8") as f:
            rows = parse_report_csv(f)
        for row in rows:
            if dataset_filter and row["dataset"] != dataset_filter:
                continue
            system = row["system"]
            if system in reports:
                raise DataError(
                    f"system {system!r} appears in multiple report rows; "
                    f"use --dataset to disambiguate"
                )
            reports[system] = AlignmentReport(
                fertility=row["fertility"],
                total_tokens=row["tokens"],
                boundary_precision=row["boundary_p"] / 100,
                boundary_recall=row["boundary_r"] / 100,
                boundary_f1=row["boundary_f1"] / 100,
                morpheme_f1=row["morpheme_f1"] / 100,
                mcr=row["mcr"] / 100,
                word_count=row["words"],
                excluded_count=row["excluded"],
            )
    if not reports:
        raise DataError(f"no report rows found under {cfg['reports']}")
    accuracies: dict[str, dict[str, float]] = {}
    for path in sorted(Path(cfg["scores"]).glob("*.csv")):
        with open(path, encoding="utf-8") as f:
            for row in parse_scores_csv(f):
                accuracies.setdefault(row["system"], {})[row["task"]] = row["accuracy"]
    return [
        SystemRow(system=system, alignment=reports[system],
                  accuracies=accuracies.get(system, {}))
        for system in sorted(reports)
    ]


def cmd_correlate(cfg: dict) -> int:
    rows = _load_system_rows(cfg)
    matrix = correlate(rows)
    _write(
        cfg["out"],
        metadata_line(cfg, systems=len(rows), fertility_orientation="raw"),
        matrix_to_csv(matrix),
    )
    print(format_matrix(matrix))
    return 0


def cmd_report(cfg: dict) -> int:
    rows = _load_system_rows(cfg)
    matrix = correlate(rows) if len(rows) >= 2 else None
    written = emit_report(
        rows, matrix, cfg["out"],
        metadata=metadata_line(cfg, systems=len(rows), fertility_orientation="raw"),
    )
    for path in written:
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        cfg = effective_config(args)
        if getattr(args, "dump_config", False):
            print(json.dumps(cfg, indent=2, sort_keys=True, ensure_ascii=False))
            return 0
        return args.func(cfg) or 0
    except AuthenticationError as exc:
        print(f"endpoint error: {exc}", file=sys.stderr)
        return 3
    except EndpointError as exc:
        print(f"endpoint error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run():
    raise SystemExit(main())


if __name__ == "__main__":
    run()
