#!/usr/bin/env python3
"""End-to-end demo on synthetic data, no network or licensed corpora needed.

Builds a gold-segmented corpus and three toy tokenizations, scores them,
generates real-style and nonce probe datasets, probes three in-process mock
"models" (a perfect oracle, a root-echoer, and a constant responder), and
correlates tokenizer alignment with generation accuracy.  Everything lands
under demo_out/.
"""

import random
import sys
from pathlib import Path

from morphoprobe.alignment import write_tokens
from morphoprobe.cli import main
from morphoprobe.corpus import GoldCorpus, write_gold, make_gold_word
from morphoprobe.datagen import write_dataset, DatasetInstance
from morphoprobe.mockserver import MockChatServer
from morphoprobe.templatic import (
    DEFAULT_PATTERN_SOURCES,
    Root,
    RootCategory,
    apply_pattern,
    attach_affixes,
    compile_pattern,
)

OUT = Path("demo_out")
ROOTS = ["كتب", "درس", "ثمر", "جبل", "قلم", "نظر", "شغل", "حمل", "رسم", "طلب"]
AFFIXES = [("", ""), ("ال", ""), ("", "هم"), ("و", "ها")]


def build_real_dataset() -> list[DatasetInstance]:
    instances = []
    for root_text in ROOTS:
        root = Root.from_string(root_text, RootCategory.REAL_HIGH_FREQUENCY)
        for source in DEFAULT_PATTERN_SOURCES:
            pattern = compile_pattern(source)
            base = apply_pattern(root, pattern)
            for prefix, suffix in AFFIXES[:3]:
                instances.append(
                    DatasetInstance(
                        root=root_text,
                        template=pattern.source,
                        base_form=base,
                        prefix=prefix,
                        suffix=suffix,
                        full_form=attach_affixes(base, prefix, suffix),
                        has_affix=bool(prefix or suffix),
                        root_category=RootCategory.REAL_HIGH_FREQUENCY,
                    )
                )
    return instances


def build_corpus(instances, rng: random.Random):
    """Gold corpus whose words are the dataset's affixed forms."""
    words = []
    for inst in instances:
        morphemes = [m for m in (inst.prefix, inst.base_form, inst.suffix) if m]
        words.append(make_gold_word(inst.full_form, morphemes))
    rng.shuffle(words)
    sentences = [words[i:i + 10] for i in range(0, len(words), 10)]
    return GoldCorpus(sentences=sentences)


def tokenize_all(corpus, scheme, rng: random.Random):
    entries = []
    for word in corpus.words():
        surface = word.surface
        if scheme == "morpheme":
            pieces = ["".join(surface[s:e]) for s, e in word.spans]
        elif scheme == "whole":
            pieces = [surface]
        else:  # random splitter
            pieces, prev = [], 0
            for cut in [i for i in range(1, len(surface)) if rng.random() < 0.5]:
                pieces.append(surface[prev:cut])
                prev = cut
            pieces.append(surface[prev:])
        entries.append((surface, pieces))
    return entries


def run(argv):
    code = main(argv)
    if code != 0:
        sys.exit(f"step failed ({code}): {' '.join(argv)}")


def probe_and_score(system, mode, dataset, task, out_dir):
    with MockChatServer(mode=mode) as server:
        run(["probe", "--dataset", str(dataset), "--task", task,
             "--lang", "en", "--shots", "1", "--model", system,
             "--endpoint", server.url, "--concurrency", "8",
             "--out", str(out_dir / f"{system}.{dataset.stem}.{task}.jsonl")])


def merge_scores(system, out_dir, scores_dir):
    """Combine per-task result files into one scores CSV per system."""
    from morphoprobe.analysis import scores_to_csv
    from morphoprobe.probe import load_results, task_key

    stats = {}
    for path in sorted(out_dir.glob(f"{system}.*.jsonl")):
        for result in load_results(path):
            key = task_key(result)
            correct, total, failed = stats.get(key, (0, 0, 0))
            stats[key] = (correct + int(result.correct), total + 1,
                          failed + int(result.error is not None))
    (scores_dir / f"{system}.csv").write_text(
        scores_to_csv(system, stats), encoding="utf-8"
    )


def main_demo():
    rng = random.Random(1234)
    OUT.mkdir(exist_ok=True)
    reports = OUT / "reports"
    scores = OUT / "scores"
    results = OUT / "results"
    for directory in (reports, scores, results):
        directory.mkdir(exist_ok=True)

    print("== datasets ==")
    real_instances = build_real_dataset()
    real_path = OUT / "real_raw.jsonl"
    real_path.write_text(write_dataset(real_instances), encoding="utf-8")
    run(["build-dataset", "--real", str(real_path), "--shape", "13,130,1,2",
         "--out", str(OUT / "real.jsonl")])
    run(["make-nonce", "--n", "20", "--seed", "7", "--out", str(OUT / "nonce.jsonl")])

    print("== tokenizer alignment ==")
    corpus = build_corpus(real_instances, rng)
    gold_path = OUT / "gold.txt"
    gold_path.write_text(write_gold(corpus), encoding="utf-8")
    systems = {"oracle": "morpheme", "echo": "whole", "constant": "splitter"}
    for system, scheme in systems.items():
        tokens_path = OUT / f"tokens_{system}.txt"
        tokens_path.write_text(
            write_tokens(tokenize_all(corpus, scheme, rng)), encoding="utf-8"
        )
        run(["eval-tokenizer", "--gold", str(gold_path), "--tokens",
             str(tokens_path), "--dataset", "demo", "--system", system,
             "--out", str(reports / f"{system}.csv")])

    print("== probing mock models ==")
    for system, mode in (("oracle", "oracle"), ("echo", "root_echo"),
                         ("constant", "constant")):
        probe_and_score(system, mode, OUT / "real.jsonl", "root-pattern", results)
        probe_and_score(system, mode, OUT / "nonce.jsonl", "root-pattern", results)
        probe_and_score(system, mode, OUT / "real.jsonl", "affix-build", results)
        merge_scores(system, results, scores)

    print("== correlation ==")
    run(["correlate", "--reports", str(reports), "--scores", str(scores),
         "--out", str(OUT / "matrix.csv")])
    run(["report", "--reports", str(reports), "--scores", str(scores),
         "--out", str(OUT / "tables")])
    print()
    print((OUT / "tables" / "tables.txt").read_text(encoding="utf-8"))


if __name__ == "__main__":
    main_demo()
