"""Prompt rendering, chat-completion driving, and lenient accuracy scoring.

Prompts are plain-text resources under ``morphoprobe/prompts/``; the
English texts are fixed, the Arabic ones are editable translations.  The
endpoint speaks the common chat-completion shape: POST a JSON body with
``model``, ``messages``, ``temperature``, ``max_tokens`` and answer with
``choices[0].message.content``.  The API key, if any, is read from the
environment variable named by ProbeConfig.api_key_var.
"""

from __future__ import annotations

import enum
import json
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources
from typing import Callable, Iterable, Sequence

import requests

from .corpus import strip_diacritics
from .datagen import DatasetInstance
from .errors import AuthenticationError, DataError, EndpointError
from .templatic import Root, apply_pattern, attach_affixes, compile_pattern


class Task(enum.Enum):
    ROOT_PATTERN = "root_pattern"
    AFFIX_BUILD = "affix_build"


class Language(enum.Enum):
    EN = "en"
    AR = "ar"


# Exemplar root for derived one-shot examples; the fallback covers queries
# whose own root is the exemplar.
DEFAULT_EXEMPLAR_ROOT = "زرع"
FALLBACK_EXEMPLAR_ROOT = "درس"

_ARABIC_RUN = re.compile(r"[ء-غف-ي]+")


@dataclass(frozen=True)
class PromptSpec:
    """Which prompt to render: task, language, and 0- or 1-shot."""

    task: Task
    language: Language
    shots: int = 0
    exemplar: DatasetInstance | None = None

    def __post_init__(self):
        if self.shots not in (0, 1):
            raise DataError(f"shots must be 0 or 1, got {self.shots}")


@dataclass(frozen=True)
class ProbeConfig:
    """Endpoint and generation settings for one probe run."""

    endpoint: str
    model_name: str
    temperature: float = 0.6
    max_tokens: int = 80
    retry_limit: int = 3
    concurrency_limit: int = 4
    timeout: float = 30.0
    retry_backoff: float = 0.5
    api_key_var: str = "MORPHOPROBE_API_KEY"

    def __post_init__(self):
        if not self.endpoint:
            raise DataError("endpoint must be set")
        if not 0.0 <= self.temperature <= 2.0:
            raise DataError(f"temperature {self.temperature} outside [0, 2]")
        if self.max_tokens < 1:
            raise DataError("max_tokens must be >= 1")
        if self.retry_limit < 0:
            raise DataError("retry_limit must be >= 0")
        if self.concurrency_limit < 1:
            raise DataError("concurrency_limit must be >= 1")


@dataclass(frozen=True)
class ProbeResult:
    """Per-instance model output, lenient-match verdict, and run metadata.

    ``error`` is None for completed calls; failed instances keep
    ``correct=False`` with the failure reason here, distinguishable from a
    wrong answer.
    """

    instance_id: int
    task: str
    language: str
    shots: int
    model: str
    root_category: str
    target: str
    raw_output: str
    normalized_output: str
    correct: bool
    error: str | None
    latency: float
    attempt_count: int


def _load_template(name: str) -> str:
    path = resources.files("morphoprobe").joinpath("prompts", name)
    try:
        return path.read_text(encoding="utf-8").rstrip("\n")
    except FileNotFoundError as exc:
        raise DataError(f"missing prompt template {name!r}") from exc


def target_for(instance: DatasetInstance, task: Task) -> str:
    return instance.base_form if task is Task.ROOT_PATTERN else instance.full_form


def derive_exemplar(
    instance: DatasetInstance, exemplar_root: str = DEFAULT_EXEMPLAR_ROOT
) -> DatasetInstance:
    """Build a one-shot exemplar sharing the query's template and affixes.

    Uses ``exemplar_root`` (the fallback root if the query's root is the
    same), so the exemplar's (root, template) never equals the query's.
    """
    root_text = exemplar_root if instance.root != exemplar_root else FALLBACK_EXEMPLAR_ROOT
    pattern = compile_pattern(instance.template)
    base = apply_pattern(Root.from_string(root_text), pattern)
    full = attach_affixes(base, instance.prefix, instance.suffix)
    return DatasetInstance(
        root=root_text,
        template=instance.template,
        base_form=base,
        prefix=instance.prefix,
        suffix=instance.suffix,
        full_form=full,
        has_affix=instance.has_affix,
        root_category=instance.root_category,
    )


def render_prompt(instance: DatasetInstance, spec: PromptSpec) -> str:
    """Render the prompt for one instance; one-shot appends the example block."""
    lang = spec.language.value
    if spec.task is Task.ROOT_PATTERN:
        text = _load_template(f"root_pattern.{lang}.txt").format(
            root=instance.root, template=instance.template
        )
    else:
        text = _load_template(f"affix_build.{lang}.txt").format(
            base_form=instance.base_form,
            prefix=instance.prefix,
            suffix=instance.suffix,
        )
    if spec.shots == 0:
        return text
    exemplar = spec.exemplar
    if exemplar is None:
        raise DataError("one-shot prompt requires an exemplar")
    if (exemplar.root, exemplar.template) == (instance.root, instance.template):
        raise DataError(
            "exemplar (root, template) must differ from the queried instance"
        )
    if spec.task is Task.ROOT_PATTERN:
        block = _load_template(f"oneshot_root_pattern.{lang}.txt").format(
            root=exemplar.root,
            template=exemplar.template,
            base_form=exemplar.base_form,
        )
    else:
        block = _load_template(f"oneshot_affix_build.{lang}.txt").format(
            base_form=exemplar.base_form,
            prefix=exemplar.prefix,
            suffix=exemplar.suffix,
            full_form=exemplar.full_form,
        )
    return f"{text}\n\n{block}"


def lenient_match(output: str, target: str) -> bool:
    """True iff the target equals a maximal Arabic-letter run of the output.

    Diacritics and tatweel are stripped from both sides first; runs are
    delimited by anything that is not an Arabic letter.
    """
    if not target:
        raise DataError("target must be non-empty")
    wanted = strip_diacritics(target)
    stripped = strip_diacritics(output)
    return any(run == wanted for run in _ARABIC_RUN.findall(stripped))


def complete(prompt: str, config: ProbeConfig) -> tuple[str, int]:
    """Send one chat completion; returns (text, attempt_count).

    Retries transient failures (connection errors, 429, 5xx) with
    exponential backoff up to ``retry_limit`` extra attempts.  401/403 raise
    AuthenticationError; other failures raise EndpointError carrying
    ``attempt_count``.
    """
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(config.api_key_var)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    payload = {
        "model": config.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
    }
    attempts = 0
    while True:
        attempts += 1
        failure: str | None = None
        try:
            response = requests.post(
                config.endpoint, json=payload, headers=headers, timeout=config.timeout
            )
        except requests.RequestException as exc:
            failure = f"transport error: {exc}"
        else:
            if response.status_code in (401, 403):
                raise AuthenticationError(
                    f"endpoint rejected credentials (HTTP {response.status_code})"
                )
            if response.status_code == 200:
                try:
                    text = response.json()["choices"][0]["message"]["content"]
                except (ValueError, KeyError, IndexError, TypeError) as exc:
                    error = EndpointError(f"malformed endpoint response: {exc}")
                    error.attempt_count = attempts
                    raise error from exc
                return text, attempts
            if response.status_code == 429 or response.status_code >= 500:
                failure = f"HTTP {response.status_code}"
            else:
                error = EndpointError(f"HTTP {response.status_code}")
                error.attempt_count = attempts
                raise error
        if attempts > config.retry_limit:
            error = EndpointError(f"{failure} after {attempts} attempts")
            error.attempt_count = attempts
            raise error
        time.sleep(config.retry_backoff * (2 ** (attempts - 1)))


def _probe_one(
    index: int,
    instance: DatasetInstance,
    prompt: str,
    target: str,
    spec: PromptSpec,
    config: ProbeConfig,
) -> ProbeResult:
    start = time.perf_counter()
    error: str | None = None
    raw = ""
    attempts = 0
    try:
        raw, attempts = complete(prompt, config)
    except AuthenticationError:
        raise
    except EndpointError as exc:
        error = str(exc)
        attempts = getattr(exc, "attempt_count", 0)
    latency = time.perf_counter() - start
    normalized = strip_diacritics(raw)
    return ProbeResult(
        instance_id=index,
        task=spec.task.value,
        language=spec.language.value,
        shots=spec.shots,
        model=config.model_name,
        root_category=instance.root_category.value,
        target=target,
        raw_output=raw,
        normalized_output=normalized,
        correct=error is None and lenient_match(raw, target),
        error=error,
        latency=latency,
        attempt_count=attempts,
    )


def run_probe(
    dataset: Sequence[DatasetInstance],
    spec: PromptSpec,
    config: ProbeConfig,
) -> list[ProbeResult]:
    """Probe every instance; results keep dataset order.

    One-shot specs without a fixed exemplar get a per-instance exemplar
    derived from DEFAULT_EXEMPLAR_ROOT.  Per-instance endpoint failures are
    recorded and the run continues; authentication errors abort.
    """
    if not dataset:
        raise DataError("dataset is empty")
    jobs = []
    for index, instance in enumerate(dataset):
        instance_spec = spec
        if spec.shots == 1 and spec.exemplar is None:
            instance_spec = replace(spec, exemplar=derive_exemplar(instance))
        prompt = render_prompt(instance, instance_spec)
        jobs.append((index, instance, prompt, target_for(instance, spec.task)))
    results: list[ProbeResult | None] = [None] * len(jobs)
    with ThreadPoolExecutor(max_workers=config.concurrency_limit) as pool:
        futures = [
            pool.submit(_probe_one, index, instance, prompt, target, spec, config)
            for index, instance, prompt, target in jobs
        ]
        try:
            for index, future in enumerate(futures):
                results[index] = future.result()
        except BaseException:
            pool.shutdown(wait=False, cancel_futures=True)
            raise
    return [r for r in results if r is not None]


def accuracy(
    results: Iterable[ProbeResult],
    where: Callable[[ProbeResult], bool] | None = None,
) -> float:
    """Percentage of correct results over the (filtered) subset."""
    subset = [r for r in results if where is None or where(r)]
    if not subset:
        raise DataError("accuracy undefined for an empty subset")
    return 100 * sum(r.correct for r in subset) / len(subset)


def format_accuracy(value: float) -> str:
    return f"{value:.2f}"


def task_key(result: ProbeResult) -> str:
    """Scoring bucket: root_pattern_real, root_pattern_nonce, or affix_build."""
    if result.task == Task.AFFIX_BUILD.value:
        return "affix_build"
    if result.root_category == "nonce":
        return "root_pattern_nonce"
    return "root_pattern_real"


# ---------------------------------------------------------------------------
# Results file (JSON lines, one ProbeResult per line)


def results_to_jsonl(results: Iterable[ProbeResult]) -> str:
    lines = [json.dumps(vars(r), ensure_ascii=False) for r in results]
    return "\n".join(lines) + "\n" if lines else ""


def parse_results(lines: Iterable[str]) -> list[ProbeResult]:
    results = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            results.append(ProbeResult(**json.loads(line)))
        except (json.JSONDecodeError, TypeError) as exc:
            raise DataError(f"line {line_no}: bad result record: {exc}") from exc
    return results


def load_results(path) -> list[ProbeResult]:
    with open(path, encoding="utf-8") as f:
        return parse_results(f)


def select_task_instances(
    dataset: Sequence[DatasetInstance], task: Task
) -> list[DatasetInstance]:
    """Rows a task runs on: unaffixed forms for root-pattern, affixed for affix-build."""
    if task is Task.ROOT_PATTERN:
        return [i for i in dataset if not i.has_affix]
    return [i for i in dataset if i.has_affix]
