"""Optional chat-completion client for chapter-level component counting and
span-level labeling, with per-chapter cost telemetry.

Templates are stored dedented with trailing whitespace trimmed; rendering is
a plain str.format substitution, so doubled braces produce the literal JSON
skeletons.  List-valued variables are joined with ", ".

No network traffic happens unless an HTTP transport is explicitly
constructed; the mock transport replays a JSONL script deterministically.
"""

from __future__ import annotations

import json
import os
import re
import string
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .components import COMPONENTS
from .errors import ResponseError, TemplateError, TransportError
from .ingest import Document
from .stats import ScoreTable

TAG_DESCRIPTIONS = {
    "N": "Count all named mentions of this person (including name variants).",
    "A": "Count each verb of physical action (exclude speech, thought, and feeling verbs).",
    "C": "Count blocks of directly quoted dialogue, paraphrased speech, and letters.",
    "I": "Count each verb expressing thought, feeling, intention, or interpretation.",
    "DN": "Count sentences describing the character by the narrator.",
    "DC": "Count sentences where other characters discuss the character.",
}


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str

    def placeholders(self) -> set[str]:
        fields = set()
        for _text, name, _spec, _conv in string.Formatter().parse(self.body):
            if name:
                fields.add(name)
        return fields


_TEMPLATE_BODIES = {
    "all-tags-chunk": """\
Please analyze the following text and tag all instances of the following characters:
{characters}

For each character, include all name variants under the normalized form above (e.g., tags for "Lizzy" should be counted under "Elizabeth")

For each character, provide the following tags:
- N: Count all named mentions of this person (including name variants).
- A: Count each verb of physical action (exclude speech, thought, and feeling verbs).
- C: Count blocks of directly quoted dialogue, paraphrased speech, and letters.
- I: Count each verb expressing thought, feeling, intention, or interpretation.
- DN: Count sentences describing the character by the narrator.
- DC: Count sentences where other characters discuss the character.

Text:
{text}

Return the results as a JSON object with each character as a key and their tags as values. Only include characters that have at least one non-zero tag.
If a character has all tags equal to zero, omit it from the JSON output entirely.

Strictly output JSON in this format:
{{
    "Character1": {{"N": count1, "A": countA1, "C": countC1, "I": countI1, "DN": countDN1, "DC": countDC1}},
    "Character2": {{"N": count2, "A": countA2, "C": countC2, "I": countI2, "DN": countDN2, "DC": countDC2}},
    ...
}}""",
    "single-tag-chunk": """\
Please analyze the following text and tag all instances of the following characters:
{characters}

For each character, include all name variants under the normalized form above (e.g., tags for "Lizzy" should be counted under "Elizabeth")

Provide the counts for the '{tag}' tag only.

The tag '{tag}' is defined as:
- {tag_description}

Text:
{text}

Return the results as a JSON object with each character as a key and its '{tag}' count as value. Only include characters that have a non-zero count.
If a character has '{tag}' count equal to zero, omit it from the JSON output entirely.

Strictly output JSON in this format:
{{
    "Character1": count1,
    "Character2": count2,
    ...
}}""",
    "characters-present": """\
{booktitle} section: {text}

Character list: {characters}

Which characters from the character list are present in the {booktitle} section? Include any character that are mentioned or referred to, even if they are not physically present in the scenes.

Strictly output a list of the characters who are present in this format: [character1, character2, etc.]""",
    "is-character": """\
Consider the full text of {book} and all the characters it contains. Each character can be referred to by multiple different variants of ther name. Is {character_name} a character in {book}? Answer yes or no.

Answer:""",
    "name-mapping": """\
Consider the following list of characters in {book}:
{characters}

Which character from this list does the name {character_name} refer to? Answer with just the character name.

Answer:""",
    "span-DN": """\
Please analyze the following text for places where the narrator describes the following characters:
{characters}

For each character, list all instances where the narration describes something about the character's looks, manner, or dress. If a character is not described, do not include them.

Text:
{text}

Return the results as a JSON object with each character as a key and the list of descriptions as the value. Do not include instances of the character speaking, only descriptions from the narrator.

Strictly output JSON in this format:
{{
    "Character1": [phrase1, phrase2, ...],
    "Character2": [phrase1, ...],
    ...
}}""",
    "span-DC": """\
Please analyze the following dialogue for mentions of the following characters:
{characters}

Surrounding text for context:
{chunk}

Dialogue sentence (speaker: {character_name}):
{dialogue_sentence}

Resolve any pronouns, relational mentions, or name variants in the dialogue sentence to the proper character name.

Give your response as a JSON object with pronouns/mentions/names as the key and the character it refers to as the value in this format:
{{
    "pronoun": character1,
    "pronoun": character2,
    ...
}}""",
    "span-C": """\
Please analyze the dialogue and letters in the following text.

Full text for context:
{text}

Dialogue turn (or letter):{dialogue_turn}

Character list: {characters}

Which character from the character list is the speaker (or writer) of this dialogue turn (or letter)?

Give just the character name as your response.

Answer:""",
    "span-I": """\
Please analyze the following text for descriptions of the feelings and thoughts of the following characters:
{characters}

For each character, list all instances where the narration shows us the characters thoughts, feelings, intentions, or perceptions.

Text:
{text}

Return the results as a JSON object with each character as a key and the list of thoughts/feelings as the value. Do not include instances of the character speaking, only descriptions from the narrator.

Strictly output JSON in this format:
{{
    "Character1": [phrase1, phrase2, ...],
    "Character2": [phrase1, ...],
    ...
}}""",
    "span-A": """\
Please analyze the following text for actions performed by the following characters:
{characters}

For each character, list all physical actions they perform. Do not include acts of talking, speaking, asking questions, or writing. Do not include acts of thinking or feeling.

Text:
{text}

Return the results as a JSON object with each character as a key and the list of actions as the value.

Strictly output JSON in this format:
{{
    "Character1": [phrase1, phrase2, ...],
    "Character2": [phrase1, ...],
    ...
}}""",
    "span-N": """\
Please analyze the following text for mentions of the following characters:
{characters}

For each character, list all variants of their name that are used to refer to them in the text. Do not include pronouns, only proper names. If they are referred to with and without a title, include both variants.

Text:
{text}

Return the results as a JSON object with each character as a key and the list of name variants as the value.

Strictly output JSON in this format:
{{
    "Character1": [name1, name2, ...],
    "Character2": [name1, ...],
    ...
}}""",
}

TEMPLATES = {name: PromptTemplate(name, body) for name, body in _TEMPLATE_BODIES.items()}


def render_prompt(template: PromptTemplate | str, variables: dict) -> str:
    """Fill a template; lists join with ', '; a missing placeholder raises
    TemplateError naming it."""
    if isinstance(template, str):
        template = TEMPLATES[template]
    prepared = {}
    for key, value in variables.items():
        if isinstance(value, (list, tuple)):
            prepared[key] = ", ".join(str(v) for v in value)
        else:
            prepared[key] = value
    for name in sorted(template.placeholders()):
        if name not in prepared:
            raise TemplateError(name)
    return template.body.format(**prepared)


_FENCE = re.compile(r"```(?:json)?\s*\n?(.*?)```", re.DOTALL)
_TRAILING_COMMA = re.compile(r",(\s*[}\]])")


def _repair_json(raw: str) -> str:
    match = _FENCE.search(raw)
    if match:
        raw = match.group(1)
    return _TRAILING_COMMA.sub(r"\1", raw.strip())


def parse_count_response(
    raw: str, expected_tags: list[str], characters: list[str] | None = None
) -> dict[str, dict[str, int]]:
    """Tolerant parse of a count response into character -> tag -> count.

    Single-tag responses (character -> int) are accepted when exactly one
    tag is expected.  Characters absent from the response get all-zero
    vectors when ``characters`` is given.  One repair pass (fence stripping,
    trailing-comma removal) runs before giving up.
    """
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, TypeError):
        try:
            data = json.loads(_repair_json(raw))
        except (json.JSONDecodeError, TypeError):
            raise ResponseError("unparseable JSON response", raw=raw)
    if not isinstance(data, dict):
        raise ResponseError("response is not a JSON object", raw=raw)

    def check_count(value, where):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ResponseError(f"non-integer count for {where}: {value!r}", raw=raw)
        if value < 0:
            raise ResponseError(f"negative count for {where}: {value!r}", raw=raw)
        return value

    counts: dict[str, dict[str, int]] = {}
    for name, payload in data.items():
        if isinstance(payload, dict):
            counts[name] = {
                tag: check_count(payload.get(tag, 0), f"{name}.{tag}")
                for tag in expected_tags
            }
        else:
            if len(expected_tags) != 1:
                raise ResponseError(
                    f"scalar count for {name!r} but several tags expected", raw=raw
                )
            counts[name] = {expected_tags[0]: check_count(payload, name)}
    if characters:
        for name in characters:
            counts.setdefault(name, {tag: 0 for tag in expected_tags})
    return counts


# ---------------------------------------------------------------------------
# Transports


@dataclass(frozen=True)
class TransportReply:
    content: str
    elapsed: float


@dataclass
class EndpointConfig:
    base_url: str
    model: str
    temperature: float = 0.0
    api_key_env: str = "CHARSPACE_API_KEY"
    timeout: float = 60.0
    max_retries: int = 3

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")


class MockTransport:
    """Replays scripted responses: one JSON object per line with a
    ``content`` string and optional ``elapsed`` seconds.  Replies are bound
    to the request's plan index, so execution order cannot change results."""

    deterministic = True

    def __init__(self, script_path):
        self.replies = []
        for line in Path(script_path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            self.replies.append(
                TransportReply(content=entry["content"], elapsed=float(entry.get("elapsed", 0.0)))
            )
        self.requests: list[dict] = []

    def send(self, request: dict, index: int) -> TransportReply:
        if index >= len(self.replies):
            raise TransportError(f"mock script exhausted at request {index}")
        self.requests.append(request)
        return self.replies[index]


class HttpTransport:
    """POSTs chat-completion requests; reads choices[0].message.content."""

    deterministic = False

    def __init__(self, config: EndpointConfig):
        self.config = config

    def send(self, request: dict, index: int) -> TransportReply:
        import requests as _requests  # deferred so offline runs never import it

        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.config.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        delay = 0.5
        last_error = None
        for _attempt in range(self.config.max_retries):
            started = time.monotonic()
            try:
                response = _requests.post(
                    self.config.base_url, json=request, headers=headers,
                    timeout=self.config.timeout,
                )
                response.raise_for_status()
                payload = response.json()
                content = payload["choices"][0]["message"]["content"]
                return TransportReply(content=content, elapsed=time.monotonic() - started)
            except Exception as exc:  # noqa: BLE001 - every failure is retryable here
                last_error = exc
                time.sleep(delay)
                delay *= 2
        raise TransportError(f"request failed after {self.config.max_retries} retries: {last_error}")


# ---------------------------------------------------------------------------
# Chapter-count runs


@dataclass(frozen=True)
class GranularityMode:
    chunked: bool
    per_character: bool
    per_tag: bool

    @classmethod
    def parse(cls, mode: str) -> "GranularityMode":
        """Modes look like 'full-all-all' or 'chunk-each-each':
        input granularity, character granularity, tag granularity."""
        parts = mode.split("-")
        if len(parts) != 3 or parts[0] not in ("full", "chunk") \
                or parts[1] not in ("all", "each") or parts[2] not in ("all", "each"):
            raise ValueError(f"unknown granularity mode {mode!r}")
        return cls(chunked=parts[0] == "chunk",
                   per_character=parts[1] == "each",
                   per_tag=parts[2] == "each")

    def label(self) -> str:
        return "-".join([
            "chunk" if self.chunked else "full",
            "each" if self.per_character else "all",
            "each" if self.per_tag else "all",
        ])


ALL_MODES = tuple(
    GranularityMode(c, p, t) for c in (False, True) for p in (False, True) for t in (False, True)
)

CHUNK_TOKENS = 1000


def whitespace_tokens(text: str) -> list[str]:
    return text.split()


def chunk_text(text: str, chunk_tokens: int = CHUNK_TOKENS) -> list[str]:
    tokens = whitespace_tokens(text)
    if not tokens:
        return []
    return [
        " ".join(tokens[i : i + chunk_tokens]) for i in range(0, len(tokens), chunk_tokens)
    ]


@dataclass(frozen=True)
class CostTelemetry:
    input_token_ratio: float
    output_token_ratio: float
    relative_elapsed: float  # seconds per chapter token, times 100


@dataclass(frozen=True)
class ChapterSkipped:
    chapter_index: int
    reason: str


@dataclass
class AnnotateResult:
    pred: ScoreTable
    telemetry: dict[int, CostTelemetry]
    skipped: list[ChapterSkipped]
    requests_sent: int


def plan_chapter_requests(chapter_text: str, characters: list[str],
                          mode: GranularityMode) -> list[dict]:
    """The deterministic request plan for one chapter: one entry per prompt,
    carrying the prompt text and the (characters, tags) it asks about."""
    chunks = chunk_text(chapter_text) if mode.chunked else [chapter_text]
    char_groups = [[c] for c in characters] if mode.per_character else [list(characters)]
    tag_groups = [[t] for t in COMPONENTS] if mode.per_tag else [list(COMPONENTS)]
    plan = []
    for chunk in chunks:
        for chars in char_groups:
            for tags in tag_groups:
                if mode.per_tag:
                    prompt = render_prompt("single-tag-chunk", {
                        "characters": chars, "tag": tags[0],
                        "tag_description": TAG_DESCRIPTIONS[tags[0]], "text": chunk,
                    })
                else:
                    prompt = render_prompt("all-tags-chunk", {
                        "characters": chars, "text": chunk,
                    })
                plan.append({"prompt": prompt, "characters": chars, "tags": tags})
    return plan


def run_chapter_counts(
    doc: Document,
    characters: list[str],
    mode: GranularityMode,
    transport,
    model: str = "",
    temperature: float = 0.0,
    parallelism: int = 4,
) -> AnnotateResult:
    """Execute the granularity mode over every chapter of a document.

    Counts from chunk/character/tag slices are summed into one PredTable.
    Transport failures skip the chapter (recorded) and the run continues.
    """
    pred = ScoreTable()
    telemetry: dict[int, CostTelemetry] = {}
    skipped: list[ChapterSkipped] = []
    requests_sent = 0

    plans = []
    for chapter in doc.chapters:
        text = "\n\n".join(p.text for p in chapter.paragraphs)
        plans.append((chapter.index, text, plan_chapter_requests(text, characters, mode)))

    base_index = 0
    for chapter_index, text, plan in plans:
        chapter_tokens = len(whitespace_tokens(text))
        requests = [
            {
                "model": model,
                "messages": [{"role": "user", "content": entry["prompt"]}],
                "temperature": temperature,
            }
            for entry in plan
        ]
        try:
            if parallelism > 1 and len(requests) > 1:
                with ThreadPoolExecutor(max_workers=parallelism) as pool:
                    replies = list(pool.map(
                        lambda pair: transport.send(pair[1], base_index + pair[0]),
                        enumerate(requests),
                    ))
            else:
                replies = [
                    transport.send(request, base_index + i)
                    for i, request in enumerate(requests)
                ]
        except TransportError as exc:
            skipped.append(ChapterSkipped(chapter_index, str(exc)))
            base_index += len(requests)
            continue
        base_index += len(requests)
        requests_sent += len(requests)

        totals: dict[str, dict[str, int]] = {
            name: dict.fromkeys(COMPONENTS, 0) for name in characters
        }
        input_tokens = sum(len(whitespace_tokens(entry["prompt"])) for entry in plan)
        output_tokens = 0
        elapsed = 0.0
        for entry, reply in zip(plan, replies):
            output_tokens += len(whitespace_tokens(reply.content))
            elapsed += reply.elapsed
            counts = parse_count_response(reply.content, entry["tags"], entry["characters"])
            for name, tags in counts.items():
                if name not in totals:
                    continue  # names outside the requested cast are dropped
                for tag, value in tags.items():
                    totals[name][tag] += value
        for name, tags in totals.items():
            if any(tags.values()):
                pred.add(doc.id, chapter_index, name, tags)
        if chapter_tokens > 0:
            telemetry[chapter_index] = CostTelemetry(
                input_token_ratio=input_tokens / chapter_tokens,
                output_token_ratio=output_tokens / chapter_tokens,
                relative_elapsed=elapsed / chapter_tokens * 100.0,
            )
    return AnnotateResult(pred=pred, telemetry=telemetry, skipped=skipped,
                          requests_sent=requests_sent)


def external_name_resolver(transport, book: str, model: str = "", temperature: float = 0.0):
    """An alias-mapping resolver backed by the name-mapping prompt."""
    state = {"index": 0}

    def resolve(name: str, choices: list[str]):
        prompt = render_prompt("name-mapping", {
            "book": book, "characters": choices, "character_name": name,
        })
        request = {
            "model": model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
        }
        reply = transport.send(request, state["index"])
        state["index"] += 1
        answer = reply.content.strip()
        return answer if answer in choices else None

    return resolve


def book_telemetry(doc: Document, telemetry: dict[int, CostTelemetry]) -> CostTelemetry:
    """Book-level ratios: the chapter-token-weighted means of the
    per-chapter ratios (equivalently, book totals over book tokens)."""
    weights = {}
    for chapter in doc.chapters:
        text = "\n\n".join(p.text for p in chapter.paragraphs)
        weights[chapter.index] = len(whitespace_tokens(text))
    total = sum(weights[c] for c in telemetry)
    if total == 0:
        raise ValueError("no chapter tokens to aggregate")

    def weighted(attr: str) -> float:
        return sum(getattr(telemetry[c], attr) * weights[c] for c in telemetry) / total

    return CostTelemetry(
        input_token_ratio=weighted("input_token_ratio"),
        output_token_ratio=weighted("output_token_ratio"),
        relative_elapsed=weighted("relative_elapsed"),
    )


def telemetry_to_json(telemetry: dict[int, CostTelemetry]) -> dict:
    return {
        str(chapter): {
            "input_token_ratio": t.input_token_ratio,
            "output_token_ratio": t.output_token_ratio,
            "relative_elapsed": t.relative_elapsed,
        }
        for chapter, t in sorted(telemetry.items())
    }
