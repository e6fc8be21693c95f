"""Load raw novel text, strip Gutenberg boilerplate, and segment into
chapters, paragraphs, and sentences with stable offsets into the body string.

All offsets are Unicode codepoint indices into ``Document.body`` so that
``body[start:end] == text`` holds for every unit.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BoilerplateError
from .resources import default_abbreviations

START_SENTINEL = re.compile(r"^[ \t]*\*\*\*\s*START OF.*$", re.IGNORECASE | re.MULTILINE)
END_SENTINEL = re.compile(r"^[ \t]*\*\*\*\s*END OF.*$", re.IGNORECASE | re.MULTILINE)

DEFAULT_CHAPTER_PATTERN = r"^[ \t]*CHAPTER\s+(?:[0-9]+|[IVXLCDM]+)\b[^\n]*$"

SINGLE_CHAPTER_FALLBACK = "single_chapter_fallback"
NO_SENTINELS = "no_gutenberg_sentinels"


@dataclass(frozen=True)
class RawText:
    source_id: str
    text: str


@dataclass(frozen=True)
class StripResult:
    body: str
    sentinels_found: bool


@dataclass(frozen=True)
class Sentence:
    index: int
    text: str
    start_offset: int
    end_offset: int


@dataclass(frozen=True)
class Paragraph:
    index: int
    text: str
    start_offset: int
    end_offset: int
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class Chapter:
    index: int
    heading: str
    paragraphs: tuple[Paragraph, ...]


@dataclass
class SegmentConfig:
    chapter_pattern: str = DEFAULT_CHAPTER_PATTERN
    keep_preamble: bool = False
    abbreviations: frozenset[str] = field(default_factory=default_abbreviations)


@dataclass
class Document:
    id: str
    title: str
    body: str
    chapters: tuple[Chapter, ...]
    flags: tuple[str, ...] = ()

    def paragraphs(self):
        for chapter in self.chapters:
            yield from chapter.paragraphs

    def sentences(self):
        for paragraph in self.paragraphs():
            yield from paragraph.sentences

    def chapter_paragraph_ids(self) -> dict[int, tuple[int, ...]]:
        """Chapter index -> global paragraph indices, in reading order."""
        return {c.index: tuple(p.index for p in c.paragraphs) for c in self.chapters}

    def reconstruct(self) -> str:
        """Rebuild the covered body slice from paragraph offsets.

        Equals ``body`` exactly when segmentation discarded nothing
        (the separators between paragraphs are recovered from the body).
        """
        paras = list(self.paragraphs())
        if not paras:
            return ""
        return self.body[paras[0].start_offset : paras[-1].end_offset]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "flags": list(self.flags),
            "body": self.body,
            "chapters": [
                {
                    "index": c.index,
                    "heading": c.heading,
                    "paragraphs": [
                        {
                            "index": p.index,
                            "start": p.start_offset,
                            "end": p.end_offset,
                            "sentences": [
                                {"index": s.index, "start": s.start_offset, "end": s.end_offset}
                                for s in p.sentences
                            ],
                        }
                        for p in c.paragraphs
                    ],
                }
                for c in self.chapters
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Document":
        body = data["body"]
        chapters = []
        for c in data["chapters"]:
            paragraphs = []
            for p in c["paragraphs"]:
                sentences = tuple(
                    Sentence(s["index"], body[s["start"] : s["end"]], s["start"], s["end"])
                    for s in p["sentences"]
                )
                paragraphs.append(
                    Paragraph(p["index"], body[p["start"] : p["end"]], p["start"], p["end"], sentences)
                )
            chapters.append(Chapter(c["index"], c["heading"], tuple(paragraphs)))
        return cls(
            id=data["id"],
            title=data.get("title", ""),
            body=body,
            chapters=tuple(chapters),
            flags=tuple(data.get("flags", [])),
        )

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), ensure_ascii=False, sort_keys=True, indent=1),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path) -> "Document":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def load_raw(path, source_id: str | None = None) -> RawText:
    """Read a UTF-8 novel file and normalize newlines to \\n exactly once."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    text = re.sub(r"\r\n?", "\n", text)
    if not text:
        raise BoilerplateError(f"empty input file: {path}")
    return RawText(source_id=source_id or path.stem, text=text)


def strip_boilerplate(raw: RawText) -> StripResult:
    """Keep the text between the Gutenberg start/end sentinel lines.

    Without a complete sentinel pair the text passes through unchanged and
    ``sentinels_found`` is False so callers can flag the novel.
    """
    start = START_SENTINEL.search(raw.text)
    end = END_SENTINEL.search(raw.text)
    if start is None or end is None:
        return StripResult(body=raw.text, sentinels_found=False)
    if end.start() < start.end():
        raise BoilerplateError(f"Gutenberg sentinels out of order in {raw.source_id}")
    body = raw.text[start.end() : end.start()].strip("\n")
    if not body.strip():
        raise BoilerplateError(f"empty body after boilerplate stripping: {raw.source_id}")
    return StripResult(body=body, sentinels_found=True)


def _paragraph_spans(body: str, start: int, end: int) -> list[tuple[int, int]]:
    """Spans of maximal runs of non-blank lines inside body[start:end]."""
    spans = []
    pos = start
    run_start = None
    while pos < end:
        nl = body.find("\n", pos, end)
        line_end = end if nl == -1 else nl
        blank = body[pos:line_end].strip() == ""
        if blank:
            if run_start is not None:
                spans.append((run_start, prev_line_end))
                run_start = None
        else:
            if run_start is None:
                run_start = pos + (len(body[pos:line_end]) - len(body[pos:line_end].lstrip()))
            prev_line_end = line_end - (len(body[pos:line_end]) - len(body[pos:line_end].rstrip()))
        pos = line_end + 1
    if run_start is not None:
        spans.append((run_start, prev_line_end))
    return spans


_TERMINATOR = re.compile(r"[.!?]+[\"'”’)]*")


def _is_abbreviation(text: str, dot_pos: int, abbreviations: frozenset[str]) -> bool:
    """True when the token ending at text[dot_pos] ('.') is a known abbreviation
    or a single initial such as 'G.'."""
    i = dot_pos - 1
    while i >= 0 and not text[i].isspace():
        i -= 1
    word = text[i + 1 : dot_pos].lstrip("\"'(“‘")
    if not word:
        return False
    if word in abbreviations:
        return True
    return len(word) == 1 and word.isupper()


def split_sentences(
    text: str, base_offset: int = 0, abbreviations: frozenset[str] | None = None
) -> list[tuple[int, int]]:
    """Deterministic sentence spans: a terminator (. ! ?) closes a sentence
    when followed by whitespace and a capital or opening quote, unless the
    preceding token is on the abbreviation stoplist."""
    if abbreviations is None:
        abbreviations = default_abbreviations()
    spans = []
    sent_start = 0
    n = len(text)
    for match in _TERMINATOR.finditer(text):
        end = match.end()
        if end >= n:
            break
        if text[match.start()] == "." and _is_abbreviation(text, match.start(), abbreviations):
            continue
        j = end
        while j < n and text[j] in " \t\n":
            j += 1
        if j == end or j >= n:
            continue
        nxt = text[j]
        if nxt.isupper() or nxt in "\"'“‘(":
            spans.append((sent_start, end))
            sent_start = j
    if sent_start < n:
        spans.append((sent_start, n))
    out = []
    for s, e in spans:
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if e > s:
            out.append((base_offset + s, base_offset + e))
    return out


def segment_document(
    body: str, config: SegmentConfig | None = None, doc_id: str = "", title: str = ""
) -> Document:
    """Split a stripped body into chapters (by heading pattern), paragraphs
    (blank-line blocks), and sentences.

    Zero headings fall back to a single chapter 1 covering the whole body,
    flagged ``single_chapter_fallback``.  Pre-heading text becomes chapter 0
    only when ``config.keep_preamble`` is set, else it is discarded.
    """
    if config is None:
        config = SegmentConfig()
    if not body.strip():
        raise BoilerplateError("cannot segment an empty body")
    heading_re = re.compile(config.chapter_pattern, re.IGNORECASE | re.MULTILINE)
    headings = list(heading_re.finditer(body))
    flags: list[str] = []

    regions: list[tuple[int, str, int, int]] = []  # (chapter_index, heading, start, end)
    if not headings:
        regions.append((1, "", 0, len(body)))
        flags.append(SINGLE_CHAPTER_FALLBACK)
    else:
        if config.keep_preamble and body[: headings[0].start()].strip():
            regions.append((0, "", 0, headings[0].start()))
        for i, match in enumerate(headings):
            start = match.end()
            end = headings[i + 1].start() if i + 1 < len(headings) else len(body)
            regions.append((i + 1, match.group().strip(), start, end))

    chapters = []
    para_index = 0
    sent_index = 0
    for chap_index, heading, start, end in regions:
        paragraphs = []
        for p_start, p_end in _paragraph_spans(body, start, end):
            p_text = body[p_start:p_end]
            sentences = []
            for s_start, s_end in split_sentences(p_text, p_start, config.abbreviations):
                sentences.append(Sentence(sent_index, body[s_start:s_end], s_start, s_end))
                sent_index += 1
            paragraphs.append(Paragraph(para_index, p_text, p_start, p_end, tuple(sentences)))
            para_index += 1
        if paragraphs:
            chapters.append(Chapter(chap_index, heading, tuple(paragraphs)))
    if not chapters:
        raise BoilerplateError("segmentation produced no chapters with text")
    # Reindex so chapter numbers stay contiguous if some regions were empty.
    base = chapters[0].index
    chapters = [
        Chapter(base + i, c.heading, c.paragraphs) for i, c in enumerate(chapters)
    ]
    return Document(id=doc_id, title=title, body=body, chapters=tuple(chapters), flags=tuple(flags))


def ingest_file(path, config: SegmentConfig | None = None, doc_id: str | None = None) -> Document:
    """File -> stripped, segmented Document (the `ingest` CLI path)."""
    raw = load_raw(path, source_id=doc_id)
    stripped = strip_boilerplate(raw)
    doc = segment_document(stripped.body, config, doc_id=raw.source_id, title=raw.source_id)
    if not stripped.sentinels_found:
        doc.flags = doc.flags + (NO_SENTINELS,)
    return doc
