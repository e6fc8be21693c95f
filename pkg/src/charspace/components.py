"""Span-level tagging of the six character components N/A/C/I/DC/DN.

Units, per tag:
  N   one count per proper-name mention (pronouns and nominals excluded)
  C   one count per distinct sentence of a speaker's quoted speech/writing
  A/I one count per verb supersense span outside quoted sentences whose
      nearest preceding same-sentence character mention is the subject
  DC  one count per (speaker, quoted sentence, discussed character != speaker)
  DN  one count per narration sentence describing a mentioned character

Quote partition: a sentence listed by any quote feeds C/DC only; sentences
fully outside quotes feed A/I/DN only.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .annotations import AnnotationBundle, Character, UNKNOWN_SPEAKER
from .ingest import Document
from .resources import default_appearance_terms, supersense_inventory

COMPONENTS = ("N", "A", "C", "I", "DC", "DN")

UNATTRIBUTED_CHAR_ID = -1
UNATTRIBUTED_NAME = "UNATTRIBUTED"

DEFAULT_INTERIORITY = frozenset({"verb.cognition", "verb.emotion", "verb.perception"})


def _default_action_set() -> frozenset[str]:
    verbs = {s for s in supersense_inventory() if s.startswith("verb.")}
    return frozenset(verbs - DEFAULT_INTERIORITY - {"verb.communication"})


@dataclass(frozen=True)
class VerbLexicon:
    """Supersense routing for the action/interiority split.

    ``verbnet_overrides`` maps a verb lemma to A, I, or EXCLUDE and wins
    over the supersense sets.
    """

    interiority_supersenses: frozenset[str] = DEFAULT_INTERIORITY
    action_supersenses: frozenset[str] = field(default_factory=_default_action_set)
    verbnet_overrides: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        overlap = self.interiority_supersenses & self.action_supersenses
        if overlap:
            raise ValueError(f"interiority and action supersense sets overlap: {sorted(overlap)}")


@dataclass(frozen=True)
class ComponentScores:
    char_id: int
    chapter_index: int
    t_N: int = 0
    t_A: int = 0
    t_C: int = 0
    t_I: int = 0
    t_DC: int = 0
    t_DN: int = 0

    @property
    def total_score(self) -> int:
        return self.t_N + self.t_A + self.t_C + self.t_I + self.t_DC + self.t_DN

    def as_dict(self) -> dict[str, int]:
        return {"N": self.t_N, "A": self.t_A, "C": self.t_C,
                "I": self.t_I, "DC": self.t_DC, "DN": self.t_DN}


@dataclass(frozen=True)
class TaggedSpan:
    component: str
    char_id: int
    chapter_index: int
    sentence_id: int
    start_token: int
    end_token: int
    speaker_char_id: int | None = None  # DC only

    def to_json(self) -> dict:
        data = {
            "component": self.component,
            "char_id": self.char_id,
            "chapter": self.chapter_index,
            "sentence_id": self.sentence_id,
            "start_token": self.start_token,
            "end_token": self.end_token,
        }
        if self.speaker_char_id is not None:
            data["speaker_char_id"] = self.speaker_char_id
        return data


@dataclass(frozen=True)
class ChapterWindow:
    """A chapter expressed as the set of bundle paragraph ids it covers."""

    index: int
    paragraph_ids: frozenset[int]


def full_window(bundle: AnnotationBundle, index: int = 1) -> ChapterWindow:
    return ChapterWindow(index=index, paragraph_ids=frozenset(bundle.paragraph_ids))


def windows_from_document(doc: Document) -> list[ChapterWindow]:
    """Chapter windows from a segmented Document.

    Assumes the bundle's paragraph ids follow the same reading order as the
    Document's global paragraph indices (true for bundles produced from the
    same segmentation; a mismatch in totals should be treated as a warning
    by callers).
    """
    return [
        ChapterWindow(index=ci, paragraph_ids=frozenset(pids))
        for ci, pids in sorted(doc.chapter_paragraph_ids().items())
    ]


class _ChapterContext:
    """Precomputed lookups for tagging one chapter of one bundle."""

    def __init__(self, bundle: AnnotationBundle, registry: list[Character], window: ChapterWindow):
        self.bundle = bundle
        self.window = window
        self.char_of_cluster: dict[int, int] = {}
        for c in registry:
            for cluster in c.cluster_ids:
                self.char_of_cluster[cluster] = c.char_id

        self.sentences_in_window = {
            sid for sid, pid in bundle.sentence_paragraph.items()
            if pid in window.paragraph_ids
        }
        # Sentences covered by any quote (document-wide, for the partition rule).
        self.quoted_sentences: set[int] = set()
        for q in bundle.quotes:
            self.quoted_sentences.update(q.sentence_ids)

        # Character mentions grouped by the sentence of their start token.
        self.char_mentions_by_sentence: dict[int, list] = defaultdict(list)
        for m in bundle.mentions:
            char_id = self.char_of_cluster.get(m.cluster_id)
            if char_id is None:
                continue
            sid = bundle.token(m.start_token).sentence_id
            self.char_mentions_by_sentence[sid].append((m, char_id))
        for spans in self.char_mentions_by_sentence.values():
            spans.sort(key=lambda pair: (pair[0].start_token, pair[0].end_token))

    def in_window(self, sentence_id: int) -> bool:
        return sentence_id in self.sentences_in_window

    def speaker_char(self, quote) -> int:
        if quote.speaker_cluster == UNKNOWN_SPEAKER:
            return UNATTRIBUTED_CHAR_ID
        return self.char_of_cluster.get(quote.speaker_cluster, UNATTRIBUTED_CHAR_ID)

    def nearest_preceding_mention(self, sentence_id: int, before_token: int):
        """The closest character mention in the sentence ending before
        ``before_token``; None when no character mention precedes it."""
        best = None
        for m, char_id in self.char_mentions_by_sentence.get(sentence_id, ()):
            if m.end_token < before_token:
                if best is None or m.end_token > best[0].end_token:
                    best = (m, char_id)
        return best


def count_names(bundle, registry, window) -> tuple[dict[int, int], list[TaggedSpan]]:
    """t_N: proper-name mentions per character inside the chapter."""
    ctx = _ChapterContext(bundle, registry, window)
    return _count_names(ctx)


def _count_names(ctx: _ChapterContext):
    counts: dict[int, int] = defaultdict(int)
    spans: list[TaggedSpan] = []
    for sid, pairs in ctx.char_mentions_by_sentence.items():
        if not ctx.in_window(sid):
            continue
        for m, char_id in pairs:
            if m.prop != "PROPER":
                continue
            counts[char_id] += 1
            spans.append(TaggedSpan("N", char_id, ctx.window.index, sid, m.start_token, m.end_token))
    return dict(counts), spans


def tag_communication(bundle, registry, window) -> tuple[dict[int, int], list[TaggedSpan]]:
    """t_C: distinct quoted sentences per speaker; unknown speakers pool
    under the UNATTRIBUTED pseudo-character."""
    ctx = _ChapterContext(bundle, registry, window)
    return _tag_communication(ctx)


def _tag_communication(ctx: _ChapterContext):
    counted: set[tuple[int, int]] = set()  # (speaker_char, sentence)
    spans: list[TaggedSpan] = []
    for q in ctx.bundle.quotes:
        speaker = ctx.speaker_char(q)
        for sid in q.sentence_ids:
            if not ctx.in_window(sid):
                continue
            key = (speaker, sid)
            if key in counted:
                continue
            counted.add(key)
            lo, hi = ctx.bundle.sentence_tokens[sid]
            spans.append(TaggedSpan("C", speaker, ctx.window.index, sid, lo, hi))
    counts: dict[int, int] = defaultdict(int)
    for speaker, _sid in counted:
        counts[speaker] += 1
    return dict(counts), spans


def tag_action_interiority(
    bundle, registry, lexicon: VerbLexicon, window
) -> tuple[dict[int, int], dict[int, int], list[TaggedSpan]]:
    """(t_A, t_I): verb supersense spans in narration sentences, attributed
    to the nearest preceding character mention in the same sentence."""
    ctx = _ChapterContext(bundle, registry, window)
    return _tag_action_interiority(ctx, lexicon)


def _tag_action_interiority(ctx: _ChapterContext, lexicon: VerbLexicon):
    a_counts: dict[int, int] = defaultdict(int)
    i_counts: dict[int, int] = defaultdict(int)
    spans: list[TaggedSpan] = []
    for span in ctx.bundle.supersenses:
        if not span.label.startswith("verb."):
            continue
        token = ctx.bundle.token(span.start_token)
        sid = token.sentence_id
        if not ctx.in_window(sid) or sid in ctx.quoted_sentences:
            continue
        subject = ctx.nearest_preceding_mention(sid, span.start_token)
        if subject is None:
            continue
        char_id = subject[1]
        override = lexicon.verbnet_overrides.get(token.lemma)
        if override == "EXCLUDE":
            continue
        if override == "I":
            component = "I"
        elif override == "A":
            component = "A"
        elif span.label in lexicon.interiority_supersenses:
            component = "I"
        elif span.label in lexicon.action_supersenses:
            component = "A"
        else:
            continue  # verb.communication and anything unrouted
        if component == "I":
            i_counts[char_id] += 1
        else:
            a_counts[char_id] += 1
        spans.append(TaggedSpan(component, char_id, ctx.window.index, sid,
                                span.start_token, span.end_token))
    return dict(a_counts), dict(i_counts), spans


def tag_discussion(bundle, registry, window) -> tuple[dict[int, int], list[TaggedSpan]]:
    """t_DC: per quoted sentence, each distinct character other than the
    speaker mentioned inside the quote counts once; spans are directed
    speaker -> target (speaker UNATTRIBUTED when the quote is)."""
    ctx = _ChapterContext(bundle, registry, window)
    return _tag_discussion(ctx)


def _tag_discussion(ctx: _ChapterContext):
    counts: dict[int, int] = defaultdict(int)
    spans: list[TaggedSpan] = []
    seen: set[tuple[int, int, int]] = set()  # (speaker, sentence, target)
    for q in ctx.bundle.quotes:
        speaker = ctx.speaker_char(q)
        for sid in q.sentence_ids:
            if not ctx.in_window(sid):
                continue
            for m, char_id in ctx.char_mentions_by_sentence.get(sid, ()):
                if not (q.start_token <= m.start_token and m.end_token <= q.end_token):
                    continue
                if char_id == speaker:
                    continue
                key = (speaker, sid, char_id)
                if key in seen:
                    continue
                seen.add(key)
                counts[char_id] += 1
                spans.append(TaggedSpan("DC", char_id, ctx.window.index, sid,
                                        m.start_token, m.end_token,
                                        speaker_char_id=speaker))
    return dict(counts), spans


def tag_narrator_description(
    bundle, registry, window, appearance_lexicon: frozenset[str] | None = None
) -> tuple[dict[int, int], list[TaggedSpan]]:
    """t_DN: narration sentences (fully outside quotes) that mention the
    character and carry a descriptive cue: a copula whose subject resolves
    to the character, or any appearance-lexicon term in the sentence."""
    ctx = _ChapterContext(bundle, registry, window)
    return _tag_narrator_description(ctx, appearance_lexicon)


def _tag_narrator_description(ctx: _ChapterContext, appearance_lexicon):
    if appearance_lexicon is None:
        appearance_lexicon = default_appearance_terms()
    tokens_by_sentence: dict[int, list] = defaultdict(list)
    for t in ctx.bundle.tokens:
        tokens_by_sentence[t.sentence_id].append(t)

    counts: dict[int, int] = defaultdict(int)
    spans: list[TaggedSpan] = []
    for sid, pairs in sorted(ctx.char_mentions_by_sentence.items()):
        if not ctx.in_window(sid) or sid in ctx.quoted_sentences:
            continue
        mentioned = sorted({char_id for _m, char_id in pairs})
        if not mentioned:
            continue
        sentence_tokens = tokens_by_sentence[sid]
        has_appearance_term = any(
            t.word.lower() in appearance_lexicon or t.lemma.lower() in appearance_lexicon
            for t in sentence_tokens
        )
        copula_subjects: set[int] = set()
        for t in sentence_tokens:
            if t.lemma.lower() == "be":
                subject = ctx.nearest_preceding_mention(sid, t.token_id)
                if subject is not None:
                    copula_subjects.add(subject[1])
        lo, hi = ctx.bundle.sentence_tokens[sid]
        for char_id in mentioned:
            if has_appearance_term or char_id in copula_subjects:
                counts[char_id] += 1
                spans.append(TaggedSpan("DN", char_id, ctx.window.index, sid, lo, hi))
    return dict(counts), spans


def score_chapter(
    bundle: AnnotationBundle,
    registry: list[Character],
    lexicon: VerbLexicon,
    window: ChapterWindow,
    appearance_lexicon: frozenset[str] | None = None,
) -> tuple[list[ComponentScores], list[TaggedSpan]]:
    """Aggregate all five taggers into one count vector per character.

    Characters whose vector is all zero are omitted from the output.
    """
    ctx = _ChapterContext(bundle, registry, window)
    n_counts, n_spans = _count_names(ctx)
    c_counts, c_spans = _tag_communication(ctx)
    a_counts, i_counts, ai_spans = _tag_action_interiority(ctx, lexicon)
    dc_counts, dc_spans = _tag_discussion(ctx)
    dn_counts, dn_spans = _tag_narrator_description(ctx, appearance_lexicon)

    ids = set().union(n_counts, c_counts, a_counts, i_counts, dc_counts, dn_counts)
    scores = []
    for char_id in sorted(ids):
        vector = ComponentScores(
            char_id=char_id,
            chapter_index=window.index,
            t_N=n_counts.get(char_id, 0),
            t_A=a_counts.get(char_id, 0),
            t_C=c_counts.get(char_id, 0),
            t_I=i_counts.get(char_id, 0),
            t_DC=dc_counts.get(char_id, 0),
            t_DN=dn_counts.get(char_id, 0),
        )
        if vector.total_score > 0:
            scores.append(vector)
    spans = n_spans + c_spans + ai_spans + dc_spans + dn_spans
    spans.sort(key=lambda s: (COMPONENTS.index(s.component), s.sentence_id,
                              s.start_token, s.char_id))
    return scores, spans


def score_document(bundle, registry, lexicon, windows, appearance_lexicon=None):
    """score_chapter over every window, concatenated in chapter order."""
    all_scores: list[ComponentScores] = []
    all_spans: list[TaggedSpan] = []
    for window in sorted(windows, key=lambda w: w.index):
        scores, spans = score_chapter(bundle, registry, lexicon, window, appearance_lexicon)
        all_scores.extend(scores)
        all_spans.extend(spans)
    return all_scores, all_spans


def character_names(registry: list[Character]) -> dict[int, str]:
    names = {c.char_id: c.canonical_name for c in registry}
    names[UNATTRIBUTED_CHAR_ID] = UNATTRIBUTED_NAME
    return names


def write_scores_csv(path, novel_id: str, scores: list[ComponentScores],
                     registry: list[Character]) -> None:
    names = character_names(registry)
    rows = sorted(scores, key=lambda s: (s.chapter_index, s.char_id))
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["novel_id", "chapter", "character", "N", "A", "C", "I", "DC", "DN"])
        for s in rows:
            writer.writerow([novel_id, s.chapter_index, names.get(s.char_id, str(s.char_id)),
                             s.t_N, s.t_A, s.t_C, s.t_I, s.t_DC, s.t_DN])


def write_spans_jsonl(path, spans: list[TaggedSpan]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for span in spans:
            handle.write(json.dumps(span.to_json(), sort_keys=True) + "\n")


def read_spans_jsonl(path) -> list[TaggedSpan]:
    spans = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        spans.append(TaggedSpan(
            component=data["component"],
            char_id=data["char_id"],
            chapter_index=data["chapter"],
            sentence_id=data["sentence_id"],
            start_token=data["start_token"],
            end_token=data["end_token"],
            speaker_char_id=data.get("speaker_char_id"),
        ))
    return spans
