"""Canonical annotation bundle (tokens, entities, quotes, supersenses) and
the character registry built from person coreference clusters.

The bundle is four TSV files with header rows:

    tokens.tsv:     paragraph_id, sentence_id, token_id, word, lemma, pos
    entities.tsv:   coref_id, start_token, end_token, prop, category, text
    quotes.tsv:     quote_id, start_token, end_token, speaker_coref_id
    supersense.tsv: start_token, end_token, label

``prop`` is PROP | NOM | PRON on disk and PROPER | NOMINAL | PRONOUN in
memory.  ``speaker_coref_id`` of -1 marks an unattributed quote.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path

from .errors import BundleIntegrityError, MergeError, ParseError
from .resources import default_gender_pronouns, supersense_inventory

logger = logging.getLogger(__name__)

PROP_CODES = {"PROP": "PROPER", "NOM": "NOMINAL", "PRON": "PRONOUN"}
UNKNOWN_SPEAKER = -1

TOKENS_FILE = "tokens.tsv"
ENTITIES_FILE = "entities.tsv"
QUOTES_FILE = "quotes.tsv"
SUPERSENSE_FILE = "supersense.tsv"

TOKENS_HEADER = ["paragraph_id", "sentence_id", "token_id", "word", "lemma", "pos"]
ENTITIES_HEADER = ["coref_id", "start_token", "end_token", "prop", "category", "text"]
QUOTES_HEADER = ["quote_id", "start_token", "end_token", "speaker_coref_id"]
SUPERSENSE_HEADER = ["start_token", "end_token", "label"]


@dataclass(frozen=True)
class Token:
    token_id: int
    sentence_id: int
    paragraph_id: int
    word: str
    lemma: str
    pos: str


@dataclass(frozen=True)
class MentionSpan:
    cluster_id: int
    start_token: int
    end_token: int
    prop: str  # PROPER | NOMINAL | PRONOUN
    category: str
    surface: str


@dataclass(frozen=True)
class QuoteSpan:
    quote_id: int
    start_token: int
    end_token: int
    speaker_cluster: int
    sentence_ids: tuple[int, ...]


@dataclass(frozen=True)
class SupersenseSpan:
    start_token: int
    end_token: int
    label: str


@dataclass(frozen=True)
class Character:
    char_id: int
    canonical_name: str
    cluster_ids: frozenset[int]
    aliases: frozenset[str]
    gender: str  # M | F | UNKNOWN
    proper_mention_count: int
    total_mention_count: int
    masculine_pronouns: int = 0
    feminine_pronouns: int = 0


class AnnotationBundle:
    """All annotations for one novel plus the derived lookup tables."""

    def __init__(self, novel_id, tokens, mentions, quotes, supersenses):
        self.novel_id = novel_id
        self.tokens: list[Token] = tokens
        self.mentions: list[MentionSpan] = mentions
        self.quotes: list[QuoteSpan] = quotes
        self.supersenses: list[SupersenseSpan] = supersenses

        self._token_index = {t.token_id: t for t in tokens}
        self.sentence_paragraph: dict[int, int] = {}
        self.sentence_tokens: dict[int, tuple[int, int]] = {}
        for t in tokens:
            self.sentence_paragraph[t.sentence_id] = t.paragraph_id
            lo, hi = self.sentence_tokens.get(t.sentence_id, (t.token_id, t.token_id))
            self.sentence_tokens[t.sentence_id] = (min(lo, t.token_id), max(hi, t.token_id))
        self.paragraph_ids = sorted({t.paragraph_id for t in tokens})

    def token(self, token_id: int) -> Token:
        return self._token_index[token_id]

    def has_token(self, token_id: int) -> bool:
        return token_id in self._token_index

    def cluster_ids(self) -> set[int]:
        return {m.cluster_id for m in self.mentions}

    def mentions_of_clusters(self, clusters: set[int]) -> list[MentionSpan]:
        return [m for m in self.mentions if m.cluster_id in clusters]


def _read_tsv(path: Path, expected_header: list[str]):
    try:
        handle = open(path, encoding="utf-8", newline="")
    except FileNotFoundError:
        raise ParseError("missing bundle file", source=str(path))
    with handle:
        reader = csv.reader(handle, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != expected_header:
            raise ParseError(
                f"bad header, expected {expected_header}", source=path.name, line=1
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise ParseError(
                    f"expected {len(expected_header)} columns, got {len(row)}",
                    source=path.name,
                    line=lineno,
                )
            yield lineno, row


def _int_field(value: str, name: str, source: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"non-integer {name}: {value!r}", source=source, line=line)


def parse_bundle(bundle_dir, novel_id: str | None = None) -> AnnotationBundle:
    """Parse and cross-validate the four TSV files of a bundle directory."""
    bundle_dir = Path(bundle_dir)
    novel_id = novel_id or bundle_dir.stem  # "x.bundle" directories yield "x"

    tokens: list[Token] = []
    prev_token = -1
    prev_sentence = -1
    sentence_paragraph: dict[int, int] = {}
    path = bundle_dir / TOKENS_FILE
    for lineno, row in _read_tsv(path, TOKENS_HEADER):
        pid = _int_field(row[0], "paragraph_id", path.name, lineno)
        sid = _int_field(row[1], "sentence_id", path.name, lineno)
        tid = _int_field(row[2], "token_id", path.name, lineno)
        if tid <= prev_token:
            raise ParseError(
                f"token_id {tid} not strictly increasing", source=path.name, line=lineno
            )
        if sid < prev_sentence:
            raise ParseError(
                f"sentence_id {sid} decreases", source=path.name, line=lineno
            )
        if sid in sentence_paragraph and sentence_paragraph[sid] != pid:
            raise ParseError(
                f"sentence {sid} spans multiple paragraphs", source=path.name, line=lineno
            )
        sentence_paragraph[sid] = pid
        tokens.append(Token(tid, sid, pid, row[3], row[4], row[5]))
        prev_token, prev_sentence = tid, sid
    if not tokens:
        raise ParseError("tokens file has no rows", source=path.name)
    token_ids = {t.token_id for t in tokens}

    def check_span(start: int, end: int, source: str, line: int, row):
        if start > end:
            raise ParseError(f"start_token {start} > end_token {end}", source=source, line=line)
        for tid in (start, end):
            if tid not in token_ids:
                raise BundleIntegrityError(
                    f"dangling token id {tid} in {source} line {line}: {row}"
                )

    mentions: list[MentionSpan] = []
    path = bundle_dir / ENTITIES_FILE
    for lineno, row in _read_tsv(path, ENTITIES_HEADER):
        cid = _int_field(row[0], "coref_id", path.name, lineno)
        start = _int_field(row[1], "start_token", path.name, lineno)
        end = _int_field(row[2], "end_token", path.name, lineno)
        check_span(start, end, path.name, lineno, row)
        prop = PROP_CODES.get(row[3].strip())
        if prop is None:
            raise ParseError(f"unknown prop {row[3]!r}", source=path.name, line=lineno)
        mentions.append(MentionSpan(cid, start, end, prop, row[4].strip(), row[5]))

    sentence_of = {t.token_id: t.sentence_id for t in tokens}
    quotes: list[QuoteSpan] = []
    path = bundle_dir / QUOTES_FILE
    for lineno, row in _read_tsv(path, QUOTES_HEADER):
        qid = _int_field(row[0], "quote_id", path.name, lineno)
        start = _int_field(row[1], "start_token", path.name, lineno)
        end = _int_field(row[2], "end_token", path.name, lineno)
        speaker = _int_field(row[3], "speaker_coref_id", path.name, lineno)
        check_span(start, end, path.name, lineno, row)
        sids = tuple(sorted({sentence_of[t.token_id] for t in tokens if start <= t.token_id <= end}))
        quotes.append(QuoteSpan(qid, start, end, speaker, sids))
    quotes.sort(key=lambda q: q.start_token)
    for a, b in zip(quotes, quotes[1:]):
        if b.start_token <= a.end_token:
            raise ParseError(
                f"quotes {a.quote_id} and {b.quote_id} overlap", source=QUOTES_FILE
            )

    inventory = supersense_inventory()
    supersenses: list[SupersenseSpan] = []
    path = bundle_dir / SUPERSENSE_FILE
    for lineno, row in _read_tsv(path, SUPERSENSE_HEADER):
        start = _int_field(row[0], "start_token", path.name, lineno)
        end = _int_field(row[1], "end_token", path.name, lineno)
        label = row[2].strip()
        check_span(start, end, path.name, lineno, row)
        if label not in inventory:
            raise ParseError(f"unknown supersense label {label!r}", source=path.name, line=lineno)
        supersenses.append(SupersenseSpan(start, end, label))

    return AnnotationBundle(novel_id, tokens, mentions, quotes, supersenses)


def _majority_gender(masc: int, fem: int) -> str:
    if masc > fem:
        return "M"
    if fem > masc:
        return "F"
    return "UNKNOWN"


def pronoun_tally(
    mentions: list[MentionSpan], pronoun_genders: dict[str, str] | None = None
) -> tuple[int, int]:
    """(masculine, feminine) counts over the PRONOUN mentions given."""
    if pronoun_genders is None:
        pronoun_genders = default_gender_pronouns()
    masc = fem = 0
    for m in mentions:
        if m.prop != "PRONOUN":
            continue
        label = pronoun_genders.get(m.surface.strip().lower())
        if label == "M":
            masc += 1
        elif label == "F":
            fem += 1
    return masc, fem


def assign_gender(character: Character, bundle: AnnotationBundle,
                  pronoun_genders: dict[str, str] | None = None) -> str:
    """Majority third-person pronoun gender over the character's clusters;
    ties and pronoun-free clusters are UNKNOWN."""
    mentions = bundle.mentions_of_clusters(set(character.cluster_ids))
    masc, fem = pronoun_tally(mentions, pronoun_genders)
    return _majority_gender(masc, fem)


def _canonical_name(proper_surfaces: Counter) -> str:
    # Most frequent proper form; break ties by length then lexicographically.
    return sorted(proper_surfaces.items(), key=lambda kv: (-kv[1], -len(kv[0]), kv[0]))[0][0]


def build_registry(
    bundle: AnnotationBundle,
    min_total: int = 1,
    min_proper: int = 1,
    pronoun_genders: dict[str, str] | None = None,
) -> list[Character]:
    """One Character per retained person cluster.

    A cluster is retained when its total mentions >= min_total and its
    proper mentions >= min_proper.  Clusters without any proper mention are
    always dropped (and logged): there is no name to canonicalize, the
    classic first-person narrator pathology.
    """
    by_cluster: dict[int, list[MentionSpan]] = defaultdict(list)
    for m in bundle.mentions:
        if m.category == "PER":
            by_cluster[m.cluster_id].append(m)

    registry: list[Character] = []
    for cluster_id in sorted(by_cluster):
        mentions = by_cluster[cluster_id]
        proper = Counter(m.surface for m in mentions if m.prop == "PROPER")
        total = len(mentions)
        n_proper = sum(proper.values())
        if n_proper == 0:
            logger.info(
                "novel %s: dropping person cluster %d (no proper mentions, %d total)",
                bundle.novel_id, cluster_id, total,
            )
            continue
        if total < min_total or n_proper < min_proper:
            continue
        masc, fem = pronoun_tally(mentions, pronoun_genders)
        registry.append(
            Character(
                char_id=cluster_id,
                canonical_name=_canonical_name(proper),
                cluster_ids=frozenset({cluster_id}),
                aliases=frozenset(proper),
                gender=_majority_gender(masc, fem),
                proper_mention_count=n_proper,
                total_mention_count=total,
                masculine_pronouns=masc,
                feminine_pronouns=fem,
            )
        )
    if not registry:
        logger.warning("novel %s: empty character registry", bundle.novel_id)
    return registry


def merge_clusters(
    registry: list[Character], merge_pairs: list[tuple[int, int]]
) -> list[Character]:
    """Merge characters pairwise: (survivor_id, absorbed_id).

    The merged character keeps the survivor's canonical name, takes the
    smaller of the two char_ids, unions clusters/aliases, sums counts, and
    recomputes gender from the summed pronoun tallies.  Merging a character
    with itself is a no-op; unknown ids raise MergeError.
    """
    chars = {c.char_id: c for c in registry}
    alias_of: dict[int, int] = {}  # retired id -> current id

    def resolve(char_id: int) -> int:
        seen = set()
        while char_id in alias_of:
            if char_id in seen:
                raise MergeError(f"cyclic merge for id {char_id}")
            seen.add(char_id)
            char_id = alias_of[char_id]
        return char_id

    for survivor_id, absorbed_id in merge_pairs:
        for cid in (survivor_id, absorbed_id):
            if resolve(cid) not in chars:
                raise MergeError(f"unknown character id {cid}")
        a = chars[resolve(survivor_id)]
        b = chars[resolve(absorbed_id)]
        if a.char_id == b.char_id:
            continue
        kept_id = min(a.char_id, b.char_id)
        dropped_id = max(a.char_id, b.char_id)
        masc = a.masculine_pronouns + b.masculine_pronouns
        fem = a.feminine_pronouns + b.feminine_pronouns
        merged = Character(
            char_id=kept_id,
            canonical_name=a.canonical_name,
            cluster_ids=a.cluster_ids | b.cluster_ids,
            aliases=a.aliases | b.aliases,
            gender=_majority_gender(masc, fem),
            proper_mention_count=a.proper_mention_count + b.proper_mention_count,
            total_mention_count=a.total_mention_count + b.total_mention_count,
            masculine_pronouns=masc,
            feminine_pronouns=fem,
        )
        del chars[a.char_id]
        del chars[b.char_id]
        chars[kept_id] = merged
        alias_of[dropped_id] = kept_id
    return [chars[k] for k in sorted(chars)]


def read_merge_map(path, registry: list[Character]) -> list[tuple[int, int]]:
    """CSV of `survivor_name,absorbed_name` resolved against canonical names
    and aliases (canonical names win on conflict)."""
    lookup: dict[str, int] = {}
    for c in registry:
        for alias in c.aliases:
            lookup.setdefault(alias, c.char_id)
    for c in registry:
        lookup[c.canonical_name] = c.char_id

    pairs = []
    with open(path, encoding="utf-8", newline="") as handle:
        for lineno, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise ParseError("expected survivor_name,absorbed_name", source=str(path), line=lineno)
            survivor, absorbed = row[0].strip(), row[1].strip()
            for name in (survivor, absorbed):
                if name not in lookup:
                    raise MergeError(f"merge map names unknown character {name!r}")
            pairs.append((lookup[survivor], lookup[absorbed]))
    return pairs


TITLE_PREFIXES = ("Mr.", "Mrs.", "Miss", "Lady", "Sir")


def _normalize_name(name: str) -> str:
    words = name.split()
    while words and words[0] in TITLE_PREFIXES:
        words = words[1:]
    return " ".join(words).casefold()


@dataclass(frozen=True)
class AliasMap:
    mapped: dict[str, str]
    unmapped: tuple[str, ...]


def map_aliases(
    predicted_names: list[str],
    gold: list[str] | dict[str, str],
    mode: str = "exact",
    resolver=None,
) -> AliasMap:
    """Map predicted character names onto a gold list.

    ``gold`` is either a list of canonical names or an alias table
    (alias -> canonical).  ``normalized`` strips Mr./Mrs./Miss/Lady/Sir and
    compares case-folded; ambiguous matches stay unmapped rather than being
    guessed.  ``external`` delegates each unresolved name to ``resolver``
    (a callable (name, canonical_choices) -> name-or-None, e.g. the
    annotator client's name-mapping prompt).
    """
    if isinstance(gold, dict):
        alias_table = dict(gold)
        canonicals = sorted(set(gold.values()))
    else:
        alias_table = {name: name for name in gold}
        canonicals = sorted(set(gold))
    if not predicted_names or not alias_table:
        raise ValueError("both name lists must be non-empty")

    mapped: dict[str, str] = {}
    unmapped: list[str] = []

    if mode == "exact":
        for name in predicted_names:
            if name in alias_table:
                mapped[name] = alias_table[name]
            else:
                unmapped.append(name)
    elif mode == "normalized":
        norm_table: dict[str, set[str]] = defaultdict(set)
        for alias, canonical in alias_table.items():
            norm_table[_normalize_name(alias)].add(canonical)
        for name in predicted_names:
            targets = norm_table.get(_normalize_name(name), set())
            if len(targets) == 1:
                mapped[name] = next(iter(targets))
            else:
                unmapped.append(name)
    elif mode == "external":
        if resolver is None:
            raise ValueError("external mode requires a resolver callable")
        for name in predicted_names:
            if name in alias_table:
                mapped[name] = alias_table[name]
                continue
            answer = resolver(name, canonicals)
            if answer in set(canonicals):
                mapped[name] = answer
            else:
                unmapped.append(name)
    else:
        raise ValueError(f"unknown alias-mapping mode {mode!r}")
    return AliasMap(mapped=mapped, unmapped=tuple(unmapped))


def registry_to_json(registry: list[Character]) -> list[dict]:
    return [
        {
            "char_id": c.char_id,
            "canonical_name": c.canonical_name,
            "cluster_ids": sorted(c.cluster_ids),
            "aliases": sorted(c.aliases),
            "gender": c.gender,
            "proper_mention_count": c.proper_mention_count,
            "total_mention_count": c.total_mention_count,
            "masculine_pronouns": c.masculine_pronouns,
            "feminine_pronouns": c.feminine_pronouns,
        }
        for c in registry
    ]


def registry_from_json(data: list[dict]) -> list[Character]:
    return [
        Character(
            char_id=row["char_id"],
            canonical_name=row["canonical_name"],
            cluster_ids=frozenset(row["cluster_ids"]),
            aliases=frozenset(row["aliases"]),
            gender=row["gender"],
            proper_mention_count=row["proper_mention_count"],
            total_mention_count=row["total_mention_count"],
            masculine_pronouns=row.get("masculine_pronouns", 0),
            feminine_pronouns=row.get("feminine_pronouns", 0),
        )
        for row in data
    ]
