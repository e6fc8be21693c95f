"""Loaders for packaged default lexicons and inventories.

Every list here is a plain text file under ``charspace/data`` so users can
copy and edit them; blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import csv
from functools import lru_cache
from importlib import resources
from pathlib import Path


def _read_lines(name: str) -> list[str]:
    text = resources.files("charspace.data").joinpath(name).read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


@lru_cache(maxsize=None)
def default_abbreviations() -> frozenset[str]:
    return frozenset(_read_lines("abbreviations.txt"))


@lru_cache(maxsize=None)
def supersense_inventory() -> frozenset[str]:
    return frozenset(_read_lines("supersense_inventory.txt"))


@lru_cache(maxsize=None)
def default_appearance_terms() -> frozenset[str]:
    return frozenset(w.lower() for w in _read_lines("appearance_terms.txt"))


@lru_cache(maxsize=None)
def default_gender_pronouns() -> dict[str, str]:
    """word -> 'M' | 'F' for third-person pronoun gender tallies."""
    table = {}
    for line in _read_lines("gender_pronouns.txt"):
        word, label = line.split()
        table[word.lower()] = label
    return table


def load_wordlist(path) -> frozenset[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(
        line.strip().lower() for line in lines if line.strip() and not line.startswith("#")
    )


def load_gender_pronouns(path) -> dict[str, str]:
    table = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, label = line.split()
        table[word.lower()] = label
    return table


def load_verbnet_overrides(path) -> dict[str, str]:
    """TSV of (lemma, class) where class is one of A, I, EXCLUDE."""
    table = {}
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter="\t", quoting=csv.QUOTE_NONE)
        header = next(reader, None)
        if header is None:
            return table
        for row in reader:
            if not row or row[0].startswith("#"):
                continue
            lemma, cls = row[0].strip(), row[1].strip().upper()
            if cls not in {"A", "I", "EXCLUDE"}:
                raise ValueError(f"unknown override class {cls!r} for lemma {lemma!r}")
            table[lemma] = cls
    return table
