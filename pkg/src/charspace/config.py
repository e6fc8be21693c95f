"""INI-style run configuration for full corpus runs.

Grammar (configparser):

    [run]
    out_dir = out            ; required
    seed = 42                ; optional, default 0
    embed = true             ; optional, default false
    workers = 2              ; optional, default 1

    [corpus]
    dir = corpus/            ; required: <novel>.txt plus <novel>.bundle/ dirs

    [lexicons]
    appearance = path.txt    ; optional overrides of the packaged defaults
    gender_pronouns = path.txt
    verbnet_overrides = path.tsv

    [novel:some_id]
    first_person = true      ; excluded from corpus statistics
    merge_map = merges.csv   ; survivor_name,absorbed_name rows
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass
class NovelConfig:
    first_person: bool = False
    merge_map: Path | None = None


@dataclass
class RunConfig:
    corpus_dir: Path
    out_dir: Path
    seed: int = 0
    embed: bool = False
    workers: int = 1
    appearance_path: Path | None = None
    gender_pronouns_path: Path | None = None
    verbnet_overrides_path: Path | None = None
    novels: dict[str, NovelConfig] = field(default_factory=dict)

    def novel(self, novel_id: str) -> NovelConfig:
        return self.novels.get(novel_id, NovelConfig())


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path, encoding="utf-8")
    base = path.parent

    def resolve(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    try:
        corpus_dir = resolve(parser["corpus"]["dir"])
        out_dir = resolve(parser["run"]["out_dir"])
    except KeyError as exc:
        raise ConfigError(f"missing required config key: {exc}")
    if not corpus_dir.is_dir():
        raise ConfigError(f"corpus dir does not exist: {corpus_dir}")

    config = RunConfig(
        corpus_dir=corpus_dir,
        out_dir=out_dir,
        seed=parser.getint("run", "seed", fallback=0),
        embed=parser.getboolean("run", "embed", fallback=False),
        workers=parser.getint("run", "workers", fallback=1),
    )
    if parser.has_section("lexicons"):
        for key, attr in (
            ("appearance", "appearance_path"),
            ("gender_pronouns", "gender_pronouns_path"),
            ("verbnet_overrides", "verbnet_overrides_path"),
        ):
            if parser.has_option("lexicons", key):
                lex_path = resolve(parser["lexicons"][key])
                if not lex_path.exists():
                    raise ConfigError(f"lexicon file does not exist: {lex_path}")
                setattr(config, attr, lex_path)
    for section in parser.sections():
        if not section.startswith("novel:"):
            continue
        novel_id = section.split(":", 1)[1]
        novel_cfg = NovelConfig(
            first_person=parser.getboolean(section, "first_person", fallback=False)
        )
        if parser.has_option(section, "merge_map"):
            merge_path = resolve(parser[section]["merge_map"])
            if not merge_path.exists():
                raise ConfigError(f"merge map does not exist: {merge_path}")
            novel_cfg.merge_map = merge_path
        config.novels[novel_id] = novel_cfg
    return config
