"""Evaluation of predicted component scores against gold tables and the
corpus-level statistics (agreement, concentration, gender analyses).

Alignment convention for MAE/bias/correlation: chapters are the
intersection of gold and predicted chapters, characters the union with
missing entries read as zero, and the per-chapter denominator |K| is the
size of the gold character set.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field

from .components import COMPONENTS
from .errors import DomainError, EvalError
from .metrics import CentralityVector, gini, rank_top


class ScoreTable:
    """(novel, chapter, character) -> six-count vector."""

    def __init__(self):
        self.cells: dict[tuple[str, int, str], dict[str, int]] = {}

    def add(self, novel: str, chapter: int, character: str, counts: dict[str, int]) -> None:
        key = (novel, chapter, character)
        if key in self.cells:
            raise EvalError(f"duplicate score row for {key}")
        for tag, value in counts.items():
            if value < 0:
                raise DomainError(f"negative count {value} for {key} tag {tag}")
        self.cells[key] = {tag: int(counts.get(tag, 0)) for tag in COMPONENTS}

    def novels(self) -> list[str]:
        return sorted({novel for novel, _c, _k in self.cells})

    def chapters(self, novel: str) -> set[int]:
        return {c for n, c, _k in self.cells if n == novel}

    def characters(self, novel: str) -> set[str]:
        return {k for n, _c, k in self.cells if n == novel}

    def get(self, novel: str, chapter: int, character: str, tag: str) -> int:
        return self.cells.get((novel, chapter, character), {}).get(tag, 0)

    def book_totals(self, novel: str) -> dict[str, dict[str, int]]:
        """character -> tag -> total over chapters."""
        totals: dict[str, dict[str, int]] = defaultdict(lambda: dict.fromkeys(COMPONENTS, 0))
        for (n, _c, k), counts in self.cells.items():
            if n != novel:
                continue
            for tag in COMPONENTS:
                totals[k][tag] += counts[tag]
        return dict(totals)

    @classmethod
    def read_csv(cls, path) -> "ScoreTable":
        table = cls()
        with open(path, encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            required = {"novel_id", "chapter", "character", *COMPONENTS}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise EvalError(f"score CSV {path} missing columns {sorted(required)}")
            for row in reader:
                table.add(
                    row["novel_id"], int(row["chapter"]), row["character"],
                    {tag: int(row[tag]) for tag in COMPONENTS},
                )
        return table

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["novel_id", "chapter", "character", *COMPONENTS])
            for (novel, chapter, character) in sorted(self.cells):
                counts = self.cells[(novel, chapter, character)]
                writer.writerow([novel, chapter, character] + [counts[t] for t in COMPONENTS])


def _alignment(gold: ScoreTable, pred: ScoreTable):
    """Yields (novel, chapter, gold_char_count, union_characters)."""
    novels = set(gold.novels()) | set(pred.novels())
    out = []
    for novel in sorted(novels):
        g_chapters = gold.chapters(novel)
        p_chapters = pred.chapters(novel)
        common = sorted(g_chapters & p_chapters)
        union_chars = sorted(gold.characters(novel) | pred.characters(novel))
        gold_chars = gold.characters(novel)
        for chapter in common:
            out.append((novel, chapter, len(gold_chars), union_chars))
    if not out:
        raise EvalError("gold and predicted tables share no (novel, chapter) pairs")
    return out


def mae(gold: ScoreTable, pred: ScoreTable, component: str) -> float:
    """Mean over chapters of (sum_k |g - p|) / |K|, |K| the gold cast size."""
    if component not in COMPONENTS:
        raise EvalError(f"unknown component {component!r}")
    rows = _alignment(gold, pred)
    chapter_means = []
    for novel, chapter, n_gold_chars, union_chars in rows:
        if n_gold_chars == 0:
            raise EvalError(f"novel {novel!r} has no gold characters")
        total = sum(
            abs(gold.get(novel, chapter, k, component) - pred.get(novel, chapter, k, component))
            for k in union_chars
        )
        chapter_means.append(total / n_gold_chars)
    return sum(chapter_means) / len(chapter_means)


def bias(gold: ScoreTable, pred: ScoreTable, component: str) -> float | None:
    """(sum p - sum g) / sum g over the aligned cells; None when sum g = 0."""
    rows = _alignment(gold, pred)
    g_total = p_total = 0
    for novel, chapter, _n, union_chars in rows:
        for k in union_chars:
            g_total += gold.get(novel, chapter, k, component)
            p_total += pred.get(novel, chapter, k, component)
    if g_total == 0:
        return None
    return (p_total - g_total) / g_total


def aligned_pairs(gold: ScoreTable, pred: ScoreTable, component: str):
    """Flat (gold, pred) value pairs over the aligned cells, for correlation."""
    xs, ys = [], []
    for novel, chapter, _n, union_chars in _alignment(gold, pred):
        for k in union_chars:
            xs.append(gold.get(novel, chapter, k, component))
            ys.append(pred.get(novel, chapter, k, component))
    return xs, ys


def pearson(x, y) -> float | None:
    """Standard Pearson correlation; None below 3 points or zero variance."""
    if len(x) != len(y):
        raise EvalError("pearson requires equal-length vectors")
    n = len(x)
    if n < 3:
        return None
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        return None
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return sxy / math.sqrt(sxx * syy)


def _average_ranks(values) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1  # 1-based average rank for the tie block
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(x, y) -> float | None:
    """Pearson correlation of average-ranked data (ties get mean ranks)."""
    if len(x) != len(y):
        raise EvalError("spearman requires equal-length vectors")
    if len(x) < 3:
        return None
    return pearson(_average_ranks(list(x)), _average_ranks(list(y)))


# ---------------------------------------------------------------------------
# Student-t via the regularized incomplete beta function (no SciPy at runtime)

_BETA_EPS = 1e-15
_BETA_FPMIN = 1e-300
_BETA_MAX_ITER = 500


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_FPMIN:
        d = _BETA_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise DomainError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b), abs error well below 1e-10."""
    if a <= 0 or b <= 0:
        raise DomainError("betainc requires a, b > 0")
    if x < 0 or x > 1:
        raise DomainError("betainc requires x in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t via I_x(df/2, 1/2)."""
    if df < 1:
        raise DomainError("degrees of freedom must be >= 1")
    x = df / (df + t * t)
    return betainc(df / 2.0, 0.5, x)


@dataclass(frozen=True)
class TTestResult:
    t: float | None
    df: int
    p_two_sided: float
    degenerate: bool = False


def paired_t_test(a, b) -> TTestResult:
    """Paired two-sided t-test.  Zero-variance differences degenerate to
    p = 0 when the mean difference is nonzero, else p = 1 with t undefined."""
    if len(a) != len(b):
        raise EvalError("paired t-test requires equal-length samples")
    n = len(a)
    if n < 2:
        raise EvalError("paired t-test requires n >= 2")
    d = [x - y for x, y in zip(a, b)]
    mean = sum(d) / n
    var = sum((x - mean) ** 2 for x in d) / (n - 1)
    if var == 0.0:
        if mean == 0.0:
            return TTestResult(t=None, df=n - 1, p_two_sided=1.0, degenerate=True)
        return TTestResult(t=None, df=n - 1, p_two_sided=0.0, degenerate=True)
    t = mean / math.sqrt(var / n)
    return TTestResult(t=t, df=n - 1, p_two_sided=student_t_two_sided_p(t, n - 1))


# ---------------------------------------------------------------------------
# Corpus-level aggregations


def protagonist_agreement(tops_a: dict[str, int | str], tops_b: dict[str, int | str]) -> float:
    """Percentage of novels on which two measures pick the same rank-1
    character; novels must appear in both mappings."""
    common = sorted(set(tops_a) & set(tops_b))
    if not common:
        raise EvalError("no common novels for protagonist agreement")
    same = sum(1 for novel in common if tops_a[novel] == tops_b[novel])
    return 100.0 * same / len(common)


@dataclass(frozen=True)
class Concentration:
    gini: float
    top1_share: float
    top1_vs_2: float | None


def concentration(values) -> Concentration:
    """Inequality summary of one novel's importance values."""
    vals = sorted((float(v) for v in values), reverse=True)
    if not vals:
        raise DomainError("concentration of an empty value list")
    total = sum(vals)
    share = vals[0] / total if total > 0 else 0.0
    ratio = None
    if len(vals) >= 2 and vals[1] > 0:
        ratio = vals[0] / vals[1]
    return Concentration(gini=gini(vals), top1_share=share, top1_vs_2=ratio)


@dataclass(frozen=True)
class RepresentationRatio:
    ratios: dict[str, float | None]
    k_used: int
    flagged: bool


def representation_ratio(
    genders: dict[int, str], values: CentralityVector | dict[int, float], k: int = 10
) -> RepresentationRatio:
    """Share of each gender among the top-k by a measure divided by its share
    of the full gendered cast; UNKNOWN is excluded from both sides."""
    vals = values.values if isinstance(values, CentralityVector) else values
    gendered = {node: g for node, g in genders.items()
                if g in ("M", "F") and node in vals}
    if not gendered:
        raise EvalError("no gendered characters with values")
    flagged = len(gendered) < k
    k_used = min(k, len(gendered))
    top = rank_top({node: vals[node] for node in gendered}, k_used)
    ratios: dict[str, float | None] = {}
    for g in ("M", "F"):
        corpus_share = sum(1 for node in gendered if gendered[node] == g) / len(gendered)
        if corpus_share == 0:
            ratios[g] = None
            continue
        top_share = sum(1 for node in top if gendered[node] == g) / k_used
        ratios[g] = top_share / corpus_share
    return RepresentationRatio(ratios=ratios, k_used=k_used, flagged=flagged)


@dataclass(frozen=True)
class EdgeGenderShares:
    shares: dict[str, float]  # keys FF, FM, MF, MM
    fm_mf_ratio: float | None


def edge_gender_shares(dc_graph) -> EdgeGenderShares:
    """Weighted edge mass split by speaker gender -> target gender over edges
    with both endpoints gendered."""
    genders = {node: attrs.get("gender") for node, attrs in dc_graph.node_attrs.items()}
    mass = {"FF": 0.0, "FM": 0.0, "MF": 0.0, "MM": 0.0}
    for u, v, w in dc_graph.edges():
        gu, gv = genders.get(u), genders.get(v)
        if gu in ("M", "F") and gv in ("M", "F"):
            mass[f"{gu}{gv}"] += w
    total = sum(mass.values())
    if total == 0:
        raise EvalError("no edges between gendered characters")
    shares = {key: value / total for key, value in mass.items()}
    ratio = shares["FM"] / shares["MF"] if shares["MF"] > 0 else None
    return EdgeGenderShares(shares=shares, fm_mf_ratio=ratio)


@dataclass
class TagCentralityCell:
    mean: float | None
    n: int
    novels: tuple[str, ...] = ()


def tag_centrality_table(novel_records: list[dict]) -> dict[str, dict[str, TagCentralityCell]]:
    """Average per-novel Spearman between tag book totals and centralities.

    Each record: {"novel": id?, "tags": {tag: {char: total}},
    "centralities": {name: {char: value}}}.  Undefined per-novel correlations
    are skipped; each cell reports its contributing count and novels.
    """
    sums: dict[tuple[str, str], list[tuple[str, float]]] = defaultdict(list)
    centrality_names: list[str] = []
    for record in novel_records:
        for name in record["centralities"]:
            if name not in centrality_names:
                centrality_names.append(name)
    for i, record in enumerate(novel_records):
        novel = str(record.get("novel", i))
        for tag in COMPONENTS:
            tag_values = record["tags"].get(tag, {})
            for name in record["centralities"]:
                cent = record["centralities"][name]
                chars = sorted(set(tag_values) & set(cent))
                if len(chars) < 3:
                    continue
                rho = spearman([tag_values[k] for k in chars], [cent[k] for k in chars])
                if rho is not None:
                    sums[(tag, name)].append((novel, rho))
    table: dict[str, dict[str, TagCentralityCell]] = {}
    for tag in COMPONENTS:
        table[tag] = {}
        for name in centrality_names:
            entries = sums.get((tag, name), [])
            mean = sum(r for _n, r in entries) / len(entries) if entries else None
            table[tag][name] = TagCentralityCell(
                mean=mean, n=len(entries),
                novels=tuple(sorted(n for n, _r in entries)))
    return table


@dataclass(frozen=True)
class MeanSd:
    mean: float
    sd: float
    n: int

    def formatted(self, digits: int = 2) -> str:
        return f"{self.mean:.{digits}f} ± {self.sd:.{digits}f}"


def mean_sd(values) -> MeanSd:
    """Sample (n-1) mean/SD; a single value reports SD 0.0 with n = 1."""
    vals = [float(v) for v in values]
    if not vals:
        raise EvalError("mean_sd of an empty list")
    n = len(vals)
    mean = sum(vals) / n
    if n == 1:
        return MeanSd(mean=mean, sd=0.0, n=1)
    var = sum((v - mean) ** 2 for v in vals) / (n - 1)
    return MeanSd(mean=mean, sd=math.sqrt(var), n=n)
