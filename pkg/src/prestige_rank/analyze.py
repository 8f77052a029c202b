"""Statistical characterization of indicator tables.

Covers correlations between indicators (overall and per area), per-area
rates against the equalized ideal of 1, the mean squared deviation from
unity, logarithmic value-vs-rank fits, and subject-area prestige-flow
aggregations.

Per-area aggregation always attributes a journal fractionally, 1/k to each
of its k areas at the aggregation level in question.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.stats import rankdata

from .ingest import ArtVector, CitationMatrix
from .model import JournalTable, SubjectScheme
from .rank import CoefMatrix, PrestigeVector, psjr2d

SUBJECT = "subject"
SPECIFIC = "specific"


class CorrelationUndefined(ValueError):
    """Raised when a correlation has no defined value (zero variance)."""


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation; undefined when either side is constant."""
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError("pearson needs two equal-length sequences of at least 2 values")
    da = a - a.mean()
    db = b - b.mean()
    # square roots taken separately so the product cannot underflow
    denom = math.sqrt(float((da * da).sum())) * math.sqrt(float((db * db).sum()))
    if denom == 0.0:
        raise CorrelationUndefined("zero variance in at least one sequence")
    return float((da * db).sum() / denom)


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average-tie ranks."""
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError("spearman needs two equal-length sequences of at least 2 values")
    return pearson(rankdata(a, method="average"), rankdata(b, method="average"))


def msd_unity(rates: Sequence[float]) -> float:
    """Mean of (rate - 1)^2; 0 means perfectly equalized."""
    r = np.asarray(rates, dtype=np.float64)
    if r.size < 1:
        raise ValueError("msd_unity needs at least one rate")
    return float(((r - 1.0) ** 2).mean())


class LogFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


def log_fit(values: Sequence[float]) -> LogFit:
    """Least-squares fit of value = slope * ln(rank) + intercept.

    Ranks are 1..n in the given order (callers sort descending first; see
    ``rank_series``). Constant input yields slope 0 with R^2 reported as 0.
    """
    y = np.asarray(values, dtype=np.float64)
    if y.size < 2:
        raise ValueError("log_fit needs at least 2 values")
    x = np.log(np.arange(1, y.size + 1, dtype=np.float64))
    dx = x - x.mean()
    dy = y - y.mean()
    ss_tot = float((dy * dy).sum())
    if ss_tot == 0.0:
        return LogFit(slope=0.0, intercept=float(y[0]), r_squared=0.0)
    slope = float((dx * dy).sum() / (dx * dx).sum())
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    return LogFit(slope=slope, intercept=intercept, r_squared=1.0 - float((resid * resid).sum()) / ss_tot)


def rank_series(values: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Sort descending and normalize by the maximum: the plot-ready series."""
    v = np.asarray(values, dtype=np.float64)
    v = v[~np.isnan(v)]
    if v.size == 0:
        raise ValueError("rank_series needs at least one defined value")
    top = float(v.max())
    if top <= 0:
        raise ValueError("rank_series needs a positive maximum")
    ordered = np.sort(v)[::-1] / top
    return np.arange(1, ordered.size + 1), ordered


# ---------------------------------------------------------------------------
# Area attribution


def _memberships(table: JournalTable, level: str) -> list[tuple[str, ...]]:
    if level == SUBJECT:
        return [tuple(sorted(j.areas)) for j in table]
    if level == SPECIFIC:
        return [tuple(sorted(j.specific_areas)) for j in table]
    raise ValueError(f"unknown aggregation level {level!r}")


def area_art(table: JournalTable, art: ArtVector, level: str) -> dict[str, float]:
    """Citable documents per area under fractional attribution."""
    memb = _memberships(table, level)
    out: dict[str, float] = {}
    for i, areas in enumerate(memb):
        if not areas:
            continue
        share = float(art.counts[i]) / len(areas)
        for a in areas:
            out[a] = out.get(a, 0.0) + share
    return out


@dataclass(frozen=True)
class AreaRateTable:
    """Per-area indicator rate: area mass share over area document share."""

    level: str
    rates: Mapping[str, float]
    art_shares: Mapping[str, float]
    skipped: tuple[str, ...] = ()  # areas with no citable documents

    def values(self, exclude: Iterable[str] = ()) -> list[float]:
        drop = set(exclude)
        return [r for a, r in sorted(self.rates.items()) if a not in drop]


def area_rates(
    values: np.ndarray,
    art: ArtVector,
    table: JournalTable,
    scheme: SubjectScheme,
    level: str = SUBJECT,
) -> AreaRateTable:
    """Rates of one per-document indicator across areas.

    A journal's mass is value * Art (NaN values drop the journal from both
    the mass and the document population). A fully equalized indicator
    yields 1.0 for every area.
    """
    memb = _memberships(table, level)
    x = np.asarray(values, dtype=np.float64)
    defined = ~np.isnan(x) & (art.counts > 0)
    mass = np.where(defined, x * art.counts, 0.0)
    total_mass = float(mass.sum())
    total_art = float(art.counts[defined].sum())
    if total_mass <= 0 or total_art <= 0:
        raise ValueError("area_rates needs positive total mass and documents")

    mass_by: dict[str, float] = {}
    art_by: dict[str, float] = {}
    for i, areas in enumerate(memb):
        if not defined[i] or not areas:
            continue
        f = 1.0 / len(areas)
        for a in areas:
            mass_by[a] = mass_by.get(a, 0.0) + mass[i] * f
            art_by[a] = art_by.get(a, 0.0) + float(art.counts[i]) * f

    rates: dict[str, float] = {}
    skipped: list[str] = []
    for a in sorted(set(mass_by) | set(art_by)):
        art_share = art_by.get(a, 0.0) / total_art
        if art_share <= 0:
            skipped.append(a)
            continue
        rates[a] = (mass_by.get(a, 0.0) / total_mass) / art_share
    return AreaRateTable(level=level, rates=rates, art_shares={a: v / total_art for a, v in art_by.items()}, skipped=tuple(skipped))


# ---------------------------------------------------------------------------
# Per-area correlations (overall / by subject / by specific area)


@dataclass(frozen=True)
class CorrelationSummary:
    pair: tuple[str, str]
    pearson_overall: float
    spearman_overall: float
    by_area: Mapping[str, Mapping[str, tuple[float, float]]]  # level -> area -> (pearson, spearman)

    def area_mean_sd(self, level: str) -> tuple[float, float, float, float, int]:
        """Simple mean and population SD of per-area correlations."""
        vals = list(self.by_area[level].values())
        if not vals:
            return (math.nan,) * 4 + (0,)
        pe = np.array([v[0] for v in vals])
        se = np.array([v[1] for v in vals])
        return float(pe.mean()), float(pe.std()), float(se.mean()), float(se.std()), len(vals)


def correlate_indicators(
    named_values: Mapping[str, np.ndarray],
    table: JournalTable,
    pair: tuple[str, str],
) -> CorrelationSummary:
    """Overall and per-area correlations between two indicator columns.

    Journals lacking either value are dropped pairwise; areas with fewer
    than two usable journals or zero variance are skipped.
    """
    xa = np.asarray(named_values[pair[0]], dtype=np.float64)
    ya = np.asarray(named_values[pair[1]], dtype=np.float64)
    ok = ~np.isnan(xa) & ~np.isnan(ya)
    if ok.sum() < 2:
        raise CorrelationUndefined(f"fewer than 2 journals have both {pair[0]} and {pair[1]}")
    overall_p = pearson(xa[ok], ya[ok])
    overall_s = spearman(xa[ok], ya[ok])

    by_area: dict[str, dict[str, tuple[float, float]]] = {}
    for level in (SUBJECT, SPECIFIC):
        memb = _memberships(table, level)
        idx_by_area: dict[str, list[int]] = {}
        for i, areas in enumerate(memb):
            if not ok[i]:
                continue
            for a in areas:
                idx_by_area.setdefault(a, []).append(i)
        out: dict[str, tuple[float, float]] = {}
        for a, idxs in sorted(idx_by_area.items()):
            if len(idxs) < 2:
                continue
            try:
                out[a] = (pearson(xa[idxs], ya[idxs]), spearman(xa[idxs], ya[idxs]))
            except CorrelationUndefined:
                continue
        by_area[level] = out
    return CorrelationSummary(pair=pair, pearson_overall=overall_p, spearman_overall=overall_s, by_area=by_area)


# ---------------------------------------------------------------------------
# Prestige flows


@dataclass(frozen=True)
class FlowMatrix:
    """Subject-area to subject-area prestige transferred per iteration at
    the fixed point, fractionally attributed on both endpoints."""

    areas: tuple[str, ...]
    matrix: np.ndarray  # K x K, [source, target]

    @property
    def total(self) -> float:
        return float(self.matrix.sum())


@dataclass(frozen=True)
class WithinFlowRow:
    """Received (or sent) flow decomposition for one area."""

    area: str
    total: float
    self_pct: float
    same_specific_pct: float
    same_subject_pct: float


@dataclass(frozen=True)
class FlowReport:
    """Flow matrix plus within-area percentages for every weighting."""

    flow: FlowMatrix
    # direction -> level -> kind -> area -> row
    within: Mapping[str, Mapping[str, Mapping[str, Mapping[str, WithinFlowRow]]]]
    # direction -> level -> kind -> (self, same_specific, same_subject) doc-weighted averages
    averages: Mapping[str, Mapping[str, Mapping[str, tuple[float, float, float]]]]
    kinds: tuple[str, ...]


def _edge_arrays(mat) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    csr = mat.tocsr()
    rows = np.repeat(np.arange(csr.shape[0]), np.diff(csr.indptr))
    return rows, csr.indices.copy(), csr.data.astype(np.float64)


def prestige_edge_weights(coef: CoefMatrix, v: PrestigeVector, d: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-edge transferred prestige (d/D) * Coef_ji * v_j at the fixed point."""
    rows, cols, data = _edge_arrays(coef.outgoing)
    dist = psjr2d(coef, v.values)
    if dist <= 0:
        return rows, cols, np.zeros_like(data)
    return rows, cols, (d / dist) * data * v.values[rows]


def flow_matrix(
    edges: tuple[np.ndarray, np.ndarray, np.ndarray],
    table: JournalTable,
    scheme: SubjectScheme,
) -> FlowMatrix:
    """Aggregate edge weights into a subject-area transfer matrix."""
    areas = tuple(sorted(scheme.subjects))
    pos = {a: k for k, a in enumerate(areas)}
    memb = _memberships(table, SUBJECT)
    out = np.zeros((len(areas), len(areas)))
    rows, cols, w = edges
    for j, i, wt in zip(rows, cols, w):
        src, dst = memb[j], memb[i]
        if not src or not dst:
            continue
        f = wt / (len(src) * len(dst))
        for a in src:
            for b in dst:
                out[pos[a], pos[b]] += f
    return FlowMatrix(areas=areas, matrix=out)


def _within_rows(
    edges: tuple[np.ndarray, np.ndarray, np.ndarray],
    table: JournalTable,
    scheme: SubjectScheme,
    level: str,
    direction: str,
) -> dict[str, WithinFlowRow]:
    """Decompose received (or sent) flow per area into self / same-specific /
    same-subject components.

    For a subject-area row, "same specific" means the two endpoint journals
    share a specific area belonging to that subject; for a specific-area
    row, sharing that very specific area. This keeps
    self <= same-specific <= same-subject within every row.
    """
    specifics = [j.specific_areas for j in table]
    subjects = [j.areas for j in table]
    memb = _memberships(table, level)
    parent = scheme.parent

    tot: dict[str, float] = {}
    self_f: dict[str, float] = {}
    spec_f: dict[str, float] = {}
    subj_f: dict[str, float] = {}

    rows, cols, weights = edges
    for j, i, wt in zip(rows, cols, weights):
        if wt == 0.0:
            continue
        anchor, other = (i, j) if direction == "received" else (j, i)
        areas = memb[anchor]
        if not areas:
            continue
        shared = specifics[j] & specifics[i]
        shared_parents = {parent[s] for s in shared}
        f = wt / len(areas)
        is_self = j == i
        for a in areas:
            tot[a] = tot.get(a, 0.0) + f
            if is_self:
                self_f[a] = self_f.get(a, 0.0) + f
            if level == SUBJECT:
                if a in shared_parents:
                    spec_f[a] = spec_f.get(a, 0.0) + f
                if a in subjects[other]:
                    subj_f[a] = subj_f.get(a, 0.0) + f
            else:
                if a in shared:
                    spec_f[a] = spec_f.get(a, 0.0) + f
                if parent[a] in subjects[other]:
                    subj_f[a] = subj_f.get(a, 0.0) + f

    out: dict[str, WithinFlowRow] = {}
    for a in sorted(tot):
        t = tot[a]
        if t <= 0:
            continue
        out[a] = WithinFlowRow(
            area=a,
            total=t,
            self_pct=100.0 * self_f.get(a, 0.0) / t,
            same_specific_pct=100.0 * spec_f.get(a, 0.0) / t,
            same_subject_pct=100.0 * subj_f.get(a, 0.0) / t,
        )
    return out


def _doc_weighted_average(
    rows: Mapping[str, WithinFlowRow], weights: Mapping[str, float]
) -> tuple[float, float, float]:
    total = sum(weights.get(a, 0.0) for a in rows)
    if total <= 0:
        return (math.nan, math.nan, math.nan)
    s = sp_ = sb = 0.0
    for a, row in rows.items():
        w = weights.get(a, 0.0)
        s += w * row.self_pct
        sp_ += w * row.same_specific_pct
        sb += w * row.same_subject_pct
    return (s / total, sp_ / total, sb / total)


def flow_tables(
    coef: CoefMatrix,
    v: PrestigeVector,
    table: JournalTable,
    scheme: SubjectScheme,
    art: ArtVector,
    d: float,
    cmat: CitationMatrix | None = None,
    coef_nocos: CoefMatrix | None = None,
    v_nocos: PrestigeVector | None = None,
) -> FlowReport:
    """Build the area flow matrix and within-area flow percentages.

    Percentages are computed for up to three weightings: raw citation
    counts, prestige transfer without the cosine (at its own fixed point),
    and prestige transfer with the cosine. Doc-weighted averages use each
    area's fractional share of citable documents.
    """
    kinds: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    if cmat is not None:
        kinds["citation"] = _edge_arrays(cmat.counts)
    if coef_nocos is not None and v_nocos is not None:
        kinds["prestige_nocosine"] = prestige_edge_weights(coef_nocos, v_nocos, d)
    kinds["prestige"] = prestige_edge_weights(coef, v, d)

    within: dict[str, dict[str, dict[str, dict[str, WithinFlowRow]]]] = {}
    averages: dict[str, dict[str, dict[str, tuple[float, float, float]]]] = {}
    for direction in ("received", "sent"):
        within[direction] = {}
        averages[direction] = {}
        for level in (SUBJECT, SPECIFIC):
            art_w = area_art(table, art, level)
            within[direction][level] = {}
            averages[direction][level] = {}
            for kind, edges in kinds.items():
                rows = _within_rows(edges, table, scheme, level, direction)
                within[direction][level][kind] = rows
                averages[direction][level][kind] = _doc_weighted_average(rows, art_w)

    return FlowReport(
        flow=flow_matrix(prestige_edge_weights(coef, v, d), table, scheme),
        within=within,
        averages=averages,
        kinds=tuple(kinds),
    )
