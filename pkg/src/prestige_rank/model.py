"""Core domain types shared by every stage of the pipeline.

Journals, the subject-area scheme, run parameters, and the assembled
dataset are all immutable after construction, so they can be shared
freely between threads and between computation passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Sequence

# Opaque stable journal identifier, unique within a dataset.
JournalId = str

GENERAL_AREA = "1000"


class DataError(Exception):
    """Semantic problem with input data (duplicate ids, empty windows, ...)."""


class ConfigError(ValueError):
    """Invalid parameter or generator configuration."""


@dataclass(frozen=True)
class Journal:
    """One source journal and its per-year citable-document counts.

    ``ranked`` journals are eligible to emit prestige (their outgoing
    references enter the citation matrix); unranked journals still receive
    citations and count toward the citation-per-document baseline.
    """

    id: JournalId
    title: str
    specific_areas: frozenset[str]
    citable_by_year: Mapping[int, int]
    ranked: bool = True
    areas: frozenset[str] = frozenset()  # parent subject areas, resolved via scheme

    def __post_init__(self) -> None:
        if not self.id:
            raise DataError("journal id must be non-empty")
        if self.ranked and not self.specific_areas:
            raise DataError(f"ranked journal {self.id!r} must have at least one specific area")
        for year, count in self.citable_by_year.items():
            if count < 0:
                raise DataError(f"journal {self.id!r}: negative citable count for year {year}")

    def art(self, year: int, window: int) -> int:
        """Citable documents published in [year - window, year - 1]."""
        return sum(self.citable_by_year.get(y, 0) for y in range(year - window, year))


@dataclass(frozen=True)
class SubjectScheme:
    """Total map from specific-area codes to their parent subject areas."""

    parent: Mapping[str, str]
    subject_names: Mapping[str, str] = field(default_factory=dict)
    general: str = GENERAL_AREA

    @property
    def subjects(self) -> frozenset[str]:
        return frozenset(self.parent.values())

    def subject_of(self, specific: str) -> str:
        try:
            return self.parent[specific]
        except KeyError:
            raise DataError(f"specific area {specific!r} is not in the subject scheme") from None

    def name_of(self, subject: str) -> str:
        return self.subject_names.get(subject, subject)


@dataclass(frozen=True)
class Params:
    """Knobs of one computation run.

    ``d`` is the damping share recycled through citations, ``e`` the share
    distributed by citable-document counts; the remaining ``1 - d - e`` is
    the uniform floor. The two caps bound any single transfer coefficient.
    """

    year: int
    window: int = 3
    d: float = 0.9
    e: float = 0.0999
    cap_share: float = 0.5
    cap_per_citation: float = 0.1
    use_cosine: bool = True
    tol: float = 1e-10
    max_iters: int = 200

    def __post_init__(self) -> None:
        if not 0.0 < self.d < 1.0:
            raise ConfigError(f"d must be in (0, 1), got {self.d}")
        if not 0.0 < self.e < 1.0:
            raise ConfigError(f"e must be in (0, 1), got {self.e}")
        if self.d + self.e >= 1.0:
            raise ConfigError(f"d + e must be < 1, got {self.d + self.e}")
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
        if not 0.0 < self.cap_share <= 1.0:
            raise ConfigError(f"cap_share must be in (0, 1], got {self.cap_share}")
        if self.cap_per_citation <= 0.0:
            raise ConfigError(f"cap_per_citation must be > 0, got {self.cap_per_citation}")
        if self.tol <= 0.0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")

    @property
    def window_years(self) -> range:
        """Cited years eligible for counting: [year - window, year - 1]."""
        return range(self.year - self.window, self.year)


class JournalTable:
    """Ordered journal collection with id -> index lookup.

    Index order is input order and is the canonical row/column order of
    every matrix and vector downstream.
    """

    def __init__(self, journals: Iterable[Journal]):
        self._journals: list[Journal] = list(journals)
        self._index: dict[JournalId, int] = {}
        for i, j in enumerate(self._journals):
            if j.id in self._index:
                raise DataError(f"duplicate journal id {j.id!r}")
            self._index[j.id] = i

    def __len__(self) -> int:
        return len(self._journals)

    def __iter__(self) -> Iterator[Journal]:
        return iter(self._journals)

    def __getitem__(self, idx: int) -> Journal:
        return self._journals[idx]

    def __contains__(self, jid: JournalId) -> bool:
        return jid in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, JournalTable) and self._journals == other._journals

    def get(self, jid: JournalId) -> Journal | None:
        i = self._index.get(jid)
        return None if i is None else self._journals[i]

    def index(self, jid: JournalId) -> int:
        try:
            return self._index[jid]
        except KeyError:
            raise DataError(f"unknown journal id {jid!r}") from None

    def ids(self) -> list[JournalId]:
        return [j.id for j in self._journals]


@dataclass(frozen=True)
class Dataset:
    """A journal table, its citing documents, and the area scheme."""

    journals: JournalTable
    documents: Sequence  # of ingest.CitingDocument; typically ingest.DocumentArrays
    scheme: SubjectScheme


def build_dataset(journals: Iterable[Journal], documents: Sequence, scheme: SubjectScheme) -> Dataset:
    """Assemble a Dataset, resolving each journal's subject areas.

    Raises DataError when a journal carries a specific-area code the scheme
    does not know: area resolution must be total.
    """
    resolved = []
    for j in journals:
        areas = frozenset(scheme.subject_of(s) for s in j.specific_areas)
        resolved.append(replace(j, areas=areas) if areas != j.areas else j)
    return Dataset(journals=JournalTable(resolved), documents=documents, scheme=scheme)


@dataclass
class ValidationReport:
    """Outcome of dataset validation. Never raises; fatal problems are flags.

    Listing fields keep at most ``max_examples`` entries; the companion
    ``n_*`` counters are always exact.
    """

    n_journals: int = 0
    n_documents: int = 0
    n_refs: int = 0
    unknown_ids: list[str] = field(default_factory=list)
    n_unknown_ids: int = 0
    docs_outside_year: list[int] = field(default_factory=list)  # document indices
    n_docs_outside_year: int = 0
    refs_outside_window: list[tuple[int, JournalId, int]] = field(default_factory=list)
    n_refs_outside_window: int = 0
    zero_art_journals: list[JournalId] = field(default_factory=list)
    n_zero_art_journals: int = 0
    dangling_ranked_count: int = 0
    fatal: list[str] = field(default_factory=list)

    max_examples: int = 1000

    @property
    def ok(self) -> bool:
        return not self.fatal


def validate_dataset(ds: Dataset, p: Params, max_examples: int = 1000) -> ValidationReport:
    """Check a dataset against the run parameters without modifying it.

    Reports unknown journal ids referenced by documents, documents outside
    the computation year, references outside the citation window, journals
    with no citable documents in the window, and the number of ranked
    journals that emit no eligible references (dangling).
    """
    from . import ingest  # local import: model must not depend on ingest at import time

    report = ValidationReport(max_examples=max_examples)
    table = ds.journals
    report.n_journals = len(table)
    if report.n_journals == 0:
        report.fatal.append("no journals")

    lo, hi = p.year - p.window, p.year - 1

    total_art = 0
    for j in table:
        a = j.art(p.year, p.window)
        total_art += a
        if a == 0:
            report.n_zero_art_journals += 1
            if len(report.zero_art_journals) < max_examples:
                report.zero_art_journals.append(j.id)
    if report.n_journals and total_art == 0:
        report.fatal.append("no citable documents in window")

    docs = ds.documents
    if isinstance(docs, ingest.DocumentArrays):
        _validate_arrays(docs, table, p, report)
    else:
        _validate_objects(docs, table, p, report)
    return report


def _note_unknown(report: ValidationReport, jid: JournalId) -> None:
    report.n_unknown_ids += 1
    if len(report.unknown_ids) < report.max_examples:
        report.unknown_ids.append(jid)


def _validate_objects(docs, table: JournalTable, p: Params, report: ValidationReport) -> None:
    lo, hi = p.year - p.window, p.year - 1
    emitting: set[int] = set()
    for di, doc in enumerate(docs):
        report.n_documents += 1
        src = table.get(doc.source_journal)
        if src is None:
            _note_unknown(report, doc.source_journal)
        if doc.year != p.year:
            report.n_docs_outside_year += 1
            if len(report.docs_outside_year) < report.max_examples:
                report.docs_outside_year.append(di)
        for cited, cited_year, n in doc.refs:
            report.n_refs += 1
            if cited not in table:
                _note_unknown(report, cited)
                continue
            if not lo <= cited_year <= hi:
                report.n_refs_outside_window += 1
                if len(report.refs_outside_window) < report.max_examples:
                    report.refs_outside_window.append((di, cited, cited_year))
            elif src is not None and src.ranked and doc.year == p.year:
                emitting.add(doc.source_journal)
    report.dangling_ranked_count = sum(1 for j in table if j.ranked and j.id not in emitting)


def _validate_arrays(docs, table: JournalTable, p: Params, report: ValidationReport) -> None:
    # DocumentArrays hold only known journal indices, so no unknown-id scan.
    import numpy as np

    report.n_documents = docs.n_documents
    report.n_refs = docs.n_refs
    lo, hi = p.year - p.window, p.year - 1

    off_year = np.flatnonzero(docs.doc_year != p.year)
    report.n_docs_outside_year = int(off_year.size)
    for di in off_year[: report.max_examples]:
        report.docs_outside_year.append(int(di))

    in_window = (docs.ref_year >= lo) & (docs.ref_year <= hi)
    outside = np.flatnonzero(~in_window)
    report.n_refs_outside_window = int(outside.size)
    ref_doc = docs.ref_doc()
    for k in outside[: report.max_examples]:
        report.refs_outside_window.append(
            (int(ref_doc[k]), table[int(docs.ref_journal[k])].id, int(docs.ref_year[k]))
        )

    ranked = np.fromiter((j.ranked for j in table), dtype=bool, count=len(table))
    doc_ok = docs.doc_year[ref_doc] == p.year
    src = docs.doc_src[ref_doc]
    eligible = in_window & doc_ok & ranked[src]
    emitting = np.zeros(len(table), dtype=bool)
    emitting[src[eligible]] = True
    report.dangling_ranked_count = int(np.count_nonzero(ranked & ~emitting))
