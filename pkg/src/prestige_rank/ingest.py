"""Input parsing and matrix construction.

Two input files describe a citation network:

* journals CSV (header row): ``id,title,specific_areas,citable_by_year,ranked``
  with ``;``-separated area codes and ``;``-separated ``year:count`` pairs;
* citations JSON Lines, one citing document per line:
  ``{"src": id, "year": int, "refs": [{"j": id, "y": int, "n": int}, ...]}``.

A third CSV maps specific-area codes to subject areas:
``specific_code,subject_code,subject_name`` (subject code ``1000`` is General).

Documents are compiled into flat numpy arrays (`DocumentArrays`) so the
matrix builders run vectorized; the arrays still behave as a sequence of
`CitingDocument` for callers that want the object view.
"""

from __future__ import annotations

import csv
import io
import json
import re
from array import array
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .model import (
    DataError,
    Dataset,
    Journal,
    JournalId,
    JournalTable,
    Params,
    SubjectScheme,
    build_dataset,
)

JOURNALS_HEADER = ["id", "title", "specific_areas", "citable_by_year", "ranked"]
SCHEME_HEADER = ["specific_code", "subject_code", "subject_name"]


class ParseError(DataError):
    """Malformed input row/record; message carries the location."""


@dataclass(frozen=True)
class CitingDocument:
    """One citing document: source journal, publication year, reference list.

    Each ref is ``(cited_journal, cited_year, n)`` with n >= 1 occurrences.
    """

    source_journal: JournalId
    year: int
    refs: tuple[tuple[JournalId, int, int], ...] = ()

    def __post_init__(self) -> None:
        for _, _, n in self.refs:
            if n < 1:
                raise DataError(f"reference count must be >= 1, got {n}")


@dataclass
class IngestIssues:
    """Non-fatal problems collected while parsing citations."""

    unknown_source_ids: list[str] = field(default_factory=list)
    unknown_ref_ids: list[str] = field(default_factory=list)
    n_docs_dropped: int = 0
    n_refs_dropped: int = 0


class DocumentArrays(Sequence):
    """Column-oriented document store; a Sequence of CitingDocument.

    ``ref_ptr`` delimits each document's slice of the flat reference
    arrays, CSR-style. Journal references are stored as table indices.
    """

    def __init__(self, table: JournalTable, doc_src, doc_year, ref_ptr, ref_journal, ref_year, ref_n):
        self.table = table
        self.doc_src = np.asarray(doc_src, dtype=np.int32)
        self.doc_year = np.asarray(doc_year, dtype=np.int32)
        self.ref_ptr = np.asarray(ref_ptr, dtype=np.int64)
        self.ref_journal = np.asarray(ref_journal, dtype=np.int32)
        self.ref_year = np.asarray(ref_year, dtype=np.int32)
        self.ref_n = np.asarray(ref_n, dtype=np.int64)
        self._ref_doc: np.ndarray | None = None

    @property
    def n_documents(self) -> int:
        return len(self.doc_src)

    @property
    def n_refs(self) -> int:
        return len(self.ref_journal)

    def ref_doc(self) -> np.ndarray:
        """Owning document index of every reference (cached)."""
        if self._ref_doc is None:
            counts = np.diff(self.ref_ptr)
            self._ref_doc = np.repeat(np.arange(self.n_documents, dtype=np.int64), counts)
        return self._ref_doc

    def __len__(self) -> int:
        return self.n_documents

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        lo, hi = self.ref_ptr[i], self.ref_ptr[i + 1]
        ids = self.table.ids()
        refs = tuple(
            (ids[self.ref_journal[k]], int(self.ref_year[k]), int(self.ref_n[k]))
            for k in range(lo, hi)
        )
        return CitingDocument(ids[self.doc_src[i]], int(self.doc_year[i]), refs)


def compile_documents(docs: Iterable[CitingDocument], table: JournalTable) -> DocumentArrays:
    """Flatten CitingDocument objects into DocumentArrays.

    All journal ids must exist in the table (parse time already dropped
    unknown ones; hand-built docs with unknown ids raise DataError).
    """
    if isinstance(docs, DocumentArrays):
        return docs
    doc_src = array("i")
    doc_year = array("i")
    ref_ptr = array("q", [0])
    ref_journal = array("i")
    ref_year = array("i")
    ref_n = array("q")
    index = table.index
    for doc in docs:
        doc_src.append(index(doc.source_journal))
        doc_year.append(doc.year)
        for jid, y, n in doc.refs:
            ref_journal.append(index(jid))
            ref_year.append(y)
            ref_n.append(n)
        ref_ptr.append(len(ref_journal))
    return DocumentArrays(table, doc_src, doc_year, ref_ptr, ref_journal, ref_year, ref_n)


# ---------------------------------------------------------------------------
# Parsing


def _open_text(source) -> IO[str]:
    if isinstance(source, (str, bytes)) and not isinstance(source, bytes):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.RawIOBase) or isinstance(source, io.BufferedIOBase):
        return io.TextIOWrapper(source, encoding="utf-8", newline="")
    return source  # already a text stream


def parse_journals(source) -> JournalTable:
    """Parse the journals CSV into a JournalTable (order preserved)."""
    fh = _open_text(source)
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != JOURNALS_HEADER:
        raise ParseError(f"journals file: expected header {','.join(JOURNALS_HEADER)!r}")
    journals = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 5:
            raise ParseError(f"journals file line {lineno}: expected 5 fields, got {len(row)}")
        jid, title, areas_field, counts_field, ranked_field = row
        if jid in seen:
            raise ParseError(f"journals file line {lineno}: duplicate journal id {jid!r}")
        seen.add(jid)
        specific = frozenset(a for a in areas_field.split(";") if a)
        counts: dict[int, int] = {}
        if counts_field:
            for pair in counts_field.split(";"):
                try:
                    y, c = pair.split(":")
                    counts[int(y)] = int(c)
                except ValueError:
                    raise ParseError(
                        f"journals file line {lineno}: bad year:count entry {pair!r}"
                    ) from None
        ranked_norm = ranked_field.strip().lower()
        if ranked_norm not in ("true", "false"):
            raise ParseError(f"journals file line {lineno}: ranked must be true|false, got {ranked_field!r}")
        try:
            journals.append(
                Journal(
                    id=jid,
                    title=title,
                    specific_areas=specific,
                    citable_by_year=counts,
                    ranked=ranked_norm == "true",
                )
            )
        except DataError as exc:
            raise ParseError(f"journals file line {lineno}: {exc}") from None
    return JournalTable(journals)


def parse_scheme(source) -> SubjectScheme:
    """Parse the subject scheme CSV (specific -> subject mapping)."""
    fh = _open_text(source)
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != SCHEME_HEADER:
        raise ParseError(f"scheme file: expected header {','.join(SCHEME_HEADER)!r}")
    parent: dict[str, str] = {}
    names: dict[str, str] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise ParseError(f"scheme file line {lineno}: expected 3 fields, got {len(row)}")
        specific, subject, name = row
        if specific in parent and parent[specific] != subject:
            raise ParseError(f"scheme file line {lineno}: specific area {specific!r} remapped")
        parent[specific] = subject
        if name:
            names[subject] = name
    return SubjectScheme(parent=parent, subject_names=names)


def parse_citations(
    source, table: JournalTable, issues: IngestIssues | None = None
) -> Iterator[CitingDocument]:
    """Stream citing documents from a JSON Lines source.

    References to unknown journals are dropped; documents from unknown
    source journals are dropped entirely. Both are noted in ``issues``.
    Malformed records raise ParseError with the record index.
    """
    fh = _open_text(source)
    for recno, line in enumerate(fh, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            src = obj["src"]
            year = obj["year"]
            raw_refs = obj["refs"]
            if not isinstance(src, str) or not isinstance(year, int) or not isinstance(raw_refs, list):
                raise TypeError
        except (json.JSONDecodeError, KeyError, TypeError):
            raise ParseError(f"citations record {recno}: malformed document record") from None
        if src not in table:
            if issues is not None:
                issues.unknown_source_ids.append(src)
                issues.n_docs_dropped += 1
                issues.n_refs_dropped += len(raw_refs)
            continue
        refs = []
        for r in raw_refs:
            try:
                jid, y, n = r["j"], r["y"], r["n"]
            except (KeyError, TypeError):
                raise ParseError(f"citations record {recno}: malformed reference entry") from None
            if jid not in table:
                if issues is not None:
                    issues.unknown_ref_ids.append(jid)
                    issues.n_refs_dropped += 1
                continue
            if n < 1:
                raise ParseError(f"citations record {recno}: reference count must be >= 1")
            refs.append((jid, y, n))
        yield CitingDocument(source_journal=src, year=year, refs=tuple(refs))


def load_citations_compiled(source, table: JournalTable, issues: IngestIssues | None = None) -> DocumentArrays:
    """Single-pass streaming parse of citations straight into DocumentArrays."""
    fh = _open_text(source)
    index = {jid: i for i, jid in enumerate(table.ids())}
    doc_src = array("i")
    doc_year = array("i")
    ref_ptr = array("q", [0])
    ref_journal = array("i")
    ref_year = array("i")
    ref_n = array("q")
    loads = json.loads
    get = index.get
    for recno, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        try:
            obj = loads(line)
            src = obj["src"]
            year = obj["year"]
            raw_refs = obj["refs"]
            if not isinstance(src, str) or not isinstance(year, int) or not isinstance(raw_refs, list):
                raise TypeError
        except (json.JSONDecodeError, KeyError, TypeError):
            raise ParseError(f"citations record {recno}: malformed document record") from None
        si = get(src)
        if si is None:
            if issues is not None:
                issues.unknown_source_ids.append(src)
                issues.n_docs_dropped += 1
                issues.n_refs_dropped += len(raw_refs)
            continue
        doc_src.append(si)
        doc_year.append(year)
        for r in raw_refs:
            try:
                ji = get(r["j"])
                y = r["y"]
                n = r["n"]
            except (KeyError, TypeError):
                raise ParseError(f"citations record {recno}: malformed reference entry") from None
            if ji is None:
                if issues is not None:
                    issues.unknown_ref_ids.append(r["j"])
                    issues.n_refs_dropped += 1
                continue
            if n < 1:
                raise ParseError(f"citations record {recno}: reference count must be >= 1")
            ref_journal.append(ji)
            ref_year.append(y)
            ref_n.append(n)
        ref_ptr.append(len(ref_journal))
    return DocumentArrays(table, doc_src, doc_year, ref_ptr, ref_journal, ref_year, ref_n)


def load_dataset(
    journals_path, citations_path, scheme_path
) -> tuple[Dataset, IngestIssues]:
    """Load and assemble a full dataset from the three input files."""
    scheme = parse_scheme(scheme_path)
    table = parse_journals(journals_path)
    issues = IngestIssues()
    docs = load_citations_compiled(citations_path, table, issues)
    ds = build_dataset(list(table), docs, scheme)
    # build_dataset re-creates the table with resolved areas; rebind the arrays
    docs.table = ds.journals
    return ds, issues


# ---------------------------------------------------------------------------
# Serialization (round-trip partners of the parsers; also used by synth)


def write_journals(table: JournalTable, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(JOURNALS_HEADER)
    for j in table:
        areas = ";".join(sorted(j.specific_areas))
        counts = ";".join(f"{y}:{c}" for y, c in sorted(j.citable_by_year.items()))
        w.writerow([j.id, j.title, areas, counts, "true" if j.ranked else "false"])


def write_scheme(scheme: SubjectScheme, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SCHEME_HEADER)
    for specific in sorted(scheme.parent):
        subject = scheme.parent[specific]
        w.writerow([specific, subject, scheme.subject_names.get(subject, "")])


_PLAIN_ID = re.compile(r"^[A-Za-z0-9_.:-]+$")


def write_citations(docs: Iterable[CitingDocument], fh: IO[str]) -> None:
    if isinstance(docs, DocumentArrays) and all(_PLAIN_ID.match(j) for j in docs.table.ids()):
        _write_citations_fast(docs, fh)
        return
    for doc in docs:
        refs = [{"j": j, "y": y, "n": n} for j, y, n in doc.refs]
        fh.write(json.dumps({"src": doc.source_journal, "year": doc.year, "refs": refs}))
        fh.write("\n")


def _write_citations_fast(docs: DocumentArrays, fh: IO[str]) -> None:
    # Manual JSON assembly; valid only for ids with no characters to escape.
    ids = docs.table.ids()
    ptr = docs.ref_ptr
    rj = docs.ref_journal
    ry = docs.ref_year
    rn = docs.ref_n
    for di in range(docs.n_documents):
        refs = ",".join(
            f'{{"j": "{ids[rj[k]]}", "y": {ry[k]}, "n": {rn[k]}}}'
            for k in range(ptr[di], ptr[di + 1])
        )
        fh.write(f'{{"src": "{ids[docs.doc_src[di]]}", "year": {docs.doc_year[di]}, "refs": [{refs}]}}\n')


# ---------------------------------------------------------------------------
# Matrices


@dataclass(frozen=True)
class CitationMatrix:
    """Sparse J x J reference counts; entry (j, i) counts windowed references
    from citing journal j (row) to cited journal i (column)."""

    counts: sp.csr_matrix  # int64 data

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @property
    def nnz(self) -> int:
        return self.counts.nnz

    def total(self) -> int:
        return int(self.counts.data.sum())


@dataclass(frozen=True)
class ArtVector:
    """Per-journal citable-document counts over the citation window."""

    counts: np.ndarray  # int64, aligned with the journal table

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def shares(self) -> np.ndarray:
        return self.counts / self.counts.sum()


def _eligible_ref_mask(docs: DocumentArrays, p: Params, ranked_only: bool) -> np.ndarray:
    ref_doc = docs.ref_doc()
    mask = (
        (docs.doc_year[ref_doc] == p.year)
        & (docs.ref_year >= p.year - p.window)
        & (docs.ref_year <= p.year - 1)
    )
    if ranked_only:
        table = docs.table
        ranked = np.fromiter((j.ranked for j in table), dtype=bool, count=len(table))
        mask &= ranked[docs.doc_src[ref_doc]]
    return mask


def build_citation_matrix(docs, table: JournalTable, p: Params) -> CitationMatrix:
    """Aggregate windowed reference counts from ranked source journals.

    Only documents published in the computation year contribute, and only
    their references to years [year - window, year - 1]. Order of the
    document stream does not matter (integer sums).
    """
    arrays = compile_documents(docs, table)
    mask = _eligible_ref_mask(arrays, p, ranked_only=True)
    n = len(table)
    rows = arrays.doc_src[arrays.ref_doc()[mask]]
    cols = arrays.ref_journal[mask]
    data = arrays.ref_n[mask]
    mat = sp.coo_matrix((data, (rows, cols)), shape=(n, n), dtype=np.int64).tocsr()
    mat.sum_duplicates()
    return CitationMatrix(counts=mat)


def build_art_vector(table: JournalTable, p: Params) -> ArtVector:
    """Sum citable documents over the window for every journal."""
    counts = np.fromiter((j.art(p.year, p.window) for j in table), dtype=np.int64, count=len(table))
    if len(table) and counts.sum() == 0:
        raise DataError("no citable documents in window")
    return ArtVector(counts=counts)
