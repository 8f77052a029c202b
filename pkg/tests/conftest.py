from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp

from prestige_rank import (
    CitationMatrix,
    CitingDocument,
    CosineMap,
    Journal,
    JournalTable,
    Params,
    SubjectScheme,
    build_dataset,
)


def journal(jid, areas=("1301",), counts=None, ranked=True, title=None):
    return Journal(
        id=jid,
        title=title or f"Journal {jid}",
        specific_areas=frozenset(areas) if ranked else frozenset(areas or ()),
        citable_by_year=dict(counts or {2005: 4, 2006: 4, 2007: 4}),
        ranked=ranked,
    )


def cmat_from_dense(arr) -> CitationMatrix:
    return CitationMatrix(counts=sp.csr_matrix(np.asarray(arr, dtype=np.int64)))


def cosmap_from(cmat: CitationMatrix, mapping) -> CosineMap:
    """Build a CosineMap over cmat's support from {(j, i): cos}."""
    pattern = cmat.counts
    vals = np.zeros(pattern.nnz)
    for j in range(pattern.shape[0]):
        for k in range(pattern.indptr[j], pattern.indptr[j + 1]):
            vals[k] = mapping[(j, int(pattern.indices[k]))]
    return CosineMap(pattern, vals)


@pytest.fixture
def scheme() -> SubjectScheme:
    return SubjectScheme(
        parent={"1301": "1300", "1302": "1300", "2001": "2000", "1000": "1000"},
        subject_names={"1300": "Field A", "2000": "Field B", "1000": "General"},
    )


@pytest.fixture
def params() -> Params:
    return Params(year=2008)


@pytest.fixture
def three_journal_dataset(scheme):
    """Small asymmetric network: A and B cite each other, C cites only A.

    C's documents land outside the year or window in part, so hand counts
    below stay easy to track in the ingest tests.
    """
    journals = [
        journal("A", counts={2005: 4, 2006: 3, 2007: 3}),
        journal("B", areas=("1302",), counts={2005: 6, 2006: 8, 2007: 6}),
        journal("C", areas=("2001",), counts={2006: 2, 2007: 3}),
    ]
    docs = [
        CitingDocument("A", 2008, (("B", 2006, 2), ("B", 2007, 1), ("C", 2005, 1))),
        CitingDocument("A", 2008, (("B", 2005, 1), ("C", 2002, 5))),  # last ref out of window
        CitingDocument("B", 2008, (("A", 2006, 3), ("B", 2007, 1))),
        CitingDocument("B", 2007, (("A", 2006, 9),)),  # wrong year, ignored by builders
        CitingDocument("C", 2008, (("A", 2005, 2),)),
    ]
    return build_dataset(journals, docs, scheme)


def make_symmetric_dataset(n: int, docs_per_journal: int = 2, art: int = 12, scheme=None):
    """Complete symmetric network: every journal cites all others equally."""
    scheme = scheme or SubjectScheme(parent={"1301": "1300"}, subject_names={"1300": "Field A"})
    per_year = {2005: art // 3, 2006: art // 3, 2007: art - 2 * (art // 3)}
    journals = [journal(f"J{k}", counts=per_year) for k in range(n)]
    docs = []
    for k in range(n):
        for _ in range(docs_per_journal):
            refs = tuple((f"J{m}", 2006, 1) for m in range(n) if m != k)
            docs.append(CitingDocument(f"J{k}", 2008, refs))
    return build_dataset(journals, docs, scheme)
