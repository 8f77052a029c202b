"""Reference indicators: raw windowed citation counts and the per-document
citation rate over the same window the prestige ranking uses.

Unlike the prestige engine, the citation-rate baseline counts references
from every source journal, ranked or not, mirroring how impact-factor
style indicators are computed from the full database.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import ArtVector, DocumentArrays, compile_documents, _eligible_ref_mask
from .model import DataError, JournalTable, Params


@dataclass(frozen=True)
class BaselineTable:
    """Windowed citation counts and citations-per-citable-document."""

    citations_3y: np.ndarray  # int64
    jif3y: np.ndarray  # float64, NaN where Art == 0
    unscored: tuple[int, ...]

    @property
    def total_citations(self) -> int:
        return int(self.citations_3y.sum())


def compute_jif3y(docs, art: ArtVector, p: Params, table: JournalTable | None = None) -> BaselineTable:
    """Count in-window citations to each journal and divide by its Art.

    All computation-year documents contribute, including those from
    unranked source journals, so the counts here are always at least the
    ranked-source subset that feeds the prestige engine.
    """
    if art.total <= 0:
        raise DataError("no citable documents in window")
    if not isinstance(docs, DocumentArrays):
        if table is None:
            raise ValueError("table is required when docs are not DocumentArrays")
        docs = compile_documents(docs, table)
    n = len(docs.table)
    mask = _eligible_ref_mask(docs, p, ranked_only=False)
    citations = np.bincount(
        docs.ref_journal[mask], weights=docs.ref_n[mask], minlength=n
    ).astype(np.int64)
    jif = np.full(n, np.nan)
    scored = art.counts > 0
    jif[scored] = citations[scored] / art.counts[scored]
    return BaselineTable(
        citations_3y=citations,
        jif3y=jif,
        unscored=tuple(int(i) for i in np.flatnonzero(~scored)),
    )
