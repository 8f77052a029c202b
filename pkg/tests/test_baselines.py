from __future__ import annotations

import numpy as np
import pytest

from prestige_rank import (
    CitingDocument,
    DataError,
    Params,
    build_art_vector,
    build_citation_matrix,
    build_dataset,
    compute_jif3y,
)
from conftest import journal


def dataset_with(journals, docs, scheme):
    return build_dataset(journals, docs, scheme)


class TestJif3y:
    def test_survey_journal_rate(self, scheme, params):
        # 647 in-window citations against 36 citable documents -> 17.97
        journals = [
            journal("TARGET", counts={2005: 12, 2006: 12, 2007: 12}),
            journal("SRC", counts={2006: 10}),
        ]
        docs = [
            CitingDocument("SRC", 2008, (("TARGET", 2006, 600),)),
            CitingDocument("SRC", 2008, (("TARGET", 2007, 47),)),
        ]
        ds = dataset_with(journals, docs, scheme)
        art = build_art_vector(ds.journals, params)
        table = compute_jif3y(ds.documents, art, params, ds.journals)
        idx = ds.journals.index("TARGET")
        assert table.citations_3y[idx] == 647
        assert table.jif3y[idx] == pytest.approx(17.97, abs=0.005)

    def test_small_journal_rate(self, scheme, params):
        journals = [
            journal("T", counts={2005: 3, 2006: 3, 2007: 4}),
            journal("S", counts={2006: 10}),
        ]
        docs = [CitingDocument("S", 2008, (("T", 2007, 72),))]
        ds = dataset_with(journals, docs, scheme)
        art = build_art_vector(ds.journals, params)
        table = compute_jif3y(ds.documents, art, params, ds.journals)
        assert table.jif3y[ds.journals.index("T")] == pytest.approx(7.2, abs=0.005)

    def test_zero_citations(self, scheme, params):
        ds = dataset_with([journal("A")], [], scheme)
        art = build_art_vector(ds.journals, params)
        table = compute_jif3y(ds.documents, art, params, ds.journals)
        assert table.citations_3y[0] == 0
        assert table.jif3y[0] == 0.0

    def test_unranked_sources_count_for_jif_not_for_matrix(self, scheme, params):
        journals = [
            journal("T"),
            journal("R", counts={2006: 5}),
            journal("U", areas=(), ranked=False, counts={2006: 5}),
        ]
        docs = [
            CitingDocument("R", 2008, (("T", 2006, 2),)),
            CitingDocument("U", 2008, (("T", 2006, 3),)),
        ]
        ds = dataset_with(journals, docs, scheme)
        art = build_art_vector(ds.journals, params)
        table = compute_jif3y(ds.documents, art, params, ds.journals)
        cmat = build_citation_matrix(ds.documents, ds.journals, params)
        t = ds.journals.index("T")
        assert table.citations_3y[t] == 5
        ranked_subset = int(cmat.counts[:, t].sum())
        assert ranked_subset == 2
        assert table.citations_3y[t] >= ranked_subset

    def test_totals_match_stream(self, three_journal_dataset, params):
        ds = three_journal_dataset
        art = build_art_vector(ds.journals, params)
        table = compute_jif3y(ds.documents, art, params, ds.journals)
        in_window = 0
        for doc in ds.documents:
            if doc.year != params.year:
                continue
            for _, y, n in doc.refs:
                if params.year - params.window <= y <= params.year - 1:
                    in_window += n
        assert table.total_citations == in_window

    def test_zero_art_journal_omitted_from_rates(self, scheme, params):
        journals = [journal("A"), journal("Z", counts={2001: 9})]
        docs = [CitingDocument("A", 2008, (("Z", 2006, 4),))]
        ds = dataset_with(journals, docs, scheme)
        art = build_art_vector(ds.journals, params)
        table = compute_jif3y(ds.documents, art, params, ds.journals)
        z = ds.journals.index("Z")
        assert table.citations_3y[z] == 4
        assert np.isnan(table.jif3y[z])
        assert z in table.unscored

    def test_requires_documents_in_window(self, scheme, params):
        from prestige_rank import ArtVector

        ds = dataset_with([journal("A")], [], scheme)
        with pytest.raises(DataError):
            compute_jif3y(ds.documents, ArtVector(counts=np.zeros(1, dtype=np.int64)), params, ds.journals)
