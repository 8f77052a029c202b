"""Journal cocitation counts and cosine closeness between cocitation profiles.

Two journals are cocited when one citing document references both of them
inside the citation window. Closeness of journals i and j is the cosine of
the angle between their cocitation profiles with components i and j removed
from both vectors, so the (usually dominant) mutual and self cocitations
cannot inflate the similarity.

Cosines are evaluated only on citation edges (ordered pairs with a nonzero
reference count), never over all J^2 pairs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterator

import numba
import numpy as np
import scipy.sparse as sp
from numba import njit, prange

# workqueue is always available and fork-safe; avoids probing TBB/OpenMP
numba.config.THREADING_LAYER = "workqueue"

from .ingest import CitationMatrix, DocumentArrays, compile_documents
from .model import JournalTable, Params


def thread_cap() -> int:
    """Worker cap from PRESTIGE_RANK_THREADS, bounded by the numba pool size."""
    limit = numba.config.NUMBA_NUM_THREADS
    raw = os.environ.get("PRESTIGE_RANK_THREADS")
    if raw is None:
        return limit
    try:
        requested = int(raw)
    except ValueError:
        return limit
    return max(1, min(requested, limit))


@dataclass(frozen=True)
class CocitationMatrix:
    """Sparse symmetric cocitation counts with an implicitly-zero diagonal.

    The diagonal is never stored: no cosine ever reads it, because the
    profile components for the two journals under comparison are excluded.
    """

    counts: sp.csr_matrix  # int64 data, zero diagonal

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    def pair(self, i: int, j: int) -> int:
        if i == j:
            return 0
        return int(self.counts[i, j])

    @classmethod
    def from_pair_counts(cls, n: int, pairs: dict[tuple[int, int], int]) -> "CocitationMatrix":
        """Build from unordered pair counts (test/fixture convenience)."""
        rows, cols, data = [], [], []
        for (i, j), c in pairs.items():
            if i == j:
                raise ValueError("cocitation diagonal is not representable")
            rows += [i, j]
            cols += [j, i]
            data += [c, c]
        mat = sp.coo_matrix((data, (rows, cols)), shape=(n, n), dtype=np.int64).tocsr()
        mat.sum_duplicates()
        return cls(counts=mat)


def build_cocitation(docs, p: Params, table: JournalTable | None = None) -> CocitationMatrix:
    """Count, per unordered journal pair, the citing documents referencing both.

    A document contributes 1 to every pair of distinct journals in its
    in-window reference set, regardless of reference multiplicities. All
    documents of the computation year count, ranked or not: cocitation
    measures thematic relatedness, not prestige flow.
    """
    if not isinstance(docs, DocumentArrays):
        if table is None:
            raise ValueError("table is required when docs are not DocumentArrays")
        docs = compile_documents(docs, table)
    n = len(docs.table)
    ref_doc = docs.ref_doc()
    mask = (
        (docs.doc_year[ref_doc] == p.year)
        & (docs.ref_year >= p.year - p.window)
        & (docs.ref_year <= p.year - 1)
    )
    d_idx = ref_doc[mask]
    j_idx = docs.ref_journal[mask].astype(np.int64)
    if d_idx.size == 0:
        return CocitationMatrix(counts=sp.csr_matrix((n, n), dtype=np.int64))
    # distinct (document, journal) incidences; multiplicity is irrelevant here
    key = d_idx * np.int64(n) + j_idx
    key = np.unique(key)
    rows = key // n
    cols = key % n
    incidence = sp.csr_matrix(
        (np.ones(key.size, dtype=np.int32), (rows, cols)),
        shape=(int(docs.n_documents), n),
    )
    cocit = (incidence.T @ incidence).tocsr()
    cocit.setdiag(0)
    cocit.eliminate_zeros()
    return CocitationMatrix(counts=sp.csr_matrix((cocit.data.astype(np.int64), cocit.indices, cocit.indptr), shape=(n, n)))


def cosine(cocit: CocitationMatrix, i: int, j: int) -> float:
    """Cosine between the cocitation profiles of journals i and j.

    Components i and j are excluded from both profiles. Returns 0.0 when
    either truncated profile is all-zero. The summation runs over the
    support intersection in ascending column order, so cosine(i, j) and
    cosine(j, i) are bit-identical.
    """
    if i == j:
        raise ValueError(f"cosine requires two distinct journals, got index {i} twice")
    mat = cocit.counts
    ai, bi = mat.indptr[i], mat.indptr[i + 1]
    aj, bj = mat.indptr[j], mat.indptr[j + 1]
    cols_i, data_i = mat.indices[ai:bi], mat.data[ai:bi]
    cols_j, data_j = mat.indices[aj:bj], mat.data[aj:bj]

    cross = 0.0  # Cocit_ij, excluded from both norms
    pos = np.searchsorted(cols_i, j)
    if pos < cols_i.size and cols_i[pos] == j:
        cross = float(data_i[pos])

    num = 0.0
    a = b = 0
    while a < cols_i.size and b < cols_j.size:
        ca, cb = cols_i[a], cols_j[b]
        if ca == cb:
            num += float(data_i[a]) * float(data_j[b])
            a += 1
            b += 1
        elif ca < cb:
            a += 1
        else:
            b += 1
    norm2_i = float((data_i.astype(np.float64) ** 2).sum()) - cross * cross
    norm2_j = float((data_j.astype(np.float64) ** 2).sum()) - cross * cross
    if norm2_i <= 0.0 or norm2_j <= 0.0:
        return 0.0
    return min(num / np.sqrt(norm2_i * norm2_j), 1.0)


class CosineMap:
    """Cosines for exactly the ordered pairs with a citation edge.

    Values are stored aligned with the citation matrix's CSR layout,
    so `values[k]` belongs to the k-th stored (citing, cited) entry.
    Self-citation edges (diagonal pairs) carry the cosine of a profile
    with itself: exactly 1.0 whenever the journal has any cocitation
    partner, 0.0 otherwise.
    """

    def __init__(self, pattern: sp.csr_matrix, values: np.ndarray):
        self.indptr = pattern.indptr
        self.indices = pattern.indices
        self.values = values
        self.n = pattern.shape[0]

    def __len__(self) -> int:
        return len(self.values)

    def get(self, j: int, i: int) -> float | None:
        """Cosine for citing journal j -> cited journal i, None off-support."""
        lo, hi = self.indptr[j], self.indptr[j + 1]
        pos = lo + np.searchsorted(self.indices[lo:hi], i)
        if pos < hi and self.indices[pos] == i:
            return float(self.values[pos])
        return None

    def __getitem__(self, pair: tuple[int, int]) -> float:
        v = self.get(*pair)
        if v is None:
            raise KeyError(pair)
        return v

    def items(self) -> Iterator[tuple[tuple[int, int], float]]:
        for j in range(self.n):
            for k in range(self.indptr[j], self.indptr[j + 1]):
                yield (j, int(self.indices[k])), float(self.values[k])


@njit(cache=True)
def _row_sumsq(indptr, data):
    n = len(indptr) - 1
    out = np.zeros(n, dtype=np.float64)
    for r in range(n):
        s = 0.0
        for t in range(indptr[r], indptr[r + 1]):
            v = data[t]
            s += v * v
        out[r] = s
    return out


@njit(parallel=True, cache=True)
def _edge_cosines(c_indptr, c_indices, g_indptr, g_indices, g_data, g_norm2, n, nchunks, out):
    # Rows are split into nchunks contiguous slices, each with its own
    # scatter buffer; every out[k] is written exactly once from a purely
    # sequential inner sum, so results do not depend on the thread count.
    bufs = np.zeros((nchunks, n), dtype=np.float64)
    for chunk in prange(nchunks):
        buf = bufs[chunk]
        for j in range((n * chunk) // nchunks, (n * (chunk + 1)) // nchunks):
            lo, hi = c_indptr[j], c_indptr[j + 1]
            if lo == hi:
                continue
            glo, ghi = g_indptr[j], g_indptr[j + 1]
            for t in range(glo, ghi):
                buf[g_indices[t]] = g_data[t]
            nj = g_norm2[j]
            for k in range(lo, hi):
                i = c_indices[k]
                num = 0.0
                for t in range(g_indptr[i], g_indptr[i + 1]):
                    num += g_data[t] * buf[g_indices[t]]
                cross = buf[i]
                di = g_norm2[i] - cross * cross
                dj = nj - cross * cross
                if di <= 0.0 or dj <= 0.0:
                    out[k] = 0.0
                else:
                    out[k] = min(num / np.sqrt(di * dj), 1.0)
            for t in range(glo, ghi):
                buf[g_indices[t]] = 0.0


def cosines_for_edges(cocit: CocitationMatrix, cmat: CitationMatrix) -> CosineMap:
    """Evaluate the profile cosine on every stored citation edge."""
    pattern = cmat.counts
    out = np.zeros(pattern.nnz, dtype=np.float64)
    if pattern.nnz:
        g = cocit.counts
        g_data = g.data.astype(np.float64)
        norm2 = _row_sumsq(g.indptr.astype(np.int64), g_data)
        workers = thread_cap()
        prev = numba.get_num_threads()
        numba.set_num_threads(workers)
        try:
            _edge_cosines(
                pattern.indptr.astype(np.int64),
                pattern.indices.astype(np.int64),
                g.indptr.astype(np.int64),
                g.indices.astype(np.int64),
                g_data,
                norm2,
                pattern.shape[0],
                workers,
                out,
            )
        finally:
            numba.set_num_threads(prev)
    return CosineMap(pattern, out)
