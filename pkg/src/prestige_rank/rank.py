"""The prestige fixed point: capped transfer coefficients, the damped
iteration with dangling redistribution, and the size normalization.

Phase 1 iterates

    v'_i = (1 - d - e)/N  +  e * Art_i / sum(Art)  +  (d / D) * sum_j Coef_ji * v_j

where ``Coef_ji`` distributes citing journal j's prestige over the journals
it cites (cosine-weighted when enabled, normalized per row, then capped)
and ``D`` is the total mass actually flowing through the coefficients this
iteration. Dividing by D recycles whatever the caps and the dangling
journals withheld, proportionally to what journals receive, so every
iterate sums to exactly 1. Phase 2 divides the converged shares by each
journal's share of citable documents, giving a size-independent score
whose document-weighted mean is 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .cocite import CosineMap
from .ingest import ArtVector, CitationMatrix
from .model import DataError, Params


class ConvergenceError(Exception):
    """Iteration did not reach tol within max_iters; carries the partial result."""

    def __init__(self, message: str, result: "PrestigeVector"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class CoefMatrix:
    """Capped prestige-transfer coefficients.

    ``outgoing`` has citing journals as rows; ``incoming`` is its transpose
    in CSR form so the iteration's matvec traverses cited journals row-major
    in a fixed order (reproducible summation).
    """

    outgoing: sp.csr_matrix
    incoming: sp.csr_matrix
    use_cosine: bool

    @property
    def n(self) -> int:
        return self.outgoing.shape[0]

    @property
    def nnz(self) -> int:
        return self.outgoing.nnz

    def get(self, j: int, i: int) -> float | None:
        lo, hi = self.outgoing.indptr[j], self.outgoing.indptr[j + 1]
        pos = lo + np.searchsorted(self.outgoing.indices[lo:hi], i)
        if pos < hi and self.outgoing.indices[pos] == i:
            return float(self.outgoing.data[pos])
        return None


@dataclass(frozen=True)
class PrestigeVector:
    """Converged (or partial) prestige shares, summing to 1."""

    values: np.ndarray
    iterations: int
    converged: bool
    residual: float
    dangling_fallback: bool = False
    sum_history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class ScoreVector:
    """Size-normalized scores; NaN for journals with no citable documents."""

    values: np.ndarray
    unscored: tuple[int, ...]  # indices with Art == 0

    def weighted_mean(self, art: ArtVector) -> float:
        """Document-share-weighted mean over scored journals."""
        scored = ~np.isnan(self.values)
        return float((self.values[scored] * art.counts[scored]).sum() / art.total)


def compute_coefficients(cmat: CitationMatrix, cosmap: CosineMap | None, p: Params) -> CoefMatrix:
    """Normalize each citing journal's (weighted) reference counts, then cap.

    The weight is the profile cosine when enabled, 1 otherwise. Each stored
    coefficient is min(row-normalized weight, cap_share, cap_per_citation *
    C_ji); capped-off mass is NOT redistributed within the row, it rejoins
    the undistributed pool recycled by the iteration's D divisor. Rows with
    a zero denominator (no references, or no positive cosine) store nothing
    and their journals are dangling.
    """
    counts = cmat.counts
    n = counts.shape[0]
    c_data = counts.data.astype(np.float64)
    if p.use_cosine:
        if cosmap is None:
            raise ValueError("use_cosine requires a CosineMap covering the citation edges")
        weighted = cosmap.values * c_data
    else:
        weighted = c_data.copy()
    pattern = sp.csr_matrix((weighted, counts.indices, counts.indptr), shape=(n, n))
    row_sums = pattern @ np.ones(n)
    rows = np.repeat(np.arange(n), np.diff(counts.indptr))
    denom = row_sums[rows]
    with np.errstate(invalid="ignore", divide="ignore"):
        raw = np.where(denom > 0.0, weighted / denom, 0.0)
    capped = np.minimum(raw, np.minimum(p.cap_share, p.cap_per_citation * c_data))
    out = sp.csr_matrix((capped, counts.indices.copy(), counts.indptr.copy()), shape=(n, n))
    out.eliminate_zeros()
    incoming = out.T.tocsr()
    incoming.sort_indices()
    return CoefMatrix(outgoing=out, incoming=incoming, use_cosine=p.use_cosine)


def psjr2d(coef: CoefMatrix, v: np.ndarray) -> float:
    """Total prestige distributed through the coefficients for state v.

    This is the citation mass leaving non-dangling journals in one
    iteration, computed with the capped coefficients; 0 when the network
    has no coefficients at all.
    """
    if coef.nnz == 0:
        return 0.0
    return float((coef.incoming @ v).sum())


def iterate_psjr2(coef: CoefMatrix, art: ArtVector, p: Params) -> PrestigeVector:
    """Run the damped fixed-point iteration from the uniform start.

    Stops when the L1 difference between successive iterates drops below
    ``p.tol``; raises ConvergenceError (carrying the partial result) after
    ``p.max_iters`` steps. If no journal distributes anything (D = 0), the
    citation share d is assigned proportionally to citable documents and
    the result is flagged ``dangling_fallback``.
    """
    n = coef.n
    if n < 1:
        raise DataError("cannot rank an empty journal table")
    total_art = art.total
    if total_art <= 0:
        raise DataError("no citable documents in window")

    art_share = art.counts / float(total_art)
    base = (1.0 - p.d - p.e) / n + p.e * art_share
    incoming = coef.incoming
    has_edges = coef.nnz > 0

    v = np.full(n, 1.0 / n)
    fallback = False
    sums: list[float] = []
    residual = float("inf")
    for it in range(1, p.max_iters + 1):
        if has_edges:
            received = incoming @ v
            dist = float(received.sum())
        else:
            dist = 0.0
        if dist > 0.0:
            v_new = base + (p.d / dist) * received
        else:
            v_new = base + p.d * art_share
            fallback = True
        residual = float(np.abs(v_new - v).sum())
        v = v_new
        sums.append(float(v.sum()))
        if residual < p.tol:
            return PrestigeVector(
                values=v,
                iterations=it,
                converged=True,
                residual=residual,
                dangling_fallback=fallback,
                sum_history=sums,
            )
    partial = PrestigeVector(
        values=v,
        iterations=p.max_iters,
        converged=False,
        residual=residual,
        dangling_fallback=fallback,
        sum_history=sums,
    )
    raise ConvergenceError(
        f"no convergence after {p.max_iters} iterations (last residual {residual:.3e})",
        partial,
    )


def compute_sjr2(v: PrestigeVector, art: ArtVector) -> ScoreVector:
    """Divide prestige shares by citable-document shares.

    Journals without citable documents in the window keep their prestige
    but get no score (NaN) and are listed in ``unscored``.
    """
    total = float(v.values.sum())
    if abs(total - 1.0) > 1e-9:
        raise DataError(f"prestige vector must sum to 1, got {total!r}")
    scores = np.full(len(v.values), np.nan)
    scored = art.counts > 0
    scores[scored] = v.values[scored] * art.total / art.counts[scored]
    return ScoreVector(values=scores, unscored=tuple(int(i) for i in np.flatnonzero(~scored)))
