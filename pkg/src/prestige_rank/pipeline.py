"""End-to-end composition: dataset in, score tables out.

Exists so the CLI, the analysis command, and the tests share one wiring of
the stage modules instead of each re-plumbing matrices by hand.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .baselines import BaselineTable, compute_jif3y
from .cocite import CocitationMatrix, CosineMap, build_cocitation, cosines_for_edges
from .ingest import ArtVector, CitationMatrix, build_art_vector, build_citation_matrix
from .model import Dataset, Params
from .rank import (
    CoefMatrix,
    ConvergenceError,
    PrestigeVector,
    ScoreVector,
    compute_coefficients,
    compute_sjr2,
    iterate_psjr2,
)


@dataclass(frozen=True)
class PipelineResult:
    params: Params
    art: ArtVector
    cmat: CitationMatrix
    cocit: CocitationMatrix | None
    cosines: CosineMap | None
    coef: CoefMatrix
    prestige: PrestigeVector
    scores: ScoreVector
    baseline: BaselineTable


def run_pipeline(ds: Dataset, p: Params, strict: bool = True) -> PipelineResult:
    """Run ingest aggregation, the fixed point, and the baselines.

    With strict=False a non-converged run returns its partial result
    (``prestige.converged`` is False) instead of raising.
    """
    art = build_art_vector(ds.journals, p)
    cmat = build_citation_matrix(ds.documents, ds.journals, p)
    cocit = cosines = None
    if p.use_cosine:
        cocit = build_cocitation(ds.documents, p, ds.journals)
        cosines = cosines_for_edges(cocit, cmat)
    coef = compute_coefficients(cmat, cosines, p)
    try:
        prestige = iterate_psjr2(coef, art, p)
    except ConvergenceError as exc:
        if strict:
            raise
        prestige = exc.result
    scores = compute_sjr2(prestige, art)
    baseline = compute_jif3y(ds.documents, art, p, ds.journals)
    return PipelineResult(
        params=p,
        art=art,
        cmat=cmat,
        cocit=cocit,
        cosines=cosines,
        coef=coef,
        prestige=prestige,
        scores=scores,
        baseline=baseline,
    )


def run_pair(ds: Dataset, p: Params, strict: bool = True) -> tuple[PipelineResult, PipelineResult]:
    """One cosine-weighted run and one cosine-free run on shared matrices.

    The cosine-free fixed point is a full run of its own, not a reweighting
    of the cosine run.
    """
    with_cos = run_pipeline(ds, replace(p, use_cosine=True), strict=strict)
    p_off = replace(p, use_cosine=False)
    coef_off = compute_coefficients(with_cos.cmat, None, p_off)
    try:
        prestige_off = iterate_psjr2(coef_off, with_cos.art, p_off)
    except ConvergenceError as exc:
        if strict:
            raise
        prestige_off = exc.result
    without_cos = PipelineResult(
        params=p_off,
        art=with_cos.art,
        cmat=with_cos.cmat,
        cocit=with_cos.cocit,
        cosines=None,
        coef=coef_off,
        prestige=prestige_off,
        scores=compute_sjr2(prestige_off, with_cos.art),
        baseline=with_cos.baseline,
    )
    return with_cos, without_cos
