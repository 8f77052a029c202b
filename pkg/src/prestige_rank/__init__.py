"""Cosine-weighted journal prestige ranking over citation networks.

The package computes a capped, dangling-aware eigenvector-centrality fixed
point over a journal citation graph, weights citations by the thematic
closeness of citing and cited journal (cosine of their cocitation
profiles), and normalizes the result by each journal's share of citable
documents. Baseline citation-rate indicators, a statistical analysis
suite, and a seeded synthetic-network generator round out the toolkit.
"""

__version__ = "0.1.0"

from .analyze import (
    AreaRateTable,
    CorrelationUndefined,
    FlowMatrix,
    FlowReport,
    LogFit,
    area_rates,
    correlate_indicators,
    flow_tables,
    log_fit,
    msd_unity,
    pearson,
    rank_series,
    spearman,
)
from .baselines import BaselineTable, compute_jif3y
from .cocite import CocitationMatrix, CosineMap, build_cocitation, cosine, cosines_for_edges
from .ingest import (
    ArtVector,
    CitationMatrix,
    CitingDocument,
    DocumentArrays,
    IngestIssues,
    ParseError,
    build_art_vector,
    build_citation_matrix,
    compile_documents,
    load_dataset,
    parse_citations,
    parse_journals,
    parse_scheme,
    write_citations,
    write_journals,
    write_scheme,
)
from .model import (
    ConfigError,
    DataError,
    Dataset,
    Journal,
    JournalId,
    JournalTable,
    Params,
    SubjectScheme,
    ValidationReport,
    build_dataset,
    validate_dataset,
)
from .pipeline import PipelineResult, run_pair, run_pipeline
from .rank import (
    CoefMatrix,
    ConvergenceError,
    PrestigeVector,
    ScoreVector,
    compute_coefficients,
    compute_sjr2,
    iterate_psjr2,
    psjr2d,
)
from .synth import BlockConfig, SynthConfig, generate, preset, write_dataset

__all__ = [name for name in dir() if not name.startswith("_")]
