"""Seeded synthetic citation networks with block structure.

Blocks model scientific fields with their own citation density; documents
cite mostly within their block, with configurable cross-block leakage.
Every structural decision comes from integer draws of a counter-based
Philox stream, so a config reproduces byte-identical datasets on any
platform.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .ingest import DocumentArrays, write_citations, write_journals, write_scheme
from .model import ConfigError, Dataset, Journal, JournalTable, SubjectScheme, build_dataset

RNG_ALGORITHM = "philox4x64"  # numpy.random.Philox, counter-based and portable

_U32 = 1 << 32


@dataclass(frozen=True)
class BlockConfig:
    """One field: its specific-area code and citation habits."""

    area_code: str
    journal_count: int
    art_per_journal_range: tuple[int, int]  # window-total citable docs, inclusive
    refs_per_doc_mean: float
    within_block_prob: float

    def __post_init__(self) -> None:
        if self.journal_count < 1:
            raise ConfigError("journal_count must be >= 1")
        lo, hi = self.art_per_journal_range
        if not 1 <= lo <= hi:
            raise ConfigError(f"art_per_journal_range must satisfy 1 <= lo <= hi, got {lo, hi}")
        if self.refs_per_doc_mean <= 0:
            raise ConfigError("refs_per_doc_mean must be > 0")
        if not 0.0 <= self.within_block_prob <= 1.0:
            raise ConfigError("within_block_prob must be in [0, 1]")


@dataclass(frozen=True)
class SynthConfig:
    blocks: tuple[BlockConfig, ...]
    cross_block_mixing: float = 0.0
    dangling_fraction: float = 0.0
    year: int = 2008
    window: int = 3
    seed: int = 42
    allow_self_citations: bool = True
    docs_per_journal_range: tuple[int, int] | None = None  # default: art range / window

    def __post_init__(self) -> None:
        if not self.blocks:
            raise ConfigError("at least one block is required")
        if not 0.0 <= self.cross_block_mixing <= 1.0:
            raise ConfigError("cross_block_mixing must be in [0, 1]")
        if not 0.0 <= self.dangling_fraction <= 1.0:
            raise ConfigError("dangling_fraction must be in [0, 1]")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        for b in self.blocks:
            p_in = b.within_block_prob * (1.0 - self.cross_block_mixing)
            if not self.allow_self_citations and b.journal_count == 1 and (
                p_in > 0.0 or len(self.blocks) == 1
            ):
                raise ConfigError(
                    f"block {b.area_code!r}: single journal cannot cite within-block "
                    "without self-citations"
                )

    @classmethod
    def from_json(cls, path) -> "SynthConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path}: {exc}") from None
        try:
            raw["blocks"] = tuple(
                BlockConfig(
                    area_code=str(b["area_code"]),
                    journal_count=int(b["journal_count"]),
                    art_per_journal_range=tuple(b["art_per_journal_range"]),
                    refs_per_doc_mean=float(b["refs_per_doc_mean"]),
                    within_block_prob=float(b["within_block_prob"]),
                )
                for b in raw["blocks"]
            )
            if raw.get("docs_per_journal_range") is not None:
                raw["docs_per_journal_range"] = tuple(raw["docs_per_journal_range"])
            return cls(**raw)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"config file {path}: bad structure ({exc})") from None


def preset(name: str, seed: int | None = None) -> SynthConfig:
    """Named configurations used by the acceptance suite and docs.

    ``two-field``: two equal-size fields whose citation densities differ
    3:1, high within-field preference. ``uniform``: the symmetric control.
    """
    if name == "two-field":
        cfg = SynthConfig(
            blocks=(
                BlockConfig("1301", 250, (9, 27), 15.0, 0.9),
                BlockConfig("2001", 250, (9, 27), 5.0, 0.9),
            ),
            cross_block_mixing=0.05,
            dangling_fraction=0.02,
            seed=42 if seed is None else seed,
        )
    elif name == "uniform":
        cfg = SynthConfig(
            blocks=(
                BlockConfig("1301", 250, (9, 27), 8.0, 0.9),
                BlockConfig("2001", 250, (9, 27), 8.0, 0.9),
            ),
            cross_block_mixing=0.05,
            dangling_fraction=0.02,
            seed=42 if seed is None else seed,
        )
    else:
        raise ConfigError(f"unknown preset {name!r} (expected 'two-field' or 'uniform')")
    return cfg


def _subject_of(specific: str) -> str:
    return specific[:2] + "00" if len(specific) == 4 else specific


def _scheme_for(cfg: SynthConfig) -> SubjectScheme:
    parent = {"1000": "1000"}
    names = {"1000": "General"}
    for b in cfg.blocks:
        subject = _subject_of(b.area_code)
        parent[b.area_code] = subject
        names.setdefault(subject, f"Subject {subject}")
    return SubjectScheme(parent=parent, subject_names=names)


def _split_art(total: int, year: int, window: int) -> dict[int, int]:
    base, rem = divmod(total, window)
    years = range(year - window, year)
    return {y: base + (1 if y >= year - rem else 0) for y in years}


def _refs_range(mean: float) -> tuple[int, int]:
    m = max(1, round(mean))
    h = m // 2
    return max(1, m - h), m + h


def generate(cfg: SynthConfig) -> Dataset:
    """Deterministically expand a config into a full dataset.

    The document stream is ordered block by block, journal by journal; the
    Philox draw sequence is fixed, so equal configs give equal datasets.
    """
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    scheme = _scheme_for(cfg)

    sizes = np.array([b.journal_count for b in cfg.blocks], dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(sizes)])
    n_total = int(starts[-1])
    width = max(5, len(str(n_total)))

    journals: list[Journal] = []
    thr_dangle = int(cfg.dangling_fraction * _U32)
    doc_src_parts, ref_j_parts, ref_y_parts, refs_per_doc_parts = [], [], [], []

    for bi, block in enumerate(cfg.blocks):
        nb = block.journal_count
        block_lo = int(starts[bi])
        art_total = rng.integers(block.art_per_journal_range[0], block.art_per_journal_range[1] + 1, size=nb)
        dangle_u = rng.integers(0, _U32, size=nb, dtype=np.int64)
        if cfg.docs_per_journal_range is not None:
            dlo, dhi = cfg.docs_per_journal_range
        else:
            lo, hi = block.art_per_journal_range
            dlo = max(1, lo // cfg.window)
            dhi = max(dlo, hi // cfg.window)
        docs_count = rng.integers(dlo, dhi + 1, size=nb)
        docs_count[dangle_u < thr_dangle] = 0

        for k in range(nb):
            gi = block_lo + k
            journals.append(
                Journal(
                    id=f"J{gi:0{width}d}",
                    title=f"Synthetic Journal {gi}",
                    specific_areas=frozenset({block.area_code}),
                    citable_by_year=_split_art(int(art_total[k]), cfg.year, cfg.window),
                    ranked=True,
                )
            )

        total_docs = int(docs_count.sum())
        if total_docs == 0:
            continue
        doc_src = np.repeat(block_lo + np.arange(nb, dtype=np.int64), docs_count)
        rlo, rhi = _refs_range(block.refs_per_doc_mean)
        refs_per_doc = rng.integers(rlo, rhi + 1, size=total_docs)
        total_refs = int(refs_per_doc.sum())
        ref_src = np.repeat(doc_src, refs_per_doc)

        p_in = block.within_block_prob * (1.0 - cfg.cross_block_mixing)
        total_other = n_total - nb
        thr_in = int(p_in * _U32)
        u_within = rng.integers(0, _U32, size=total_refs, dtype=np.int64)
        within = (u_within < thr_in) if total_other > 0 else np.ones(total_refs, dtype=bool)

        if cfg.allow_self_citations:
            t_local = rng.integers(0, nb, size=total_refs)
        else:
            t_local = rng.integers(0, nb - 1, size=total_refs)
            t_local += t_local >= (ref_src - block_lo)
        target = block_lo + t_local

        if total_other > 0:
            g = rng.integers(0, total_other, size=total_refs)
            other_sizes = np.delete(sizes, bi)
            other_lo = np.delete(starts[:-1], bi)
            cum = np.cumsum(other_sizes)
            slot = np.searchsorted(cum, g, side="right")
            offset = g - np.concatenate([[0], cum])[slot]
            cross_target = other_lo[slot] + offset
            target = np.where(within, target, cross_target)

        ref_years = rng.integers(cfg.year - cfg.window, cfg.year, size=total_refs)

        doc_src_parts.append(doc_src)
        refs_per_doc_parts.append(refs_per_doc)
        ref_j_parts.append(target)
        ref_y_parts.append(ref_years)

    table = JournalTable(journals)
    if doc_src_parts:
        doc_src_all = np.concatenate(doc_src_parts)
        refs_per_doc_all = np.concatenate(refs_per_doc_parts)
        ref_j_all = np.concatenate(ref_j_parts)
        ref_y_all = np.concatenate(ref_y_parts)
    else:
        doc_src_all = np.zeros(0, dtype=np.int64)
        refs_per_doc_all = np.zeros(0, dtype=np.int64)
        ref_j_all = np.zeros(0, dtype=np.int64)
        ref_y_all = np.zeros(0, dtype=np.int64)

    docs = DocumentArrays(
        table=table,
        doc_src=doc_src_all,
        doc_year=np.full(len(doc_src_all), cfg.year, dtype=np.int32),
        ref_ptr=np.concatenate([[0], np.cumsum(refs_per_doc_all)]),
        ref_journal=ref_j_all,
        ref_year=ref_y_all,
        ref_n=np.ones(len(ref_j_all), dtype=np.int64),
    )
    ds = build_dataset(journals, docs, scheme)
    docs.table = ds.journals
    return ds


def write_dataset(ds: Dataset, outdir, cfg: SynthConfig | None = None) -> dict[str, str]:
    """Write journals CSV, citations JSONL, and scheme CSV; return the paths.

    A synth_manifest.json records the RNG algorithm and the config so a
    fixture can be regenerated elsewhere.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "journals": str(out / "journals.csv"),
        "citations": str(out / "citations.jsonl"),
        "scheme": str(out / "scheme.csv"),
    }
    with open(paths["journals"], "w", encoding="utf-8", newline="") as fh:
        write_journals(ds.journals, fh)
    with open(paths["citations"], "w", encoding="utf-8") as fh:
        write_citations(ds.documents, fh)
    with open(paths["scheme"], "w", encoding="utf-8", newline="") as fh:
        write_scheme(ds.scheme, fh)
    if cfg is not None:
        manifest = {"rng": RNG_ALGORITHM, "config": asdict(cfg)}
        with open(out / "synth_manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths["manifest"] = str(out / "synth_manifest.json")
    return paths
