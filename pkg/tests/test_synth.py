from __future__ import annotations

import json

import numpy as np
import pytest

from prestige_rank import (
    BlockConfig,
    ConfigError,
    Params,
    SynthConfig,
    generate,
    preset,
    validate_dataset,
    write_dataset,
)


def small_cfg(**kw):
    base = dict(
        blocks=(
            BlockConfig("1301", 10, (6, 12), 6.0, 0.9),
            BlockConfig("2001", 20, (6, 12), 3.0, 0.9),
        ),
        cross_block_mixing=0.1,
        dangling_fraction=0.1,
        seed=42,
    )
    base.update(kw)
    return SynthConfig(**base)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            small_cfg(cross_block_mixing=1.5)
        with pytest.raises(ConfigError):
            small_cfg(dangling_fraction=-0.1)
        with pytest.raises(ConfigError):
            BlockConfig("1301", 0, (1, 2), 3.0, 0.5)
        with pytest.raises(ConfigError):
            BlockConfig("1301", 3, (0, 2), 3.0, 0.5)
        with pytest.raises(ConfigError):
            BlockConfig("1301", 3, (1, 2), 3.0, 1.5)

    def test_single_journal_block_without_self_citations(self):
        with pytest.raises(ConfigError, match="self-citation"):
            SynthConfig(
                blocks=(BlockConfig("1301", 1, (3, 6), 2.0, 1.0),),
                allow_self_citations=False,
            )

    def test_json_round_trip(self, tmp_path):
        cfg = small_cfg(seed=77)
        path = tmp_path / "cfg.json"
        from dataclasses import asdict

        path.write_text(json.dumps(asdict(cfg)), encoding="utf-8")
        assert SynthConfig.from_json(path) == cfg


class TestGenerate:
    def test_deterministic(self, tmp_path):
        cfg = small_cfg()
        ds1 = generate(cfg)
        ds2 = generate(cfg)
        assert list(ds1.journals) == list(ds2.journals)
        d1, d2 = ds1.documents, ds2.documents
        assert np.array_equal(d1.doc_src, d2.doc_src)
        assert np.array_equal(d1.ref_journal, d2.ref_journal)
        assert np.array_equal(d1.ref_year, d2.ref_year)
        p1 = write_dataset(ds1, tmp_path / "a", cfg)
        p2 = write_dataset(ds2, tmp_path / "b", cfg)
        for key in ("journals", "citations", "scheme"):
            assert open(p1[key], "rb").read() == open(p2[key], "rb").read()

    def test_seed_changes_output(self):
        a = generate(small_cfg(seed=1)).documents
        b = generate(small_cfg(seed=2)).documents
        assert not (
            len(a.ref_journal) == len(b.ref_journal)
            and np.array_equal(a.ref_journal, b.ref_journal)
        )

    def test_block_counts_and_areas(self):
        ds = generate(small_cfg())
        assert len(ds.journals) == 30
        first = [j for j in ds.journals if j.specific_areas == frozenset({"1301"})]
        second = [j for j in ds.journals if j.specific_areas == frozenset({"2001"})]
        assert len(first) == 10 and len(second) == 20
        assert ds.journals.get("J00000").areas == frozenset({"1300"})

    def test_art_within_range(self):
        cfg = small_cfg()
        ds = generate(cfg)
        p = Params(year=cfg.year, window=cfg.window)
        for j in ds.journals:
            assert 6 <= j.art(p.year, p.window) <= 12

    def test_within_block_fraction(self):
        cfg = SynthConfig(
            blocks=(
                BlockConfig("1301", 500, (6, 12), 8.0, 0.9),
                BlockConfig("2001", 500, (6, 12), 8.0, 0.9),
            ),
            cross_block_mixing=0.0,
            dangling_fraction=0.0,
            seed=5,
            docs_per_journal_range=(10, 10),
        )
        ds = generate(cfg)
        docs = ds.documents
        assert docs.n_documents == 10_000
        src_block = docs.doc_src[docs.ref_doc()] < 500
        dst_block = docs.ref_journal < 500
        fraction = float((src_block == dst_block).mean())
        assert fraction == pytest.approx(0.9, abs=0.02)

    def test_dangling_fraction_produces_dangling(self):
        cfg = small_cfg(dangling_fraction=0.3)
        ds = generate(cfg)
        p = Params(year=cfg.year)
        report = validate_dataset(ds, p)
        assert report.dangling_ranked_count > 0

    def test_validates_clean(self):
        for seed in (1, 9, 123):
            cfg = small_cfg(seed=seed)
            ds = generate(cfg)
            report = validate_dataset(ds, Params(year=cfg.year, window=cfg.window))
            assert report.fatal == []
            assert report.n_unknown_ids == 0
            assert report.n_refs_outside_window == 0
            assert report.n_docs_outside_year == 0

    def test_years_inside_window(self):
        ds = generate(small_cfg())
        docs = ds.documents
        assert docs.ref_year.min() >= 2005
        assert docs.ref_year.max() <= 2007
        assert (docs.doc_year == 2008).all()

    def test_single_block_all_within(self):
        cfg = SynthConfig(blocks=(BlockConfig("1301", 5, (3, 6), 3.0, 0.2),), seed=3)
        ds = generate(cfg)
        assert ds.documents.ref_journal.max() < 5


class TestPresets:
    def test_two_field_density_ratio(self):
        cfg = preset("two-field")
        assert len(cfg.blocks) == 2
        assert cfg.blocks[0].refs_per_doc_mean / cfg.blocks[1].refs_per_doc_mean == 3.0
        ds = generate(cfg)
        assert len(ds.journals) == 500

    def test_uniform_is_symmetric(self):
        cfg = preset("uniform")
        assert cfg.blocks[0].refs_per_doc_mean == cfg.blocks[1].refs_per_doc_mean

    def test_seed_override(self):
        assert preset("two-field", seed=9).seed == 9

    def test_unknown(self):
        with pytest.raises(ConfigError):
            preset("nope")

    def test_manifest_records_rng(self, tmp_path):
        cfg = preset("uniform", seed=3)
        ds = generate(cfg)
        paths = write_dataset(ds, tmp_path, cfg)
        manifest = json.loads(open(paths["manifest"], encoding="utf-8").read())
        assert manifest["rng"] == "philox4x64"
        assert manifest["config"]["seed"] == 3
