"""Command-line interface.

Subcommands:

* ``validate``   check the input files and report problems
* ``compute``    run the prestige fixed point, write scores CSV + manifest
* ``analyze``    correlation / rate / deviation / flow / fit tables
* ``synth``      generate a seeded synthetic dataset
* ``dump-cocit`` debug dump of cocitation counts and edge cosines

Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence.
All numeric output is decimal text with a configurable number of
significant digits (default 6).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .analyze import (
    SPECIFIC,
    SUBJECT,
    CorrelationUndefined,
    area_art,
    area_rates,
    correlate_indicators,
    flow_tables,
    log_fit,
    msd_unity,
    rank_series,
)
from .cocite import build_cocitation, cosines_for_edges
from .ingest import build_citation_matrix, load_dataset
from .model import DataError, Dataset, Params, ValidationReport, validate_dataset
from .pipeline import PipelineResult, run_pair, run_pipeline
from .rank import ConvergenceError
from .synth import SynthConfig, generate, preset, write_dataset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NO_CONVERGENCE = 3


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1, not argparse's default 2 (2 means data error here)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x, precision: int) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.{precision}g}"


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _params_from(args) -> Params:
    return Params(
        year=args.year,
        window=args.window,
        d=args.d,
        e=args.e,
        cap_share=args.cap_share,
        cap_per_citation=args.cap_per_citation,
        use_cosine=not getattr(args, "no_cosine", False),
        tol=args.tol,
        max_iters=args.max_iters,
    )


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--journals", required=True, help="journals CSV")
    p.add_argument("--citations", required=True, help="citations JSON Lines")
    p.add_argument("--scheme", required=True, help="subject scheme CSV")


def _add_param_args(p: argparse.ArgumentParser, with_cosine_flag: bool) -> None:
    p.add_argument("--year", type=int, required=True, help="computation year")
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--d", type=float, default=0.9)
    p.add_argument("--e", type=float, default=0.0999)
    p.add_argument("--cap-share", type=float, default=0.5, dest="cap_share")
    p.add_argument("--cap-per-citation", type=float, default=0.1, dest="cap_per_citation")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=200, dest="max_iters")
    if with_cosine_flag:
        p.add_argument("--no-cosine", action="store_true", dest="no_cosine")


def build_parser() -> _Parser:
    parser = _Parser(prog="prestige-rank", description=__doc__)
    parser.add_argument("--version", action="version", version=f"prestige-rank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="validate the input files")
    _add_data_args(p)
    _add_param_args(p, with_cosine_flag=False)
    p.add_argument("--out", help="also write the report to this file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compute", help="compute prestige scores")
    _add_data_args(p)
    _add_param_args(p, with_cosine_flag=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--precision", type=int, default=6, help="significant digits in output")
    p.add_argument("--deterministic", action="store_true", help="omit timestamp/timing from the manifest")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("analyze", help="statistical characterization tables")
    _add_data_args(p)
    _add_param_args(p, with_cosine_flag=False)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--precision", type=int, default=6)
    p.add_argument("--exclude-general", action="store_true", dest="exclude_general",
                   help="drop the General area from the rate tables")
    p.add_argument("--extra-scores", dest="extra_scores",
                   help="TSV of extra indicator columns, keyed by journal_id (or by area for precomputed rates)")
    p.add_argument("--figures", action="store_true", help="also render the rank-distribution figure")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=["two-field", "uniform"])
    group.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dump-cocit", help="dump cocitation counts and edge cosines")
    _add_data_args(p)
    _add_param_args(p, with_cosine_flag=False)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--precision", type=int, default=6)
    p.set_defaults(func=cmd_dump_cocit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"prestige-rank: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConvergenceError as exc:
        print(f"prestige-rank: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except OSError as exc:
        print(f"prestige-rank: {exc}", file=sys.stderr)
        return EXIT_DATA


def _load(args) -> tuple[Dataset, "object"]:
    ds, issues = load_dataset(args.journals, args.citations, args.scheme)
    return ds, issues


def _merged_report(ds: Dataset, p: Params, issues) -> ValidationReport:
    report = validate_dataset(ds, p)
    unknown = list(issues.unknown_source_ids) + list(issues.unknown_ref_ids)
    report.n_unknown_ids += len(unknown)
    report.unknown_ids.extend(unknown[: report.max_examples - len(report.unknown_ids)])
    return report


def _report_lines(report: ValidationReport, p: Params) -> list[str]:
    lines = [
        f"journals: {report.n_journals}",
        f"documents: {report.n_documents}",
        f"references: {report.n_refs}",
        f"unknown journal ids: {report.n_unknown_ids}",
        f"documents outside year {p.year}: {report.n_docs_outside_year}",
        f"references outside window [{p.year - p.window}, {p.year - 1}]: {report.n_refs_outside_window}",
        f"journals with zero citable documents in window: {report.n_zero_art_journals}",
        f"dangling ranked journals: {report.dangling_ranked_count}",
    ]
    for uid in report.unknown_ids[:20]:
        lines.append(f"  unknown id: {uid}")
    for jid in report.zero_art_journals[:20]:
        lines.append(f"  zero-art journal: {jid}")
    lines.append("fatal: " + ("; ".join(report.fatal) if report.fatal else "none"))
    return lines


def cmd_validate(args) -> int:
    p = _params_from(args)
    ds, issues = _load(args)
    report = _merged_report(ds, p, issues)
    text = "\n".join(_report_lines(report, p)) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_DATA if report.fatal else EXIT_OK


def _write_scores_csv(path, ds: Dataset, result: PipelineResult, precision: int) -> None:
    p = result.params
    table = ds.journals
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# prestige-rank {__version__}\n")
        fh.write(
            "# params: "
            f"year={p.year} window={p.window} d={_fmt(p.d, 12)} e={_fmt(p.e, 12)} "
            f"cap_share={_fmt(p.cap_share, 12)} cap_per_citation={_fmt(p.cap_per_citation, 12)} "
            f"use_cosine={'true' if p.use_cosine else 'false'} tol={_fmt(p.tol, 12)} "
            f"max_iters={p.max_iters}\n"
        )
        v = result.prestige
        fh.write(
            f"# iterations={v.iterations} converged={'true' if v.converged else 'false'} "
            f"residual={_fmt(v.residual, 6)} dangling_fallback={'true' if v.dangling_fallback else 'false'}\n"
        )
        fh.write(f"# precision={precision}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["journal_id", "psjr2", "sjr2", "art", "citations_3y", "jif3y"])
        unscored_rows = []
        for i, j in enumerate(table):
            row = [
                j.id,
                _fmt(float(v.values[i]), precision),
                _fmt(float(result.scores.values[i]), precision),
                int(result.art.counts[i]),
                int(result.baseline.citations_3y[i]),
                _fmt(float(result.baseline.jif3y[i]), precision),
            ]
            if result.art.counts[i] > 0:
                w.writerow(row)
            else:
                unscored_rows.append(row)
        if unscored_rows:
            fh.write("# journals without citable documents in window (no sjr2/jif3y):\n")
            for row in unscored_rows:
                w.writerow(row)


def _write_manifest(path, args, result: PipelineResult, report: ValidationReport, elapsed: float) -> None:
    p = result.params
    manifest = {
        "tool": "prestige-rank",
        "version": __version__,
        "command": "compute",
        "params": {
            "year": p.year,
            "window": p.window,
            "d": p.d,
            "e": p.e,
            "cap_share": p.cap_share,
            "cap_per_citation": p.cap_per_citation,
            "use_cosine": p.use_cosine,
            "tol": p.tol,
            "max_iters": p.max_iters,
        },
        "inputs": {
            "journals": {"path": str(args.journals), "sha256": _sha256(args.journals)},
            "citations": {"path": str(args.citations), "sha256": _sha256(args.citations)},
            "scheme": {"path": str(args.scheme), "sha256": _sha256(args.scheme)},
        },
        "dataset": {
            "journals": report.n_journals,
            "documents": report.n_documents,
            "references": report.n_refs,
            "dangling_ranked": report.dangling_ranked_count,
        },
        "result": {
            "converged": result.prestige.converged,
            "iterations": result.prestige.iterations,
            "residual": result.prestige.residual,
            "dangling_fallback": result.prestige.dangling_fallback,
        },
    }
    if not args.deterministic:
        manifest["timing_seconds"] = elapsed
        manifest["timestamp"] = datetime.now(timezone.utc).isoformat()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_compute(args) -> int:
    p = _params_from(args)
    t0 = time.perf_counter()
    ds, issues = _load(args)
    report = _merged_report(ds, p, issues)
    if report.fatal:
        for line in _report_lines(report, p):
            print(line, file=sys.stderr)
        return EXIT_DATA
    result = run_pipeline(ds, p, strict=False)
    elapsed = time.perf_counter() - t0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_scores_csv(out / "scores.csv", ds, result, args.precision)
    _write_manifest(out / "manifest.json", args, result, report, elapsed)
    if not result.prestige.converged:
        print(
            f"prestige-rank: no convergence after {result.prestige.iterations} iterations "
            f"(residual {result.prestige.residual:.3e}); partial scores written",
            file=sys.stderr,
        )
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze


def _read_extra_scores(path) -> tuple[str, list[str], dict[str, list[float]]]:
    """Read a TSV keyed by journal_id (extra indicators) or by area (rates)."""
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = next(reader, None)
        if not header or header[0] not in ("journal_id", "area"):
            raise DataError("--extra-scores file must start with a 'journal_id' or 'area' column")
        kind, names = header[0], header[1:]
        if not names:
            raise DataError("--extra-scores file has no indicator columns")
        rows: dict[str, list[float]] = {}
        for row in reader:
            if not row or row[0].startswith("#"):
                continue
            vals = []
            for cell in row[1:]:
                vals.append(float(cell) if cell.strip() else math.nan)
            rows[row[0]] = vals
    return kind, names, rows


def _tsv_writer(fh):
    return csv.writer(fh, delimiter="\t", lineterminator="\n")


def _params_comment(p: Params) -> str:
    return (
        f"# prestige-rank {__version__} params: "
        f"year={p.year} window={p.window} d={_fmt(p.d, 12)} e={_fmt(p.e, 12)} "
        f"cap_share={_fmt(p.cap_share, 12)} cap_per_citation={_fmt(p.cap_per_citation, 12)} "
        f"use_cosine={'true' if p.use_cosine else 'false'} tol={_fmt(p.tol, 12)} "
        f"max_iters={p.max_iters}\n"
    )


def _open_table(path, p: Params):
    fh = open(path, "w", encoding="utf-8", newline="")
    fh.write(_params_comment(p))
    return fh


def cmd_analyze(args) -> int:
    p = _params_from(args)
    ds, issues = _load(args)
    report = _merged_report(ds, p, issues)
    if report.fatal:
        for line in _report_lines(report, p):
            print(line, file=sys.stderr)
        return EXIT_DATA
    with_cos, without_cos = run_pair(ds, p, strict=True)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prec = args.precision
    table = ds.journals
    scheme = ds.scheme
    art = with_cos.art

    indicators: dict[str, np.ndarray] = {
        "sjr2": with_cos.scores.values,
        "jif3y": with_cos.baseline.jif3y,
    }
    extra_rates: dict[str, dict[str, float]] = {}
    if args.extra_scores:
        kind, names, rows = _read_extra_scores(args.extra_scores)
        if kind == "journal_id":
            for col, name in enumerate(names):
                vals = np.full(len(table), np.nan)
                for jid, cells in rows.items():
                    if jid in table:
                        vals[table.index(jid)] = cells[col]
                indicators[name] = vals
        else:
            for col, name in enumerate(names):
                extra_rates[name] = {area: cells[col] for area, cells in rows.items()}

    # indicator correlations, overall and per area
    names = list(indicators)
    with _open_table(out / "correlations.tsv", p) as fh:
        w = _tsv_writer(fh)
        w.writerow(["level", "pair", "n", "pearson_mean", "pearson_sd", "spearman_mean", "spearman_sd"])
        for a in range(len(names)):
            for b in range(a + 1, len(names)):
                pair = (names[a], names[b])
                try:
                    summary = correlate_indicators(indicators, table, pair)
                except CorrelationUndefined as exc:
                    print(f"prestige-rank: skipping correlation {pair}: {exc}", file=sys.stderr)
                    continue
                ok = int((~np.isnan(indicators[pair[0]]) & ~np.isnan(indicators[pair[1]])).sum())
                w.writerow(
                    ["global", "/".join(pair), ok,
                     _fmt(summary.pearson_overall, prec), "", _fmt(summary.spearman_overall, prec), ""]
                )
                for level in (SUBJECT, SPECIFIC):
                    pm, ps, sm, ss, n_areas = summary.area_mean_sd(level)
                    w.writerow(
                        [level, "/".join(pair), n_areas,
                         _fmt(pm, prec), _fmt(ps, prec), _fmt(sm, prec), _fmt(ss, prec)]
                    )

    # per-area indicator rates and their deviation from the equalized ideal
    general = scheme.general
    deviation_rows: list[tuple[str, str, int, float]] = []
    for level, fname in ((SUBJECT, "rates_subject.tsv"), (SPECIFIC, "rates_specific.tsv")):
        tables = {name: area_rates(vals, art, table, scheme, level) for name, vals in indicators.items()}
        areas = sorted(set().union(*(t.rates.keys() for t in tables.values())))
        art_shares = area_art(table, art, level)
        total_art = sum(art_shares.values())
        with _open_table(out / fname, p) as fh:
            w = _tsv_writer(fh)
            w.writerow(["area", "name", "art_share"] + names)
            for area in areas:
                if args.exclude_general and (area == general or scheme.parent.get(area) == general):
                    continue
                name = scheme.name_of(area if level == SUBJECT else scheme.parent.get(area, area))
                share = art_shares.get(area, 0.0) / total_art if total_art else 0.0
                w.writerow(
                    [area, name, _fmt(share, prec)]
                    + [_fmt(tables[n_].rates.get(area, math.nan), prec) for n_ in names]
                )
        for name in names:
            t = tables[name]
            drop = {a for a in t.rates if a == general or scheme.parent.get(a) == general}
            vals = [r for a, r in sorted(t.rates.items()) if a not in drop]
            if vals:
                deviation_rows.append((level, name, len(vals), msd_unity(vals)))
    for name, rates in extra_rates.items():
        vals = [v for a, v in sorted(rates.items())
                if a != general and a != "General" and not math.isnan(v)]
        if vals:
            deviation_rows.append(("extra_rates", name, len(vals), msd_unity(vals)))
    with _open_table(out / "deviations.tsv", p) as fh:
        w = _tsv_writer(fh)
        w.writerow(["level", "indicator", "n_areas", "msd_unity"])
        for level, name, n_areas, dev in deviation_rows:
            w.writerow([level, name, n_areas, _fmt(dev, prec)])

    # prestige flows between and within areas
    flows = flow_tables(
        with_cos.coef,
        with_cos.prestige,
        table,
        scheme,
        art,
        p.d,
        cmat=with_cos.cmat,
        coef_nocos=without_cos.coef,
        v_nocos=without_cos.prestige,
    )
    with _open_table(out / "flows_within.tsv", p) as fh:
        w = _tsv_writer(fh)
        w.writerow(["direction", "level", "kind", "area", "name", "total",
                    "self_pct", "same_specific_pct", "same_subject_pct"])
        for direction, by_level in flows.within.items():
            for level, by_kind in by_level.items():
                for kind, rows in by_kind.items():
                    for area, row in rows.items():
                        name = scheme.name_of(area if level == SUBJECT else scheme.parent.get(area, area))
                        w.writerow([direction, level, kind, area, name, _fmt(row.total, prec),
                                    _fmt(row.self_pct, prec), _fmt(row.same_specific_pct, prec),
                                    _fmt(row.same_subject_pct, prec)])
    with _open_table(out / "flows_summary.tsv", p) as fh:
        w = _tsv_writer(fh)
        w.writerow(["direction", "kind", "scope", "avg_by_subject_area", "avg_by_specific_area"])
        for direction in ("received", "sent"):
            for kind in flows.kinds:
                subj = flows.averages[direction][SUBJECT][kind]
                spec = flows.averages[direction][SPECIFIC][kind]
                for si, scope in enumerate(("self", "same_specific", "same_subject")):
                    w.writerow([direction, kind, scope, _fmt(subj[si], prec), _fmt(spec[si], prec)])
    with _open_table(out / "flow_matrix.tsv", p) as fh:
        w = _tsv_writer(fh)
        w.writerow(["source\\target"] + list(flows.flow.areas))
        for k, area in enumerate(flows.flow.areas):
            w.writerow([area] + [_fmt(x, prec) for x in flows.flow.matrix[k]])
    # per-area node statistics accompanying the flow matrix
    with _open_table(out / "area_nodes.tsv", p) as fh:
        w = _tsv_writer(fh)
        w.writerow(["area", "name", "art", "citations_received", "prestige"])
        art_by = area_art(table, art, SUBJECT)
        cit_by: dict[str, float] = {}
        prestige_by: dict[str, float] = {}
        for i, j in enumerate(table):
            if not j.areas:
                continue
            f = 1.0 / len(j.areas)
            for a in j.areas:
                cit_by[a] = cit_by.get(a, 0.0) + float(with_cos.baseline.citations_3y[i]) * f
                prestige_by[a] = prestige_by.get(a, 0.0) + float(with_cos.prestige.values[i]) * f
        for area in flows.flow.areas:
            w.writerow([area, scheme.name_of(area), _fmt(art_by.get(area, 0.0), prec),
                        _fmt(cit_by.get(area, 0.0), prec), _fmt(prestige_by.get(area, 0.0), prec)])

    # value-vs-rank series and their logarithmic fits
    series = {}
    fits = {}
    with _open_table(out / "fit.tsv", p) as fh:
        w = _tsv_writer(fh)
        w.writerow(["indicator", "n", "slope", "intercept", "r_squared"])
        for name, vals in indicators.items():
            defined = np.asarray(vals, dtype=np.float64)
            defined = defined[~np.isnan(defined)]
            if defined.size < 2 or float(defined.max()) <= 0:
                continue
            ranks, normalized = rank_series(defined)
            fit = log_fit(normalized)
            series[name] = (ranks, normalized)
            fits[name] = fit
            w.writerow([name, ranks.size, _fmt(fit.slope, prec), _fmt(fit.intercept, prec), _fmt(fit.r_squared, prec)])
    with _open_table(out / "rank_series.tsv", p) as fh:
        w = _tsv_writer(fh)
        w.writerow(["indicator", "rank", "normalized_value"])
        for name, (ranks, normalized) in series.items():
            for r, val in zip(ranks, normalized):
                w.writerow([name, int(r), _fmt(float(val), prec)])

    if args.figures and series:
        from .figures import render_rank_plot

        render_rank_plot(series, fits, out / "figures" / "rank_plot.png")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.preset:
        cfg = preset(args.preset, seed=args.seed)
    else:
        cfg = SynthConfig.from_json(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
    ds = generate(cfg)
    write_dataset(ds, args.out, cfg)
    return EXIT_OK


def cmd_dump_cocit(args) -> int:
    p = _params_from(args)
    ds, _issues = _load(args)
    cmat = build_citation_matrix(ds.documents, ds.journals, p)
    cocit = build_cocitation(ds.documents, p, ds.journals)
    cosines = cosines_for_edges(cocit, cmat)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ids = ds.journals.ids()
    prec = args.precision
    with _open_table(out / "cocitation.tsv", p) as fh:
        w = _tsv_writer(fh)
        w.writerow(["i", "j", "cocit"])
        coo = cocit.counts.tocoo()
        for r, c, val in zip(coo.row, coo.col, coo.data):
            if r < c:  # symmetric; emit each unordered pair once
                w.writerow([ids[r], ids[c], int(val)])
    with _open_table(out / "cosines.tsv", p) as fh:
        w = _tsv_writer(fh)
        w.writerow(["j", "i", "cosine"])
        for (j, i), val in cosines.items():
            w.writerow([ids[j], ids[i], _fmt(val, prec)])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
