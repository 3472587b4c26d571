"""Command-line workflow: estimate a conservative tail-exponent bound on the
first half of each segment, then run the three regime tests on the second half.

Subcommands:

* ``analyze``    end-to-end analysis of a numeric series, JSON/text report
* ``gen-tables`` build a critical-value table CSV (Monte Carlo + Markov bound)
* ``simulate``   write a synthetic truncated heavy-tailed series

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import gzip
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import (
    ArgumentError,
    ConfigurationError,
    DataError,
    TruncTailError,
)
from .hill import alpha_upper_bound, hill_grid
from .regime_tests import test_hard, test_hard_strong, test_soft
from .rng import child, seed_sequence
from .tail_model import (
    HeavyTailSpec,
    ResidualSpec,
    SpectralMeasure,
    TailModelConfig,
    TruncationRule,
    simulate_sample,
)
from .ztheta import CriticalValuePolicy, QuantileTable, build_table

DEFAULT_HILL_GRID = (0.3, 0.4, 0.5, 0.6, 0.7)
DEFAULT_THETA_RATIOS = (0.5, 0.6, 0.7, 0.8, 0.9, 0.95)
DEFAULT_GAMMA_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_EPSILON_GRID = (0.1, 0.2, 0.3, 0.4)
DEFAULT_PS = (0.05, 0.025, 0.01)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


@dataclass
class AnalysisConfig:
    """Everything `analyze` needs; defaults suit long heavy-tailed measurement series."""

    input_path: str
    column: Optional[str] = None
    segments: Optional[list] = None  # list of (start, stop) half-open index pairs
    hill_betas: Sequence[float] = DEFAULT_HILL_GRID
    hill_gammas: Sequence[float] = DEFAULT_HILL_GRID
    margin: float = 1.1
    theta_ratios: Sequence[float] = DEFAULT_THETA_RATIOS
    gamma_grid: Sequence[float] = DEFAULT_GAMMA_GRID
    epsilon_grid: Sequence[float] = DEFAULT_EPSILON_GRID
    level: float = 0.05
    table_path: Optional[str] = None
    table_n_terms: int = 10**4
    table_n_reps: int = 2 * 10**4
    seed: int = 0


def ingest(path, column: Optional[str] = None) -> np.ndarray:
    """Read finite reals in file order; non-finite or unparseable entries are
    rejected with their line number."""
    opener = gzip.open if str(path).endswith(".gz") else open
    try:
        fh = opener(path, "rt")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        if column is not None:
            return _ingest_csv(fh, path, column)
        return _ingest_plain(fh, path)


def _parse_value(raw, path, line_no: int) -> float:
    try:
        value = float(raw)
    except (ValueError, TypeError) as exc:
        raise DataError(f"{path}: line {line_no}: cannot parse {raw!r} as a number") from exc
    if not math.isfinite(value):
        raise DataError(f"{path}: line {line_no}: non-finite value {raw!r}")
    return value


def _ingest_plain(fh, path) -> np.ndarray:
    values = []
    for line_no, line in enumerate(fh, start=1):
        raw = line.strip()
        if not raw:
            continue
        values.append(_parse_value(raw, path, line_no))
    if not values:
        raise DataError(f"{path}: no data")
    return np.array(values)


def _ingest_csv(fh, path, column: str) -> np.ndarray:
    reader = csv.DictReader(fh)
    if reader.fieldnames is None or column not in reader.fieldnames:
        raise DataError(f"{path}: no column named {column!r}")
    values = []
    for line_no, row in enumerate(reader, start=2):  # header is line 1
        values.append(_parse_value(row[column], path, line_no))
    if not values:
        raise DataError(f"{path}: no data rows")
    return np.array(values)


def _check_segments(segments, n: int) -> list:
    prev_stop = 0
    for start, stop in segments:
        if not 0 <= start < stop <= n:
            raise DataError(f"segment {start}:{stop} out of bounds for {n} observations")
        if start < prev_stop:
            raise DataError("segments must be ascending and disjoint")
        prev_stop = stop
    return [(int(a), int(b)) for a, b in segments]


def _analyze_segment(seg: np.ndarray, config: AnalysisConfig, policy: CriticalValuePolicy) -> dict:
    mid = len(seg) // 2
    entry: dict = {"n": len(seg), "split": mid, "errors": []}
    try:
        grid = hill_grid(np.abs(seg[:mid]), config.hill_betas, config.hill_gammas)
        entry["estimation"] = {
            "hill_grid": [
                {"beta": e.beta, "gamma": e.gamma, "k": e.k, "h": e.h} for e in grid
            ],
        }
        bound = alpha_upper_bound(grid, config.margin)
        entry["estimation"]["alpha_bound"] = {
            "a_upper": bound.a_upper,
            "margin": bound.margin,
            "rule": bound.rule,
        }
        a = bound.a_upper
        second = seg[mid:]
        tests = entry["tests"] = {}
        soft = tests["soft"] = []
        for ratio in config.theta_ratios:
            out = test_soft(second, a, a / ratio, config.level, policy)
            soft.append({"theta": ratio, **out.to_dict()})
        hard = tests["hard"] = []
        for gamma in config.gamma_grid:
            out = test_hard(second, a, gamma, config.level)
            hard.append({"gamma": gamma, **out.to_dict()})
        strong = tests["hard_strong"] = []
        for eps in config.epsilon_grid:
            out = test_hard_strong(second, a, eps, config.level)
            strong.append({"epsilon": eps, **out.to_dict()})
    except TruncTailError as exc:
        entry["errors"].append({"type": type(exc).__name__, "message": str(exc)})
    return entry


def analyze(config: AnalysisConfig) -> dict:
    """Split-half analysis per segment; one failing segment does not abort the rest."""
    data = ingest(config.input_path, config.column)
    segments = _check_segments(config.segments or [(0, len(data))], len(data))
    for start, stop in segments:
        if stop - start < 100:
            raise DataError(f"segment {start}:{stop} has fewer than 100 observations")
    root = seed_sequence(config.seed)
    if config.table_path is not None:
        table = QuantileTable.from_csv(config.table_path)
        table_meta = {"source": f"file:{config.table_path}", "entries": len(table.entries)}
    else:
        table = build_table(
            config.theta_ratios,
            (config.level,) + tuple(p for p in DEFAULT_PS if p != config.level),
            n_terms=config.table_n_terms,
            n_reps=config.table_n_reps,
            seed=child(root, 0),
        )
        table_meta = {
            "source": "generated",
            "entries": len(table.entries),
            "n_terms": config.table_n_terms,
            "n_reps": config.table_n_reps,
        }
    policy = CriticalValuePolicy(
        mode="auto",
        n_terms=config.table_n_terms,
        n_reps=config.table_n_reps,
        seed=child(root, 0),
        table=table,
    )
    report = {
        "version": __version__,
        "input": str(config.input_path),
        "seed": config.seed,
        "level": config.level,
        "parameters": {
            "hill_betas": list(config.hill_betas),
            "hill_gammas": list(config.hill_gammas),
            "margin": config.margin,
            "theta_ratios": list(config.theta_ratios),
            "gamma_grid": list(config.gamma_grid),
            "epsilon_grid": list(config.epsilon_grid),
        },
        "table": table_meta,
        "segments": [],
    }
    for start, stop in segments:
        entry = {"range": [start, stop]}
        entry.update(_analyze_segment(data[start:stop], config, policy))
        report["segments"].append(entry)
    return report


def gen_tables(
    thetas: Sequence[float],
    ps: Sequence[float],
    n_terms: int,
    n_reps: int,
    seed: int,
    out_path,
    r: float = 0.05,
    k_grid: int = 10**7,
) -> QuantileTable:
    """Build and write a critical-value table; byte-identical for a fixed seed."""
    table = build_table(thetas, ps, n_terms=n_terms, n_reps=n_reps, seed=seed, r=r, k_grid=k_grid)
    table.to_csv(out_path)
    return table


def _report_csv_rows(report: dict):
    for seg in report["segments"]:
        label = "{}:{}".format(*seg["range"])
        for kind, key in (("soft", "theta"), ("hard", "gamma"), ("hard_strong", "epsilon")):
            for row in seg.get("tests", {}).get(kind, []):
                yield [
                    label,
                    kind,
                    row[key],
                    repr(row["statistic"]),
                    repr(row["critical_value"]),
                    "" if row["p_value"] is None else repr(row["p_value"]),
                    row["reject"],
                ]


def write_report_csv(report: dict, path) -> None:
    """Flat per-parameter companion table for the JSON report."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["segment", "test", "parameter", "statistic", "critical_value", "p_value", "reject"]
        )
        writer.writerows(_report_csv_rows(report))


def _format_text(report: dict) -> str:
    lines = [f"trunctail {report['version']} analysis of {report['input']}"]
    for seg in report["segments"]:
        lines.append("segment {}:{} (n={})".format(*seg["range"], seg["n"]))
        if seg["errors"]:
            for err in seg["errors"]:
                lines.append(f"  error [{err['type']}]: {err['message']}")
        if "estimation" in seg and "alpha_bound" in seg["estimation"]:
            bound = seg["estimation"]["alpha_bound"]
            lines.append(
                f"  alpha upper bound A = {bound['a_upper']:.4g}"
                f" (margin {bound['margin']}, rule {bound['rule']})"
            )
        for kind, key in (("soft", "theta"), ("hard", "gamma"), ("hard_strong", "epsilon")):
            for row in seg.get("tests", {}).get(kind, []):
                pv = "-" if row["p_value"] is None else f"{row['p_value']:.3f}"
                verdict = "reject" if row["reject"] else "accept"
                lines.append(
                    f"  {kind:<11} {key}={row[key]:<5} stat={row['statistic']:.4g}"
                    f" cv={row['critical_value']:.4g} p={pv} -> {verdict}"
                )
    return "\n".join(lines) + "\n"


def _parse_segments(text: str) -> list:
    segments = []
    for part in text.split(","):
        try:
            start, stop = part.split(":")
            segments.append((int(start), int(stop)))
        except ValueError:
            raise ArgumentError(f"bad segment {part!r}; expected START:STOP") from None
    return segments


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ArgumentError(f"bad float list {text!r}") from None


def _parse_residual(text: str) -> ResidualSpec:
    if text == "zero":
        return ResidualSpec.zero()
    kind, _, param = text.partition(":")
    try:
        if kind == "exp":
            return ResidualSpec.exponential(float(param))
        if kind == "uniform":
            return ResidualSpec.uniform_bounded(float(param))
    except (ValueError, ConfigurationError):
        pass
    raise ArgumentError(f"bad residual {text!r}; expected zero, exp:RATE or uniform:UPPER")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse's exit-code-2 to our usage code
        raise ArgumentError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="trunctail", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run the split-half estimation + tests workflow")
    pa.add_argument("input", help="newline-delimited floats, or CSV with --column; .gz ok")
    pa.add_argument("--column", help="CSV column to read")
    pa.add_argument("--segments", help="comma-separated START:STOP index ranges (half-open)")
    pa.add_argument("--seed", type=int, default=0)
    tables = pa.add_mutually_exclusive_group()
    tables.add_argument("--tables", help="critical-value table CSV (from gen-tables)")
    tables.add_argument("--gen-tables", action="store_true",
                        help="generate the table now (also the default when --tables is absent)")
    pa.add_argument("--table-terms", type=int, default=10**4,
                    help="series length when generating tables on the fly")
    pa.add_argument("--table-reps", type=int, default=2 * 10**4,
                    help="replication count when generating tables on the fly")
    pa.add_argument("--level", type=float, default=0.05)
    pa.add_argument("--margin", type=float, default=1.1)
    pa.add_argument("--hill-betas", type=_parse_floats, default=DEFAULT_HILL_GRID)
    pa.add_argument("--hill-gammas", type=_parse_floats, default=DEFAULT_HILL_GRID)
    pa.add_argument("--theta-ratios", type=_parse_floats, default=DEFAULT_THETA_RATIOS)
    pa.add_argument("--gamma-grid", type=_parse_floats, default=DEFAULT_GAMMA_GRID)
    pa.add_argument("--epsilon-grid", type=_parse_floats, default=DEFAULT_EPSILON_GRID)
    pa.add_argument("--report", help="write the JSON report here (plus a .csv companion)")
    pa.add_argument("--format", choices=("json", "text"), default="json")

    pt = sub.add_parser("gen-tables", help="precompute a critical-value table CSV")
    pt.add_argument("--out", required=True)
    pt.add_argument("--thetas", type=_parse_floats, default=DEFAULT_THETA_RATIOS)
    pt.add_argument("--ps", type=_parse_floats, default=DEFAULT_PS)
    pt.add_argument("--terms", type=int, default=10**5)
    pt.add_argument("--reps", type=int, default=10**5)
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--r", type=float, default=0.05)
    pt.add_argument("--k-grid", type=int, default=10**7)

    ps_ = sub.add_parser("simulate", help="write a synthetic truncated heavy-tailed series")
    ps_.add_argument("--out", required=True)
    ps_.add_argument("--n", type=int, required=True)
    ps_.add_argument("--alpha", type=float, required=True)
    ps_.add_argument("--scale", type=float, default=1.0)
    ps_.add_argument("--trunc-c", type=float, default=1.0)
    ps_.add_argument("--trunc-rho", type=float, default=1.0)
    ps_.add_argument("--residual", type=_parse_residual, default=ResidualSpec.zero())
    ps_.add_argument("--one-sided", action="store_true",
                     help="single spectral atom at +1 instead of symmetric atoms")
    ps_.add_argument("--seed", type=int, default=0)
    return parser


def _run_analyze(args) -> int:
    config = AnalysisConfig(
        input_path=args.input,
        column=args.column,
        segments=_parse_segments(args.segments) if args.segments else None,
        hill_betas=args.hill_betas,
        hill_gammas=args.hill_gammas,
        margin=args.margin,
        theta_ratios=args.theta_ratios,
        gamma_grid=args.gamma_grid,
        epsilon_grid=args.epsilon_grid,
        level=args.level,
        table_path=args.tables,
        table_n_terms=args.table_terms,
        table_n_reps=args.table_reps,
        seed=args.seed,
    )
    report = analyze(config)
    payload = json.dumps(report, indent=2, sort_keys=True)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(payload + "\n")
        csv_path = args.report[:-5] + ".csv" if args.report.endswith(".json") else args.report + ".csv"
        write_report_csv(report, csv_path)
    if args.format == "text":
        sys.stdout.write(_format_text(report))
    elif not args.report:
        sys.stdout.write(payload + "\n")
    return EXIT_OK


def _run_gen_tables(args) -> int:
    gen_tables(
        args.thetas, args.ps, args.terms, args.reps, args.seed, args.out,
        r=args.r, k_grid=args.k_grid,
    )
    return EXIT_OK


def _run_simulate(args) -> int:
    spectral = SpectralMeasure.one_sided_1d() if args.one_sided else SpectralMeasure.symmetric_1d()
    config = TailModelConfig(
        heavy=HeavyTailSpec(alpha=args.alpha, scale=args.scale, spectral=spectral),
        truncation=TruncationRule(coefficient=args.trunc_c, exponent=args.trunc_rho),
        residual=args.residual,
    )
    sample = simulate_sample(config, args.n, args.seed)[:, 0]
    with open(args.out, "w") as fh:
        for v in sample:
            fh.write(repr(float(v)) + "\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "analyze":
            return _run_analyze(args)
        if args.command == "gen-tables":
            return _run_gen_tables(args)
        return _run_simulate(args)
    except (ArgumentError, ConfigurationError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TruncTailError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
