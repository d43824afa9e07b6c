"""Command-line entry point: ``wdvv table|verify|dunkl|gamma-scan|cpoly``.

Every command prints one deterministic report (json, csv or md). Exit codes:
0 when every system passes, 1 on a verification failure, 2 on a usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from wdvvroots.dunkl import AGGREGATE_ONLY, FAILS, FIBERWISE, fiber_identity_check
from wdvvroots.errors import WdvvError
from wdvvroots.exactform import multiplicity_polynomial, parity_erratum_check, simply_laced_constant, table_audit
from wdvvroots.prepotential import sample_chamber_point
from wdvvroots.rootsystems import RootSystemSpec, build_root_system, orbit_multiplicities, table_systems
from wdvvroots.utils import Timer, format_fraction, jsonable, parse_fraction, save_report
from wdvvroots.wdvv import HALF, HYPOTHESES, gamma_scan, verify_wdvv

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
COMMAND_NAMES = ("table", "verify", "dunkl", "gamma-scan", "cpoly")
FORMATS = ("json", "csv", "md")
SCAN = "scan"
SCAN_SAMPLES = 5
WORKERS_ENV = "WDVV_WORKERS"

MD_COLUMNS = {
    "table": ("system", "c_oracle", "c_table", "verdict", "residual"),
    "verify": ("system", "hypothesis", "c", "max_commutator_residual", "max_eq1_residual", "passed", "note"),
    "dunkl": ("system", "fibers", "max_fiber_residual", "outcome", "aggregate_exact", "passed"),
    "gamma-scan": ("system", "c", "half", "full", "verdict", "passed"),
    "cpoly": ("system", "polynomial", "c_at_k", "passed", "note"),
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    systems: tuple[RootSystemSpec, ...]
    all_systems: bool = False
    samples: int = 10
    seed: int = 42
    margin: float = 0.2
    tolerance: float = 1e-9
    gamma_hypothesis: str = SCAN
    multiplicities: tuple[tuple[str, Fraction], ...] = ()
    format: str = "json"
    output: str | None = None

    @property
    def weights(self) -> dict[str, Fraction] | None:
        return dict(self.multiplicities) or None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        if args.system.strip().lower() == "all":
            systems, all_systems = tuple(table_systems()), True
        else:
            systems, all_systems = (RootSystemSpec.parse(args.system),), False
        if args.samples < 1:
            raise WdvvError(f"--samples must be at least 1, got {args.samples}")
        if args.margin <= 0:
            raise WdvvError(f"--margin must be positive, got {args.margin}")
        if args.tol <= 0:
            raise WdvvError(f"--tol must be positive, got {args.tol}")
        multiplicities = parse_multiplicities(args.k) if args.k else ()
        for spec in systems if multiplicities else ():
            orbit_multiplicities(build_root_system(spec), dict(multiplicities))
        return cls(
            command=args.command,
            systems=systems,
            all_systems=all_systems,
            samples=args.samples,
            seed=args.seed,
            margin=args.margin,
            tolerance=args.tol,
            gamma_hypothesis=args.gamma_hypothesis,
            multiplicities=multiplicities,
            format=args.format,
            output=args.output,
        )

    def echo(self) -> dict[str, Any]:
        return {
            "system": "all" if self.all_systems else self.systems[0].label,
            "samples": self.samples,
            "seed": self.seed,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "gamma_hypothesis": self.gamma_hypothesis,
            "k": {label: k for label, k in self.multiplicities},
            "format": self.format,
        }


def parse_multiplicities(text: str) -> tuple[tuple[str, Fraction], ...]:
    """``"short=2,long=3/2"`` -> ((long, 3/2), (short, 2))."""
    weights: dict[str, Fraction] = {}
    for item in text.split(","):
        label, sep, value = item.partition("=")
        if not sep or not label.strip():
            raise WdvvError(f"Expected orbit=p/q in --k, got {item!r}")
        try:
            weights[label.strip()] = parse_fraction(value)
        except ValueError as exc:
            raise WdvvError(str(exc)) from exc
    return tuple(sorted(weights.items()))


# ---- per-system records ----

def _table_record(spec: RootSystemSpec, config: RunConfig) -> dict[str, Any]:
    rs = build_root_system(spec)
    verdict, result = table_audit(rs)
    residual = result.proportionality_residual if result is not None else None
    record = {
        "system": spec.label,
        "c_oracle": verdict.c_oracle,
        "c_table": verdict.c_table,
        "verdict": verdict.verdict,
        "finding": verdict.finding,
        "residual": residual,
        "full_sum_zero": bool(np.all(parity_erratum_check(rs) == 0)),
        "passed": residual is None or residual == 0,
    }
    if rs.orbits == ("single",) and rs.rank >= 2:
        record["c_closed_form"] = simply_laced_constant(rs)
    if result is None:
        record["note"] = "rank 1: c undefined"
    return record


def _point_record(point: Any) -> dict[str, Any]:
    return {"a": list(point.a), "a_last": point.a_last, "margin": point.margin}


def _verify_record(spec: RootSystemSpec, config: RunConfig) -> dict[str, Any]:
    rs = build_root_system(spec)
    record: dict[str, Any] = {"system": spec.label}
    hypothesis = config.gamma_hypothesis
    c = None
    if rs.rank >= 2 and hypothesis == SCAN:
        scan = gamma_scan(rs, config.weights, config.seed, SCAN_SAMPLES, config.margin, config.tolerance)
        record["scan"] = dict(scan.residuals)
        c = scan.c
        if scan.verdict not in HYPOTHESES:
            record.update(hypothesis=None, c=c, passed=False, note=f"gamma scan verdict: {scan.verdict}")
            return record
        hypothesis = scan.verdict
    elif hypothesis == SCAN:
        hypothesis = HALF

    report = verify_wdvv(
        rs,
        hypothesis,
        config.weights,
        seed=config.seed,
        samples=config.samples,
        margin=config.margin,
        tolerance=config.tolerance,
        c=c,
    )
    record.update(
        hypothesis=hypothesis,
        c=report.c,
        gamma=report.gamma,
        max_commutator_residual=report.max_commutator_residual,
        max_eq1_residual=report.max_eq1_residual,
        tolerance=report.tolerance,
        passed=report.passed,
        note=report.note,
        points=[_point_record(p) for p in report.points],
        pairs=[
            {"point": index, "i": i + 1, "j": j + 1, "residual": value}
            for index, pairs in enumerate(report.pair_residuals)
            for (i, j), value in pairs.items()
        ],
    )
    return record


def _dunkl_record(spec: RootSystemSpec, config: RunConfig) -> dict[str, Any]:
    rs = build_root_system(spec)
    points = sample_chamber_point(rs, config.seed, config.margin, config.samples)
    reports = [fiber_identity_check(rs, p, config.weights, config.tolerance) for p in points]
    outcomes = {r.outcome for r in reports}
    outcome = next(o for o in (FAILS, AGGREGATE_ONLY, FIBERWISE) if o in outcomes)
    return {
        "system": spec.label,
        "fibers": len(reports[0].fiber_sizes),
        "pairs": sum(reports[0].fiber_sizes),
        "max_fiber_residual": max(r.max_fiber_residual for r in reports),
        "max_aggregate_residual": max(r.aggregate_residual for r in reports),
        "max_commutator_deviation": max(r.commutator_deviation for r in reports),
        "aggregate_exact": all(r.aggregate_exact for r in reports),
        "outcome": outcome,
        "passed": all(r.passed for r in reports),
        "points": [_point_record(p) for p in points],
    }


def _scan_record(spec: RootSystemSpec, config: RunConfig) -> dict[str, Any]:
    rs = build_root_system(spec)
    scan = gamma_scan(rs, config.weights, config.seed, config.samples, config.margin, config.tolerance)
    return {
        "system": spec.label,
        "c": scan.c,
        **scan.residuals,
        "passing": scan.passing,
        "rejected": scan.rejected,
        "verdict": scan.verdict,
        "passed": scan.verdict in HYPOTHESES,
    }


def _cpoly_record(spec: RootSystemSpec, config: RunConfig) -> dict[str, Any]:
    rs = build_root_system(spec)
    if rs.rank < 2:
        return {"system": spec.label, "note": "rank 1: c undefined", "passed": True}
    poly = multiplicity_polynomial(rs)
    terms = {f"{o}*{p}": coef for (o, p), coef in poly.coefficients.items()}
    record = {
        "system": spec.label,
        "coefficients": terms,
        "polynomial": " + ".join(f"{format_fraction(coef)} k_{key.replace('*', ' k_')}" for key, coef in terms.items()),
        "max_residual": max(poly.residuals.values()),
        "passed": all(r == 0 for r in poly.residuals.values()),
        "note": "",
    }
    if config.weights:
        record["c_at_k"] = poly.evaluate(config.weights)
    return record


def _run_system(item: tuple[Callable[[RootSystemSpec, RunConfig], dict], RootSystemSpec, RunConfig]) -> dict:
    build, spec, config = item
    with Timer(spec.label, logger, logging.INFO):
        record = build(spec, config)
    return record


def _workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value is None:
        return os.cpu_count() or 1
    try:
        workers = int(value)
    except ValueError as exc:
        raise WdvvError(f"{WORKERS_ENV} must be an integer, got {value!r}") from exc
    if workers < 1:
        raise WdvvError(f"{WORKERS_ENV} must be at least 1, got {workers}")
    return workers


def _collect(config: RunConfig, build: Callable[[RootSystemSpec, RunConfig], dict], specs=None) -> tuple[int, dict]:
    specs = list(config.systems if specs is None else specs)
    items = [(build, spec, config) for spec in specs]
    workers = _workers()
    # results keep input order whatever the pool size
    if len(items) >= 4 and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            records = list(executor.map(_run_system, items))
    else:
        records = [_run_system(item) for item in items]
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "config": config.echo(),
        "systems": records,
        "passed": all(r["passed"] for r in records),
    }
    return (0 if report["passed"] else 1), report


def run_table(config: RunConfig) -> tuple[int, dict]:
    """Exact c per system against the published values; mismatches are findings, not failures."""
    return _collect(config, _table_record)


def run_verify(config: RunConfig) -> tuple[int, dict]:
    return _collect(config, _verify_record)


def run_dunkl(config: RunConfig) -> tuple[int, dict]:
    return _collect(config, _dunkl_record)


def run_gamma_scan(config: RunConfig) -> tuple[int, dict]:
    # rank-1 systems have no scan; "all" skips them, an explicit A1 is a usage error
    specs = [s for s in config.systems if s.rank >= 2] if config.all_systems else config.systems
    return _collect(config, _scan_record, specs)


def run_cpoly(config: RunConfig) -> tuple[int, dict]:
    return _collect(config, _cpoly_record)


COMMANDS: dict[str, Callable[[RunConfig], tuple[int, dict]]] = {
    "table": run_table,
    "verify": run_verify,
    "dunkl": run_dunkl,
    "gamma-scan": run_gamma_scan,
    "cpoly": run_cpoly,
}


# ---- serialization ----

def _flat_fields(record: dict) -> dict[str, Any]:
    return {k: v for k, v in record.items() if not isinstance(v, (list, dict))}


def _cell(value: Any) -> str:
    value = jsonable(value)
    return "" if value is None else str(value).lower() if isinstance(value, bool) else str(value)


def serialize_report(report: dict, fmt: str) -> str:
    """Render a report as json, csv or md; output is byte-stable for a fixed config."""
    if fmt == "json":
        return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"
    records = report["systems"]
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        if report["command"] == "verify":
            writer.writerow(["system", "point", "i", "j", "residual"])
            for record in records:
                for row in record.get("pairs", []):
                    writer.writerow([record["system"]] + [_cell(row[k]) for k in ("point", "i", "j", "residual")])
        else:
            columns = sorted({key for record in records for key in _flat_fields(record)})
            writer.writerow(columns)
            for record in records:
                writer.writerow([_cell(record.get(key)) for key in columns])
        return buffer.getvalue()
    if fmt == "md":
        columns = MD_COLUMNS[report["command"]]
        lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
        for record in records:
            lines.append("| " + " | ".join(_cell(record.get(key)) for key in columns) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"Unknown format {fmt!r}; expected one of {FORMATS}")


# ---- entry point ----

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wdvv", description="Root-system WDVV verification and c-table audit")
    parser.add_argument("command", choices=COMMAND_NAMES)
    parser.add_argument("--system", default="all", help="label such as B2 or E8, or 'all'")
    parser.add_argument("--samples", type=int, default=10)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--margin", type=float, default=0.2)
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--gamma-hypothesis", choices=(*HYPOTHESES, SCAN), default=SCAN)
    parser.add_argument("--k", default=None, help="orbit multiplicities, e.g. short=2,long=3/2")
    parser.add_argument("--format", choices=FORMATS, default="json")
    parser.add_argument("--output", default=None, help="write the report here instead of stdout")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = RunConfig.from_args(args)
        code, report = COMMANDS[config.command](config)
    except WdvvError as exc:
        print(f"wdvv: error: {exc}", file=sys.stderr)
        return 2

    text = serialize_report(report, config.format)
    if config.output:
        save_report(text, config.output)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
