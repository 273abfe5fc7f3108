"""Command-line front end.

Exit codes: 0 ok, 1 property failure, 2 config error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
import time

import numpy as np

from . import __version__, estimators
from .config import COMMANDS, ConfigError, Setting, parse_text, read_file, resolve
from .errors import OrbitPressureError
from .io import atomic_write, fmt12
from .measures import brin_katok_profile, sample_measure
from .orbit_metrics import FAMILIES, MetricKind, orbit_distance
from .systems import Circle, Symbolic

SCHEMA_VERSION = 1
COLUMNS = ("schema_version", "command", "system", "potential", "measure", "kind", "q", "n", "eps",
           "M", "seed", "method", "value", "covered_mass", "centers", "walltime_ms", "status")

EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

# flag name -> config key
_FLAGS = {
    "system": "system", "k": "k", "transitions": "transitions", "alpha": "alpha",
    "length": "length", "potential": "potential", "measure": "measure", "variant": "variant",
    "n": "n", "eps": "eps", "delta": "eps", "q": "q", "qmax": "qmax", "metric": "metric",
    "M": "M", "seed": "seed", "method": "method", "format": "format", "output": "output",
    "x": "x", "y": "y", "centers": "centers", "suite": "suite", "n_max": "n_max", "pairs": "pairs",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbit-pressure",
        description="Orbit metrics and pressure estimators for shifts and circle maps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    helps = {
        "dist": "orbit distances between two points",
        "entropy": "covering estimates with the zero potential",
        "pressure": "covering estimates with a potential",
        "brin-katok": "local entropy from ball masses",
        "table": "convergence table with stabilization summary",
        "verify": "run the property suites",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", metavar="FILE", help="plain-text spec; flags override it")
        for flag in ("system", "k", "transitions", "alpha", "length", "potential", "measure",
                     "variant", "n", "eps", "q", "qmax", "metric", "seed", "method", "format",
                     "output"):
            p.add_argument(f"--{flag.replace('_', '-')}", dest=flag, metavar=flag.upper())
        p.add_argument("--M", "-M", dest="M", metavar="M", help="sample size")
        p.add_argument("--record-time", action="store_true",
                       help="fill walltime_ms (output is then no longer reproducible)")
        if name == "dist":
            p.add_argument("--x", dest="x")
            p.add_argument("--y", dest="y")
            p.add_argument("--x-equals-y", action="store_true", help="use y = x")
        if name == "brin-katok":
            p.add_argument("--delta", dest="delta", metavar="DELTA", help="alias of --eps")
            p.add_argument("--centers", dest="centers")
        if name == "verify":
            p.add_argument("--suite", dest="suite")
            p.add_argument("--n-max", dest="n_max")
            p.add_argument("--pairs", dest="pairs")
            p.add_argument("--inject-fault", action="store_true",
                           help="flip the strict match inequality to check suite sensitivity")
    return parser


def _raw_settings(args) -> dict:
    raw = read_file(args.config) if getattr(args, "config", None) else {}
    if "command" in raw and raw["command"].value.strip().lower() != args.command:
        s = raw["command"]
        raise ConfigError(f"config is for {s.value!r}, not {args.command!r}", s.line, s.column)
    raw["command"] = Setting(args.command)
    for attr, key in _FLAGS.items():
        val = getattr(args, attr, None)
        if val is not None:
            raw[key] = Setting(str(val))
    if getattr(args, "x_equals_y", False) and "y" in raw:
        raise ConfigError("--x-equals-y conflicts with an explicit y")
    return raw


# ---------------------------------------------------------------------------
# rows

def _row(spec, **kw) -> dict:
    row = {c: "" for c in COLUMNS}
    row.update(schema_version=SCHEMA_VERSION, command=spec.command, system=spec.system.name,
               status="ok")
    row.update(kw)
    return row


def _sort_key(row: dict):
    kind = row["kind"]
    fam = FAMILIES.index(kind) if kind in FAMILIES else len(FAMILIES)
    eps = row["eps"] if row["eps"] != "" else -1.0
    return (fam, row["q"] or 0, eps, row["n"] or 0)


def _cell_text(v) -> str:
    if isinstance(v, float):
        return "" if v != v else fmt12(v)
    return str(v)


def render_csv(spec, rows, summary) -> str:
    buf = io.StringIO()
    buf.write(f"# orbit-pressure schema_version={SCHEMA_VERSION}\n")
    for line in spec.echo:
        buf.write(f"# {line}\n")
    buf.write(",".join(COLUMNS) + "\n")
    for r in rows:
        buf.write(",".join(_csv_escape(_cell_text(r[c])) for c in COLUMNS) + "\n")
    for s in summary:
        buf.write("# summary " + " ".join(f"{k}={_cell_text(v)}" for k, v in s.items()) + "\n")
    return buf.getvalue()


def _csv_escape(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _json_value(v):
    if isinstance(v, float):
        return None if v != v else float(fmt12(v))
    return v


def render_json(spec, rows, summary) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "spec": dict(line.split("=", 1) for line in spec.echo),
        "columns": list(COLUMNS),
        "rows": [{c: _json_value(r[c]) for c in COLUMNS} for r in rows],
        "summary": [{k: _json_value(v) for k, v in s.items()} for s in summary],
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def emit(spec, rows, summary) -> None:
    rows = sorted(rows, key=_sort_key)
    text = (render_json if spec.format == "json" else render_csv)(spec, rows, summary)
    if spec.output:
        atomic_write(spec.output, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def _parse_point(system, text: str):
    return Symbolic.parse(text) if system.symbolic else Circle(float(text))


def cmd_dist(spec, timed: bool, x_equals_y: bool = False):
    system = spec.system
    if spec.x is not None:
        x = _parse_point(system, spec.x)
        y = _parse_point(system, spec.y) if spec.y is not None else x
    else:
        from .config import _default_measure, parse_measure

        mu = sample_measure(parse_measure(Setting(_default_measure(system)), system), system, 2, spec.seed)
        x, y = mu.point(0), mu.point(1)
    if x_equals_y:
        y = x
    rows = []
    for kind in spec.kinds:
        for n in spec.n_list:
            t0 = time.perf_counter()
            try:
                v = orbit_distance(system, x, y, n, kind)
                ms = (time.perf_counter() - t0) * 1000.0 if timed else float("nan")
                rows.append(_row(spec, kind=kind.family, q=kind.q, n=n, seed=_opt(spec.seed),
                                 value=v, walltime_ms=ms))
            except OrbitPressureError as exc:
                rows.append(_row(spec, kind=kind.family, q=kind.q, n=n, seed=_opt(spec.seed),
                                 status=f"error:{exc.code}"))
    return rows, []


def _opt(v):
    return "" if v is None else v


def _estimate_rows(spec, cells):
    rows = []
    for c in cells:
        base = dict(kind=c.kind.family, q=c.kind.q, n=c.n, eps=c.eps, potential=spec.potential.name,
                    measure=spec.measure_name, M=_opt(spec.M), seed=_opt(spec.seed), method=spec.method)
        if c.ok:
            e = c.estimate
            rows.append(_row(spec, **base, value=e.value, covered_mass=e.covered_mass,
                             centers=e.centers, walltime_ms=c.walltime_ms))
        else:
            rows.append(_row(spec, **base, status=f"error:{c.error}"))
    return rows


def _table_spec(spec):
    kinds = spec.kinds
    return estimators.TableSpec(
        variant=spec.variant, system=spec.system, potential=spec.potential,
        n_list=spec.n_list, eps_list=spec.eps_list, kinds=kinds, measure=spec.measure,
        M=spec.M or 0, seed=spec.seed, method=spec.method,
    )


def cmd_estimates(spec, timed: bool):
    res = estimators.convergence_table(_table_spec(spec), timed=timed)
    return _estimate_rows(spec, res.cells), _inf_q_summary(spec, res)


def _inf_q_summary(spec, res):
    out = []
    if len(spec.q_list) < 2:
        return out
    groups = {}
    for c in res.cells:
        if c.ok:
            groups.setdefault((c.kind.family, c.eps, c.n), []).append((c.estimate.value, c.kind.q))
    for (fam, eps, n), vals in sorted(groups.items(), key=lambda kv: (FAMILIES.index(kv[0][0]), kv[0][1], kv[0][2])):
        v, q = min(vals)
        out.append({"type": "inf_over_q", "kind": fam, "eps": eps, "n": n,
                    "q_grid": f"1..{max(spec.q_list)}" if spec.qmax else ",".join(str(x) for x in spec.q_list),
                    "value": v, "argmin_q": q, "spread": max(x for x, _ in vals) - v})
    return out


def cmd_table(spec, timed: bool):
    res = estimators.convergence_table(_table_spec(spec), timed=timed)
    rows = _estimate_rows(spec, res.cells)
    summary = []
    for s in sorted(res.summaries, key=lambda s: (FAMILIES.index(s.kind.family), s.kind.q, s.eps)):
        summary.append({
            "type": "stabilized", "kind": s.kind.family, "q": s.kind.q, "eps": s.eps,
            "n_grid": ",".join(str(n) for n in s.n_used),
            "stabilized": s.stabilized, "drift_corrected": s.drift_corrected,
            "oracle": float("nan") if s.oracle is None else s.oracle, "gap": s.gap,
        })
    for s in sorted(res.extrapolation, key=lambda s: (FAMILIES.index(s.kind.family), s.kind.q)):
        summary.append({
            "type": "extrapolation", "kind": s.kind.family, "q": s.kind.q,
            "eps_grid": ",".join(repr(e) for e in sorted(set(spec.eps_list))),
            "n_grid": ",".join(str(n) for n in sorted(set(spec.n_list))),
            "value": s.drift_corrected,
            "oracle": float("nan") if s.oracle is None else s.oracle, "gap": s.gap,
        })
    summary += _inf_q_summary(spec, res)
    return rows, summary


def cmd_brin_katok(spec, timed: bool):
    mu = sample_measure(spec.measure, spec.system, spec.M, spec.seed)
    rows, summary = [], []
    for kind in spec.kinds:
        for eps in spec.eps_list:
            for n in spec.n_list:
                base = dict(kind=kind.family, q=kind.q, n=n, eps=eps, measure=spec.measure_name,
                            M=spec.M, seed=spec.seed, method="median", centers=spec.centers)
                t0 = time.perf_counter()
                try:
                    prof = brin_katok_profile(mu, spec.system, n, eps, kind, spec.centers, spec.seed)
                except OrbitPressureError as exc:
                    rows.append(_row(spec, **base, status=f"error:{exc.code}"))
                    continue
                ms = (time.perf_counter() - t0) * 1000.0 if timed else float("nan")
                if any(m <= 0 for m in prof.masses):
                    rows.append(_row(spec, **base, status="error:EMPTY_BALL"))
                    continue
                rows.append(_row(spec, **base, value=prof.median, walltime_ms=ms))
                summary.append({"type": "brin_katok", "kind": kind.family, "q": kind.q, "eps": eps,
                                "n": n, "median": prof.median, "iqr": prof.iqr,
                                "centers": len(prof.values)})
    return rows, summary


def cmd_verify(spec, inject_fault: bool) -> int:
    from . import verify

    try:
        results = verify.run(spec.suite, n_max=spec.n_max, pairs=spec.pairs, seed=spec.seed or 0,
                             fault=inject_fault)
    except KeyError as exc:
        raise ConfigError(f"unknown suite {exc.args[0]}; choose from {', '.join(verify.SUITES)}") from None
    lines = [f"# {line}" for line in spec.echo]
    if inject_fault:
        lines.append("# fault injected: strict match inequality flipped")
    lines += [r.line() for r in results]
    failed = [r.name for r in results if not r.passed]
    lines.append("FAILED: " + ", ".join(failed) if failed else "ALL PASSED")
    text = "\n".join(lines) + "\n"
    if spec.output:
        atomic_write(spec.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_PROPERTY if failed else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_CONFIG
    try:
        spec = resolve(_raw_settings(args))
    except ConfigError as exc:
        print(f"orbit-pressure: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    timed = bool(getattr(args, "record_time", False))
    try:
        if spec.command == "verify":
            return cmd_verify(spec, args.inject_fault)
        if spec.command == "dist" and args.x_equals_y:
            spec.echo.insert(-1, "y=x")
        handler = {
            "dist": lambda sp, t: cmd_dist(sp, t, args.x_equals_y),
            "entropy": cmd_estimates,
            "pressure": cmd_estimates,
            "table": cmd_table,
            "brin-katok": cmd_brin_katok,
        }[spec.command]
        rows, summary = handler(spec, timed)
        emit(spec, rows, summary)
    except ConfigError as exc:
        print(f"orbit-pressure: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OrbitPressureError, ValueError, OSError) as exc:
        print(f"orbit-pressure: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if any(r["status"] != "ok" for r in rows):
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
