"""Command line front end: ``compdim <command> --seq spec.txt ...``.

Tabular output is CSV by default (``--format json-lines`` for one JSON
object per row).  Failures print a JSON error record on stderr and exit with
2 (validation), 3 (precision) or 4 (infeasible target).
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import coverlab, dimcalc, seqcore, setforge
from .errors import CompdimError, ValidationError


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def parse_theta(text):
    """'0.5', '0.25,0.5,1' or 'a:b:n' (n evenly spaced values)."""
    text = text.strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            values = np.linspace(float(a), float(b), int(n)).tolist()
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse theta grid {text!r}") from None
    if not values:
        raise ValidationError("empty theta grid")
    for v in values:
        if not 0.0 < v <= 1.0:
            raise ValidationError(f"theta {v} outside (0, 1]")
    return values


def parse_deltas(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse delta ladder {text!r}") from None
    if not values or any(b >= a for a, b in zip(values, values[1:])):
        raise ValidationError("delta ladder must be non-empty and strictly decreasing")
    if not all(0.0 < v < 1.0 for v in values):
        raise ValidationError("delta values must lie in (0, 1)")
    return values


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_rows(rows, fields, out, fmt, timestamp):
    if fmt == "json-lines":
        if timestamp:
            out.write(json.dumps({"generated": timestamp}) + "\n")
        for row in rows:
            out.write(json.dumps({k: row.get(k) for k in fields}) + "\n")
        return
    if timestamp:
        out.write(f"# generated {timestamp}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_fmt(row.get(k)) for k in fields])


def _build_parser():
    parser = _Parser(prog="compdim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, theta=False):
        p.add_argument("--seq", required=True, help="sequence spec file")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json-lines"), default="csv")
        p.add_argument("--no-timestamp", action="store_true",
                       help="omit the timestamp header and runtimes (byte-stable output)")
        if theta:
            p.add_argument("--theta", default="0.25,0.5,0.75,1", help="value, list or a:b:n")
        return p

    p = common(sub.add_parser("validate", help="hypothesis report"))
    p.add_argument("--window", default="1:64", help="index window lo:hi")
    common(sub.add_parser("dims", help="all dimension reports"), theta=True)
    p = common(sub.add_parser("construct", help="build C_a, D_a or E and verify gaps"))
    p.add_argument("--which", choices=("cantor", "countable", "mixed"), default="cantor")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--t", type=float)
    p.add_argument("--n-gaps", type=int, default=100)
    p.add_argument("--set-out", help="where to write the set dump")
    p = common(sub.add_parser("cover-estimate", help="empirical transition exponents"), theta=True)
    p.add_argument("--which", choices=("cantor", "countable", "mixed"), default="cantor")
    p.add_argument("--deltas", required=True, help="decreasing comma list")
    p.add_argument("--t", type=float)
    p.add_argument("--threads", type=int, default=1)
    p = common(sub.add_parser("sweep-theta", help="attainable ranges over a theta grid"), theta=True)
    p.add_argument("--threads", type=int, default=1)
    p = common(sub.add_parser("maintheo-check", help="plan E(t, theta) and estimate its dimension"))
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--deltas", default="1e-3,1e-4")
    return parser


def _cmd_validate(args, seq):
    try:
        lo, hi = (int(v) for v in args.window.split(":"))
    except ValueError:
        raise ValidationError(f"cannot parse window {args.window!r}") from None
    rec = seqcore.hypothesis_report(seq, (lo, hi)).to_record()
    return [rec], list(rec)


REPORT_FIELDS = ["kind", "theta", "value", "window_lo", "window_hi", "proxy_min",
                 "proxy_max", "caveat"]


def _cmd_dims(args, seq):
    box = dimcalc.box_dims(seq)
    reports = [(None, r) for r in box]
    reports.append((None, dimcalc.hausdorff_cantor(seq)))
    reports.extend((None, r) for r in dimcalc.assouad_pair(seq))
    for theta in parse_theta(args.theta):
        reports.append((theta, dimcalc.interm_cantor_upper(seq, theta)))
        reports.extend((theta, r) for r in dimcalc.interm_countable(seq, theta, box))
    rows = [dict(rep.to_record(), theta=theta) for theta, rep in reports]
    return rows, REPORT_FIELDS


def _plan(seq, theta, t):
    if t is None:
        raise ValidationError("--t is required for the mixed set")
    return setforge.plan_construction(seq, theta, t)


def _cmd_construct(args, seq):
    if args.which == "cantor":
        iset = setforge.build_cantor(seq, args.depth)
    elif args.which == "countable":
        iset = setforge.build_countable(seq, args.count)
    else:
        iset = setforge.build_mixed(_plan(seq, args.theta, args.t), args.depth, args.count)
    if args.set_out:
        with open(args.set_out, "w", encoding="utf-8") as fh:
            fh.write(setforge.dumps_set(iset))
    rep = setforge.verify_gaps(iset, seq, args.n_gaps)
    row = {"which": args.which, "components": len(iset), "total_length": iset.total_length,
           "residual_bound": iset.residual_bound, "gaps_checked": rep.n_checked,
           "gaps_ok": rep.ok, "max_gap_error": rep.max_error,
           "first_mismatch": json.dumps(rep.first_mismatch) if rep.first_mismatch else ""}
    return [row], list(row)


ESTIMATE_FIELDS = ["theta", "delta", "s_star", "cost_at_s_star", "components", "runtime_ms"]


def _recipe(which, seq, theta, t):
    if which == "cantor":
        return coverlab.cantor_recipe(seq)
    if which == "countable":
        return coverlab.countable_recipe(seq)
    return coverlab.mixed_recipe(_plan(seq, theta, t))


def _pool_map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _cmd_cover_estimate(args, seq):
    deltas = parse_deltas(args.deltas)
    timing = not args.no_timestamp

    def one(theta):
        return coverlab.estimate_dimension(_recipe(args.which, seq, theta, args.t),
                                           theta, deltas, timing=timing).rows

    rows = [row for chunk in _pool_map(one, parse_theta(args.theta), args.threads)
            for row in chunk]
    rows.sort(key=lambda r: (r["theta"], -r["delta"]))
    return rows, ESTIMATE_FIELDS


def _cmd_sweep(args, seq):
    box = dimcalc.box_dims(seq)
    haus = dimcalc.hausdorff_cantor(seq).value

    def one(theta):
        return dimcalc.range_for_theta(seq, theta, box, haus).to_record()

    rows = sorted(_pool_map(one, parse_theta(args.theta), args.threads), key=lambda r: r["theta"])
    return rows, ["theta", "lower_countable", "lower_cantor", "upper_countable", "upper_cantor"]


def _cmd_maintheo(args, seq):
    plan = _plan(seq, args.theta, args.t)
    est = coverlab.estimate_dimension(coverlab.mixed_recipe(plan), args.theta,
                                      parse_deltas(args.deltas), timing=not args.no_timestamp)
    summary = plan.summary()
    rows = [dict(summary, delta=row["delta"], s_star=row["s_star"],
                 error=row["s_star"] - args.t, components=row["components"])
            for row in est.rows]
    fields = list(summary) + ["delta", "s_star", "error", "components"]
    return rows, fields


COMMANDS = {
    "validate": _cmd_validate, "dims": _cmd_dims, "construct": _cmd_construct,
    "cover-estimate": _cmd_cover_estimate, "sweep-theta": _cmd_sweep,
    "maintheo-check": _cmd_maintheo,
}


def run(argv=None, stdout=None, stderr=None):
    """Execute one command; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = _build_parser().parse_args(argv)
        seq = seqcore.load_spec(args.seq)
        rows, fields = COMMANDS[args.command](args, seq)
        stamp = None if args.no_timestamp else datetime.datetime.now(
            datetime.timezone.utc).isoformat(timespec="seconds")
        buf = io.StringIO()
        write_rows(rows, fields, buf, args.format, stamp)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        else:
            stdout.write(buf.getvalue())
        return 0
    except CompdimError as exc:
        stderr.write(json.dumps(exc.record(), default=str) + "\n")
        return exc.exit_code
    except OSError as exc:
        rec = {"error": type(exc).__name__, "exit_code": 2, "message": str(exc)}
        stderr.write(json.dumps(rec) + "\n")
        return 2
    except Exception as exc:  # noqa: BLE001 - every failure becomes a record
        rec = {"error": type(exc).__name__, "exit_code": 1, "message": str(exc)}
        stderr.write(json.dumps(rec) + "\n")
        return 1


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
