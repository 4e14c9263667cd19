"""``psisolve``: estimate, verify and reproduce ψ-estimators from the shell.

Exit status is 0 when a computation finished (a ``violated`` verdict is a
finished computation), 1 for bad input and 2 for solver anomalies or a
reproduction that disagrees with its published verdict. Errors are written
to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional

from .core import DiscreteDistribution, ValidationError, PsiSolveError, validate_weighted_sample
from .estimators import estimate, expectation_sign_change, guarantees_point
from .psifamilies import CATALOG, make_family
from .signchange import SolverOptions
from .verify import (
    DEFAULT_GRID,
    DEFAULT_SEED,
    REPRODUCTIONS,
    check_levels_for_Tn,
    check_ratio_monotone,
    check_Tn_lambda,
    random_corpus,
    reproduce,
)

EXIT_OK, EXIT_INPUT, EXIT_ANOMALY = 0, 1, 2


class ParseError(ValidationError):
    def __init__(self, message, line=None, token=None):
        super().__init__(message)
        self.line = line
        self.token = token


class EmptyInput(ValidationError):
    pass


# ---------------------------------------------------------------------------
# input


def _read_text(path) -> tuple:
    if path in (None, "-"):
        return sys.stdin.read(), None
    p = Path(path)
    try:
        return p.read_text(), p
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _to_float(text: str) -> Optional[float]:
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def parse_numbers(text: str, csv_col: Optional[int] = None, is_csv: bool = False) -> list:
    """Whitespace-separated floats, or column ``csv_col`` of CSV text."""
    if is_csv or csv_col is not None:
        col = csv_col or 0
        values = []
        for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if col >= len(row):
                raise ParseError(f"line {lineno}: no column {col}", line=lineno, token=col + 1)
            cell = row[col].strip()
            v = _to_float(cell)
            if v is None:
                if not values and lineno == 1:
                    continue  # header
                raise ParseError(f"line {lineno}, column {col}: {cell!r} is not a number",
                                 line=lineno, token=col + 1)
            values.append(v)
    else:
        values = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            for k, tok in enumerate(line.split(), start=1):
                v = _to_float(tok)
                if v is None:
                    raise ParseError(f"line {lineno}, token {k}: {tok!r} is not a number",
                                     line=lineno, token=k)
                values.append(v)
    if not values:
        raise EmptyInput("no numbers found in input")
    return values


def ingest_data(path, csv_col: Optional[int] = None) -> list:
    text, p = _read_text(path)
    is_csv = p is not None and p.suffix.lower() == ".csv"
    return parse_numbers(text, csv_col, is_csv)


def _parse_list(text: str, what: str) -> list:
    out = []
    for k, tok in enumerate(text.replace(",", " ").split(), start=1):
        v = _to_float(tok)
        if v is None:
            raise ParseError(f"{what}: token {k} ({tok!r}) is not a number", token=k)
        out.append(v)
    if not out:
        raise EmptyInput(f"{what} is empty")
    return out


def _read_distribution(args) -> DiscreteDistribution:
    if args.atoms is not None or args.probs is not None:
        if args.atoms is None or args.probs is None:
            raise ValidationError("--atoms and --probs must be given together")
        return DiscreteDistribution(_parse_list(args.atoms, "--atoms"), _parse_list(args.probs, "--probs"))
    if args.data is None:
        raise ValidationError("give --atoms/--probs or a two-column --data file")
    text, _ = _read_text(args.data)
    atoms, probs = [], []
    rows = csv.reader(io.StringIO(text)) if "," in text else (line.split() for line in text.splitlines())
    for lineno, row in enumerate(rows, start=1):
        row = [c.strip() for c in row if c.strip()]
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(f"line {lineno}: expected 'atom probability'", line=lineno)
        a, q = _to_float(row[0]), _to_float(row[1])
        if a is None or q is None:
            if lineno == 1 and not atoms:
                continue
            raise ParseError(f"line {lineno}: not a number", line=lineno,
                             token=1 if a is None else 2)
        atoms.append(a)
        probs.append(q)
    if not atoms:
        raise EmptyInput("no atoms found in input")
    return DiscreteDistribution(atoms, probs)


# ---------------------------------------------------------------------------
# output


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, compact separators, shortest round-trip floats."""
    return json.dumps(_finite(obj), sort_keys=True, separators=(",", ":"), allow_nan=False,
                      ensure_ascii=False)


def _table(rows) -> str:
    rows = [(str(k), "" if v is None else (v if isinstance(v, str) else dumps(v))) for k, v in rows]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def _emit(obj, fmt: str, out) -> None:
    if fmt == "json":
        print(dumps(obj), file=out)
    else:
        print(_table(obj.items()), file=out)


def _error(exc: Exception, err) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("line", "token"):
        if getattr(exc, attr, None) is not None:
            payload[attr] = getattr(exc, attr)
    print(dumps(payload), file=err)
    return EXIT_INPUT


# ---------------------------------------------------------------------------
# commands


def _options(args) -> SolverOptions:
    return SolverOptions(tolerance=args.tol)


def cmd_estimate(args, out) -> int:
    family = make_family(args.psi)
    points = ingest_data(args.data, args.csv_col)
    weights = ingest_data(args.weights, args.csv_col) if args.weights else None
    sample = validate_weighted_sample(points, weights)
    res = estimate(family, sample, _options(args))
    record = res.to_dict()
    _emit(record, args.format, out)
    return EXIT_ANOMALY if res.anomaly else EXIT_OK


def cmd_expectation(args, out) -> int:
    family = make_family(args.psi)
    dist = _read_distribution(args)
    outcome = expectation_sign_change(family, dist, _options(args))
    _emit(outcome.to_dict(), args.format, out)
    return EXIT_ANOMALY if not outcome.is_point and guarantees_point(family) else EXIT_OK


def cmd_verify(args, out) -> int:
    family = make_family(args.psi)
    if args.check == "tn-lambda":
        if args.data:
            points = ingest_data(args.data, args.csv_col)
            weights = ingest_data(args.weights, args.csv_col) if args.weights else None
            corpus = [validate_weighted_sample(points, weights)]
        else:
            corpus = random_corpus(family, args.count, n_max=args.n_max, seed=args.seed,
                                   unit_weights=args.unit_weights)
        report = check_Tn_lambda(family, corpus, _options(args), workers=args.workers)
        report.grid["seed"] = args.seed
    else:
        if args.x is None or args.y is None:
            raise ValidationError(f"--check {args.check} needs --x and --y")
        if args.check == "ratio":
            report = check_ratio_monotone(family, args.x, args.y, args.grid, strict=not args.non_strict)
        else:
            report = check_levels_for_Tn(family, args.x, args.y, args.n, args.grid)
    _emit(report.to_dict(), args.format, out)
    return EXIT_OK


def cmd_reproduce(args, out) -> int:
    ids = list(REPRODUCTIONS) if args.id == "all" else [args.id]
    w = _parse_list(args.w, "--w") if args.w else None
    ok = True
    rows = []
    for name in ids:
        report = reproduce(name, w=w if name == "ex-T2-fail" else None, seed=args.seed)
        d = report.details
        ok &= bool(d["match"])
        record = {"id": name, "expected": d["expected"], "computed": d["computed"],
                  "match": d["match"], "seed": args.seed, "report": report.to_dict()}
        if args.format == "json":
            print(dumps(record), file=out)
        else:
            rows.append((name, d["expected"], d["computed"], d["match"]))
    if args.format == "table":
        for name, exp, got, match in rows:
            print(_table([("id", name), ("expected", exp), ("computed", got),
                          ("match", "yes" if match else "NO")]), file=out)
            print(file=out)
    return EXIT_OK if ok else EXIT_ANOMALY


def cmd_list_families(args, out) -> int:
    if args.format == "json":
        for spec, doc in CATALOG:
            print(dumps({"spec": spec, "psi": doc}), file=out)
    else:
        print(_table(CATALOG), file=out)
    return EXIT_OK


def _default_seed() -> int:
    env = os.environ.get("PSISOLVE_SEED")
    if env:
        try:
            return int(env, 0)
        except ValueError:
            pass
    return DEFAULT_SEED


def _int(text: str) -> int:
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10, help="bracket width target")
    common.add_argument("--seed", type=_int, default=None,
                        help=f"random seed (default $PSISOLVE_SEED or {DEFAULT_SEED:#x})")
    common.add_argument("--grid", type=int, default=DEFAULT_GRID, help="grid points for checks")
    common.add_argument("--format", choices=("json", "table"), default="json")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--psi", required=True, help="family spec, e.g. quantile:alpha=0.3")
    data.add_argument("--data", help="file of numbers, or - for stdin")
    data.add_argument("--weights", help="file of weights (default all ones)")
    data.add_argument("--csv-col", type=int, default=None, help="0-based CSV column")

    parser = argparse.ArgumentParser(prog="psisolve", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", parents=[common, data], help="weighted ψ-estimator of a sample")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("expectation", parents=[common, data],
                       help="sign change of E ψ(ξ, t) for a discrete ξ")
    p.add_argument("--atoms", help="comma or space separated atoms")
    p.add_argument("--probs", help="matching probabilities")
    p.set_defaults(func=cmd_expectation)

    p = sub.add_parser("verify", parents=[common, data], help="grid checks of T-properties")
    p.add_argument("--check", choices=("tn-lambda", "ratio", "levels"), default="tn-lambda")
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)
    p.add_argument("--n", type=int, default=2, help="sample size for --check levels")
    p.add_argument("--count", type=int, default=100, help="random samples for tn-lambda")
    p.add_argument("--n-max", type=int, default=7)
    p.add_argument("--unit-weights", action="store_true")
    p.add_argument("--non-strict", action="store_true", help="ratio check without strictness")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reproduce", parents=[common], help="rebuild a published counterexample")
    p.add_argument("id", choices=list(REPRODUCTIONS) + ["all"])
    p.add_argument("--w", help="weights for ex-T2-fail, e.g. 1,2,3")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("list-families", parents=[common], help="show the family catalogue")
    p.set_defaults(func=cmd_list_families)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    try:
        if not args.tol > 0:
            raise ValidationError("--tol must be positive")
        if args.grid < 16:
            raise ValidationError("--grid must be at least 16")
        return args.func(args, out)
    except (ValidationError, ValueError, KeyError) as exc:
        return _error(exc, err)
    except PsiSolveError as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc)}), file=err)
        return EXIT_ANOMALY


if __name__ == "__main__":
    sys.exit(main())
