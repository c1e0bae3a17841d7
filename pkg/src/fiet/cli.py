"""Command-line interface.

Subcommands:

* ``step``      one induction step on an FIET (length-driven) or on
                combinatorics alone (``--letter``)
* ``path``      thread a letter word or the parameterized construction path
* ``construct`` limit length vectors and contraction diameter after m blocks
* ``verify``    the full inequality/separation/matrix verification pipeline
* ``simulate``  exact Birkhoff visit frequencies of the constructed map
* ``oracle``    randomized cross-check of induction against first returns

Exit codes: 0 success, 1 a verification failed or the induction step is
undefined, 2 usage or input errors.  All outputs are byte-reproducible:
sorted JSON keys, exact rationals as "num/den", no timestamps.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional

from . import serialize
from .construction import (
    ParameterSchedule,
    PathParameters,
    ResourceLimitError,
    base_datum,
    build_path,
    limit_vectors,
)
from .core import Fiet, FietError
from .induction import (
    KeaneViolation,
    RauzyPath,
    induced_subpermutation,
    path_matrix_for_power,
    rauzy_step,
    symbolic_step,
)
from .verify import (
    birkhoff_frequencies,
    midpoint_starts,
    oracle_crosscheck,
    verify_all,
)


class UsageError(Exception):
    """Bad input or flag combination; reported on stderr with exit code 2."""


def _read_json(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {path}: {exc}") from exc


def _write_text(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _schedule_from_args(args) -> ParameterSchedule:
    if getattr(args, "config", None):
        data = _read_json(args.config)
        try:
            schedule = serialize.schedule_from_dict(data)
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad schedule config: {exc}") from exc
    else:
        schedule = serialize.named_schedule(args.mode)
    overrides = {}
    if getattr(args, "d", None) is not None:
        overrides["d"] = args.d
    if getattr(args, "p1", None) is not None:
        overrides["p1_1"] = args.p1
    if getattr(args, "p4_rule", None) is not None:
        overrides["p4_rule"] = args.p4_rule
    if getattr(args, "p5_rule", None) is not None:
        overrides["p5_rule"] = args.p5_rule
    if overrides:
        base = serialize.schedule_to_dict(schedule)
        base.update(overrides)
        base["mode"] = "custom"
        schedule = serialize.schedule_from_dict(base)
    return schedule


def _params_from_string(s: str) -> PathParameters:
    try:
        parts = [int(v) for v in s.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad parameter list {s!r}: {exc}") from exc
    if len(parts) != 5:
        raise UsageError("expected five comma-separated parameters p1,p2,p3,p4,p5")
    try:
        return PathParameters(*parts)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_step(args) -> int:
    data = _read_json(args.input)
    try:
        if "lengths" in data:
            f = serialize.fiet_from_dict(data)
            comb = f.comb
        else:
            f = None
            comb = serialize.comb_from_dict(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"bad FIET data: {exc}") from exc

    if f is None and not args.letter:
        raise UsageError("input has no lengths; --letter is required")

    if args.letter:
        out = symbolic_step(comb, args.letter)
        payload = serialize.step_outcome_to_dict(out)
        if f is not None:
            lengths = list(f.lengths)
            lengths[out.winner - 1] -= lengths[out.loser - 1]
            if lengths[out.winner - 1] <= 0:
                raise UsageError(
                    "letter contradicts the lengths: winner is not longer"
                )
            payload["lengths"] = serialize.vector_to_strs(lengths)
    else:
        f2, out = rauzy_step(f)
        payload = serialize.step_outcome_to_dict(out)
        payload["lengths"] = serialize.vector_to_strs(f2.lengths)
    _write_text(serialize.dump_json(payload), args.out)
    return 0


def _cmd_path(args) -> int:
    if (args.word is None) == (args.params is None):
        raise UsageError("exactly one of --word or --params is required")
    if args.input:
        comb = serialize.comb_from_dict(_read_json(args.input))
    else:
        comb = base_datum()
    if args.word is not None:
        if set(args.word) - {"a", "b"}:
            raise UsageError("--word must use only letters 'a' and 'b'")
        path = RauzyPath.from_word(args.word)
    else:
        path = build_path(_params_from_string(args.params))
    if args.power < 1:
        raise UsageError("--power must be >= 1")
    end, matrix = path_matrix_for_power(comb, path, args.power)
    payload = {
        "start": serialize.comb_to_dict(comb),
        "combinatorics": serialize.comb_to_dict(end),
        "matrix": serialize.matrix_to_lists(matrix),
        "path_length": path.length * args.power,
        "power": args.power,
    }
    if args.induced:
        try:
            labels = [int(v) for v in args.induced.split(",")]
        except ValueError as exc:
            raise UsageError(f"bad --induced list: {exc}") from exc
        try:
            pi0r, pi1r = induced_subpermutation(comb, end, labels)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        payload["induced"] = {
            "labels": sorted(set(labels)),
            "pi0": list(pi0r),
            "pi1": list(pi1r),
        }
    _write_text(serialize.dump_json(payload), args.out)
    return 0


def _cmd_construct(args) -> int:
    schedule = _schedule_from_args(args)
    try:
        report = limit_vectors(schedule, args.depth, family=args.family)
    except ResourceLimitError as exc:
        sys.stderr.write(f"resource limit: {exc}\n")
        if exc.partial is not None:
            payload = serialize.limit_report_to_dict(exc.partial, args.precision)
            payload["partial"] = True
            _write_text(serialize.dump_json(payload), args.out)
        return 1
    payload = serialize.limit_report_to_dict(report, args.precision)
    payload["schedule"] = serialize.schedule_to_dict(schedule)
    _write_text(serialize.dump_json(payload), args.out)
    return 0


def _cmd_verify(args) -> int:
    schedule = _schedule_from_args(args)
    report = verify_all(
        schedule,
        args.depth,
        c=args.c,
        b=args.b,
        family=args.family,
        include_matrix_report=not args.no_matrix_report,
    )
    payload = serialize.verify_report_to_dict(report)
    _write_text(serialize.dump_json(payload), args.out)
    if not report["passed"]:
        sys.stderr.write(
            f"verification FAILED: {len(report['records_failing'])} record(s) failing\n"
        )
        return 1
    return 0


def _cmd_simulate(args) -> int:
    if args.alpha:
        data = _read_json(args.alpha)
        try:
            vec = [serialize.parse_fraction(s) for s in data["alpha"]["exact"]]
        except (KeyError, ValueError, TypeError) as exc:
            raise UsageError(
                f"--alpha file must be construct output with alpha.exact: {exc}"
            ) from exc
    else:
        schedule = _schedule_from_args(args)
        vec = list(limit_vectors(schedule, args.depth, family=args.family).alpha)
    f = Fiet(base_datum(), tuple(vec))
    if args.starts == "midpoints":
        starts = midpoint_starts(f)
    else:
        try:
            starts = tuple(Fraction(s) for s in args.starts.split(","))
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"bad --starts list: {exc}") from exc
    try:
        horizons = tuple(int(h) for h in args.horizons.split(","))
    except ValueError as exc:
        raise UsageError(f"bad --horizons list: {exc}") from exc
    report = birkhoff_frequencies(f, starts, horizons)
    _write_text(serialize.frequency_report_csv(report, args.precision), args.out)
    return 0


def _cmd_oracle(args) -> int:
    if args.trials < 0:
        raise UsageError("--trials must be >= 0")
    summary = oracle_crosscheck(args.trials, args.seed)
    payload = {
        "trials": summary["trials"],
        "passes": summary["passes"],
        "failures": [
            {
                "trial": item["trial"],
                "fiet": serialize.fiet_to_dict(item["fiet"]),
                "detail": item.get("error", "step/return mismatch"),
            }
            for item in summary["failures"]
        ],
    }
    _write_text(serialize.dump_json(payload), args.out)
    return 0 if not summary["failures"] else 1


def _add_schedule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("relaxed", "strict"), default="relaxed",
                   help="named parameter schedule (default: relaxed)")
    p.add_argument("--config", help="JSON schedule file overriding --mode")
    p.add_argument("--depth", type=int, default=3,
                   help="number of three-copy blocks (default: 3)")
    p.add_argument("--family", choices=("computed", "reference"),
                   help="matrix family (defaults: construct/simulate computed, "
                        "verify reference)")
    p.add_argument("--d", type=int, help="override the growth ratio d")
    p.add_argument("--p1", type=int, help="override the copy-1 parameter p1")
    p.add_argument("--p4-rule", dest="p4_rule", choices=("p1", "p2", "p3"),
                   help="which parameter the p4 run copies")
    p.add_argument("--p5-rule", dest="p5_rule", choices=("p1", "p2", "p3"),
                   help="which parameter the p5 run copies")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiet",
        description="Exact interval exchanges with flips: induction, "
                    "construction, verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("step", help="one induction step on an FIET")
    p.add_argument("--in", dest="input", default="-",
                   help="FIET JSON file ('-' for stdin, default)")
    p.add_argument("--letter", choices=("a", "b"),
                   help="force this step type instead of comparing lengths")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_step)

    p = sub.add_parser("path", help="thread a letter word through combinatorics")
    p.add_argument("--in", dest="input",
                   help="combinatorics JSON (default: the 8-interval datum)")
    p.add_argument("--word", help="explicit letter word, e.g. 'aaab'")
    p.add_argument("--params",
                   help="p1,p2,p3,p4,p5 for the parameterized construction path")
    p.add_argument("--power", type=int, default=1,
                   help="apply the path this many times (default 1)")
    p.add_argument("--induced",
                   help="comma-separated labels: also report both rows "
                        "restricted to these labels")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_path)

    p = sub.add_parser("construct", help="limit length vectors after m blocks")
    _add_schedule_flags(p)
    p.add_argument("--precision", type=int, default=12,
                   help="decimal digits in the report (default 12)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_construct, family_default="computed")

    p = sub.add_parser("verify", help="run the full verification pipeline")
    _add_schedule_flags(p)
    p.add_argument("--c", type=int, default=11,
                   help="domination constant for the lambda2 tower (default 11)")
    p.add_argument("--b", type=int, default=34,
                   help="denominator bound for the lambda2 tower (default 34)")
    p.add_argument("--no-matrix-report", action="store_true",
                   help="skip the matrix fidelity section")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_verify, family_default="reference")

    p = sub.add_parser("simulate", help="exact Birkhoff frequencies of the map")
    _add_schedule_flags(p)
    p.add_argument("--alpha",
                   help="construct output JSON supplying the length vector "
                        "(skips rebuilding it)")
    p.add_argument("--starts", default="midpoints",
                   help="'midpoints' or comma-separated rationals (default: "
                        "midpoints)")
    p.add_argument("--horizons", default="100000",
                   help="comma-separated orbit lengths (default: 100000)")
    p.add_argument("--precision", type=int, default=12,
                   help="decimal digits in the CSV (default 12)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_simulate, family_default="computed")

    p = sub.add_parser("oracle", help="randomized induction/first-return crosscheck")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_oracle)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "family") and args.family is None:
        args.family = getattr(args, "family_default", "computed")
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except KeaneViolation as exc:
        sys.stderr.write(f"induction undefined: {exc}\n")
        return 1
    except FietError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
