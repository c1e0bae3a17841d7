"""Stable exact-rational serialization for files, pipes, and reports.

Rationals are rendered "num/den" (always with the denominator, so round
trips are unambiguous); decimals are a fixed-precision rendering for human
readers only and never parsed back.  JSON output sorts keys and carries no
timestamps, so identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Sequence

from .core import Fiet, FietCombinatorics
from .construction import LimitReport, ParameterSchedule
from .induction import StepOutcome, TransitionMatrix
from .verify import FrequencyReport, InequalityRecord


def format_fraction(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(s: str) -> Fraction:
    return Fraction(s)


def fraction_to_decimal(q: Fraction, precision: int = 12) -> str:
    """Fixed-point decimal rendering, round-half-up, deterministic."""
    if precision < 1:
        raise ValueError("precision must be >= 1")
    q = Fraction(q)
    sign = "-" if q < 0 else ""
    q = abs(q)
    scaled = (q.numerator * 10**precision * 2 + q.denominator) // (2 * q.denominator)
    digits = str(scaled).rjust(precision + 1, "0")
    return f"{sign}{digits[:-precision]}.{digits[-precision:]}"


def vector_to_strs(vec: Sequence) -> list[str]:
    return [format_fraction(Fraction(v)) for v in vec]


def comb_to_dict(c: FietCombinatorics) -> dict:
    return {
        "n": c.n,
        "pi0": list(c.pi0),
        "pi1": list(c.pi1),
        "flips": sorted(c.flips),
    }


def comb_from_dict(d: dict) -> FietCombinatorics:
    return FietCombinatorics(
        int(d["n"]),
        tuple(d["pi0"]),
        tuple(d["pi1"]),
        frozenset(d.get("flips", ())),
    )


def fiet_to_dict(f: Fiet) -> dict:
    out = comb_to_dict(f.comb)
    out["lengths"] = vector_to_strs(f.lengths)
    return out


def fiet_from_dict(d: dict) -> Fiet:
    if "lengths" not in d:
        raise ValueError("FIET data must include 'lengths'")
    return Fiet(comb_from_dict(d), tuple(parse_fraction(s) for s in d["lengths"]))


def matrix_to_lists(m: TransitionMatrix) -> list[list[int]]:
    return [list(row) for row in m.rows]


def step_outcome_to_dict(out: StepOutcome) -> dict:
    return {
        "combinatorics": comb_to_dict(out.new_comb),
        "winner": out.winner,
        "loser": out.loser,
        "case_tag": out.case_tag,
        "letter": out.letter,
        "matrix": matrix_to_lists(out.matrix),
    }


def record_to_dict(r: InequalityRecord) -> dict:
    return {
        "lemma": r.lemma_id,
        "item": r.item,
        "lhs": format_fraction(r.lhs),
        "rhs": format_fraction(r.rhs),
        "margin": format_fraction(r.margin),
        "holds": r.holds,
        "strict": r.strict,
    }


def schedule_to_dict(s: ParameterSchedule) -> dict:
    return {
        "d": s.d,
        "p1_1": s.p1_1,
        "p4_rule": s.p4_rule,
        "p5_rule": s.p5_rule,
        "mode": s.mode,
    }


def schedule_from_dict(d: dict) -> ParameterSchedule:
    if "mode" in d and set(d) <= {"mode"}:
        return named_schedule(d["mode"])
    return ParameterSchedule(
        d=int(d["d"]),
        p1_1=int(d["p1_1"]),
        p4_rule=d.get("p4_rule", "p2"),
        p5_rule=d.get("p5_rule", "p1"),
        mode=d.get("mode", "custom"),
    )


def named_schedule(mode: str) -> ParameterSchedule:
    if mode == "relaxed":
        return ParameterSchedule.relaxed()
    if mode == "strict":
        return ParameterSchedule.strict()
    raise ValueError(f"unknown schedule mode {mode!r}")


def limit_report_to_dict(rep: LimitReport, precision: int = 12) -> dict:
    def both(vec):
        return {
            "exact": vector_to_strs(vec),
            "decimal": [fraction_to_decimal(v, precision) for v in vec],
        }

    return {
        "depth": rep.m,
        "family": rep.family,
        "lambda2": both(rep.lambda2),
        "lambda5": both(rep.lambda5),
        "lambda7": both(rep.lambda7),
        "alpha": both(rep.alpha),
        "contraction_diameter": {
            "exact": format_fraction(rep.contraction_diameter),
            "decimal": fraction_to_decimal(rep.contraction_diameter, precision),
        },
    }


def verify_report_to_dict(report: dict, precision: int = 12) -> dict:
    """JSON-ready form of the dict produced by verify.verify_all."""
    towers = {}
    for key in ("lambda7", "lambda5", "lambda2"):
        towers[key] = {
            str(level): [record_to_dict(r) for r in recs]
            for level, recs in report["towers"][key].items()
        }
    vectors = {
        key: vector_to_strs(vec)
        for key, vec in report["towers"]["vectors"].items()
    }
    out = {
        "schedule": schedule_to_dict(report["schedule"]),
        "validity": report["validity"],
        "depth": report["depth"],
        "family": report["family"],
        "checked_levels": list(report["checked_levels"]),
        "towers": towers,
        "level1_vectors": vectors,
        "separation": [record_to_dict(r) for r in report["separation"]],
        "records_total": report["records_total"],
        "records_failing": [record_to_dict(r) for r in report["records_failing"]],
        "passed": report["passed"],
    }
    if "matrix_fidelity" in report:
        out["matrix_fidelity"] = fidelity_to_dict(report["matrix_fidelity"])
    return out


def fidelity_to_dict(fid: dict) -> dict:
    cases = []
    for c in fid["cases"]:
        t = c["params"]
        cases.append({
            "params": {f"p{k}": getattr(t, f"p{k}") for k in range(1, 6)},
            "end_state": comb_to_dict(c["end_state"]),
            "computed": matrix_to_lists(c["computed"]),
            "reference": matrix_to_lists(c["reference"]),
            "entrywise_equal": c["entrywise_equal"],
            "differing_entries": [list(e) for e in c["differing_entries"]],
            "computed_column_sums": list(c["computed_column_sums"]),
            "reference_column_sums": list(c["reference_column_sums"]),
            "reference_column_sums_match_formula":
                c["reference_column_sums_match_formula"],
            "reference_row_sums_match_formula":
                c["reference_row_sums_match_formula"],
            "p4_dependent_entries": [list(e) for e in c["p4_dependent_entries"]],
            "p5_dependent_entries": [list(e) for e in c["p5_dependent_entries"]],
        })
    return {
        "cases": cases,
        "entrywise_equal": fid["entrywise_equal"],
        "reference_identities_hold": fid["reference_identities_hold"],
        "discrepancy_isolated": fid["discrepancy_isolated"],
    }


FREQUENCY_CSV_HEADER = (
    ["start", "horizon"]
    + [f"f{k}" for k in range(1, 9)]
    + [f"f{k}_dec" for k in range(1, 9)]
    + ["steps_completed", "terminated_at", "max_gap"]
)


def frequency_report_rows(report: FrequencyReport, precision: int = 12) -> list[list[str]]:
    """CSV rows (strings) for a frequency report over an 8-interval map.

    Frequencies appear twice, exact ("num/den") and decimal; the start point
    and max-gap diagnostic are decimal only (their exact forms can run to
    hundreds of digits when the lengths come from deep renormalization).
    """
    rows = []
    for r in report.results:
        freqs = list(r.frequencies)
        if len(freqs) != 8:
            raise ValueError("frequency CSV layout expects 8 labels")
        rows.append(
            [fraction_to_decimal(r.start, precision), str(r.horizon)]
            + [format_fraction(v) for v in freqs]
            + [fraction_to_decimal(v, precision) for v in freqs]
            + [
                str(r.steps_completed),
                "" if r.terminated_at is None else str(r.terminated_at),
                fraction_to_decimal(r.max_gap, precision),
            ]
        )
    return rows


def frequency_report_csv(report: FrequencyReport, precision: int = 12) -> str:
    lines = [",".join(FREQUENCY_CSV_HEADER)]
    lines += [",".join(row) for row in frequency_report_rows(report, precision)]
    return "\n".join(lines) + "\n"


def dump_json(obj) -> str:
    """Deterministic JSON: sorted keys, stable floats-free payload, newline end."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
