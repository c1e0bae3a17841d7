"""Machine verification: inequality suites, towers, separations, simulation.

The invariant-measure argument rests on four groups of coordinate
inequalities (here ``L1`` .. ``L4``) about normalized vectors produced by the
renormalization towers, plus separation sums showing the three limit
directions are distinct.  Every check is exact rational arithmetic; a record
never rounds.

Tower convention: with J = 3m copies scheduled, the level-j vector is the
normalized image of the seed basis vector under the copy matrices j..J
(applied right to left).  Levels J-1 and J are start-up artifacts of the
finite seed, so a depth-m run checks levels 1..3m-2.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from .core import (
    Fiet,
    FietCombinatorics,
    domain_partition,
    first_return,
    range_partition,
)
from .induction import KeaneViolation, rauzy_step
from .construction import (
    N_LABELS,
    ParameterSchedule,
    PathParameters,
    base_datum,
    l1_distance,
    matrix_fidelity_report,
    normalize,
    reference_column_sums,
    theta_copy,
)

BURN_IN_LEVELS = 2  # levels J-1, J are finite-seed start-up artifacts


@dataclass(frozen=True)
class InequalityRecord:
    """One checked inequality: lhs (cmp) rhs with exact margin = lhs - rhs.

    ``holds`` is ``margin > 0`` for strict records and ``margin >= 0`` for
    the single non-strict one.
    """

    lemma_id: str
    item: str
    lhs: Fraction
    rhs: Fraction
    margin: Fraction
    holds: bool
    strict: bool = True


def _rec(lemma_id: str, item: str, lhs, rhs, strict: bool = True) -> InequalityRecord:
    lhs = Fraction(lhs)
    rhs = Fraction(rhs)
    margin = lhs - rhs
    holds = margin > 0 if strict else margin >= 0
    return InequalityRecord(lemma_id, item, lhs, rhs, margin, holds, strict)


def _as_simplex(x: Sequence) -> tuple[Fraction, ...]:
    v = tuple(Fraction(e) for e in x)
    if len(v) != N_LABELS:
        raise ValueError(f"expected {N_LABELS} coordinates, got {len(v)}")
    if any(e < 0 for e in v):
        raise ValueError("coordinates must be non-negative")
    if sum(v) != 1:
        raise ValueError("coordinates must sum to 1")
    return v


def _check_triple_shape(t: PathParameters, d: Optional[int]) -> None:
    if d is not None and (t.p2 != d * t.p1 or t.p3 != d * t.p2):
        raise ValueError(
            f"parameters {t} do not satisfy p2 = d*p1, p3 = d*p2 with d = {d}"
        )


def check_lemma1(
    x: Sequence, t: PathParameters, d: Optional[int] = None
) -> list[InequalityRecord]:
    """Coordinate inequalities for the tower seeded at basis vector 7.

    ``x`` is a level vector of that tower (non-negative, sum 1); ``t`` is the
    parameter set of the copy at that level; ``d`` (optional) asserts the
    geometric shape p2 = d*p1, p3 = d*p2 of ``t`` before checking.
    """
    v = _as_simplex(x)
    _check_triple_shape(t, d)
    x1, x2, x3, x4, x5, x6, x7, x8 = v
    growth = sum(
        c * e for c, e in zip(reference_column_sums(t), v)
    )
    return [
        _rec("L1", "x7 > 1/7", x7, Fraction(1, 7)),
        _rec("L1", "2*x7 > x1", 2 * x7, x1),
        _rec("L1", "2*x7 > x4", 2 * x7, x4),
        _rec("L1", "2*x7 > x8", 2 * x7, x8),
        _rec("L1", "4*x7 > x3", 4 * x7, x3),
        _rec("L1", "x7 > x5", x7, x5),
        _rec("L1", "x5 < 1/10", Fraction(1, 10), x5),
        _rec("L1", "x6 > x2", x6, x2),
        _rec("L1", "x3 > x7", x3, x7),
        _rec("L1", "x2 < 1/p1", Fraction(1, t.p1), x2),
        _rec("L1", "growth > p2/2", growth, Fraction(t.p2, 2)),
        _rec("L1", "growth > 2*p1", growth, 2 * t.p1),
    ]


def check_lemma2(x: Sequence, t: PathParameters) -> list[InequalityRecord]:
    """Coordinate inequalities for the tower seeded at basis vector 5.

    The record ``x6 + x7 >= x8`` is the one non-strict inequality in the
    suite (its margin vanishes in the limit direction).
    """
    v = _as_simplex(x)
    x1, x2, x3, x4, x5, x6, x7, x8 = v
    growth = sum(c * e for c, e in zip(reference_column_sums(t), v))
    return [
        _rec("L2", "x5 > 1/4", x5, Fraction(1, 4)),
        _rec("L2", "2*x3 > x1", 2 * x3, x1),
        _rec("L2", "x3 + x5 > x1", x3 + x5, x1),
        _rec("L2", "3*x6 + x7 > x4", 3 * x6 + x7, x4),
        _rec("L2", "x6 + x7 >= x8", x6 + x7, x8, strict=False),
        _rec("L2", "x2 < 1/p1", Fraction(1, t.p1), x2),
        _rec("L2", "x6 < 7/p1", Fraction(7, t.p1), x6),
        _rec("L2", "x7 < 1/p1", Fraction(1, t.p1), x7),
        _rec("L2", "x8 < 22/p1", Fraction(22, t.p1), x8),
        _rec("L2", "x8 < 8/p1", Fraction(8, t.p1), x8),
        _rec("L2", "x4 < 22/p1", Fraction(22, t.p1), x4),
        _rec("L2", "growth > p1", growth, t.p1),
    ]


def check_lemma3(
    x: Sequence, c: int = 11, t: Optional[PathParameters] = None
) -> list[InequalityRecord]:
    """Domination records c*x2 > xi for the tower seeded at basis vector 2.

    Requires c > 10.  When ``t`` is given, also records the size
    precondition p3 > 2*p1 + 4*p2 + 61 the domination argument relies on.
    """
    if c <= 10:
        raise ValueError(f"c must exceed 10, got {c}")
    v = _as_simplex(x)
    x2 = v[1]
    records = [
        _rec("L3", f"{c}*x2 > x{i}", c * x2, v[i - 1])
        for i in (1, 3, 4, 5, 6, 7, 8)
    ]
    if t is not None:
        records.append(
            _rec("L3", "p3 > 2*p1 + 4*p2 + 61", t.p3, 2 * t.p1 + 4 * t.p2 + 61)
        )
    return records


def check_lemma4(
    x: Sequence, b: int = 34, t: Optional[PathParameters] = None
) -> list[InequalityRecord]:
    """Lower bound x2 > 1/b for the tower seeded at basis vector 2.

    Requires b > 33.  When ``t`` is given, also records the sufficient size
    condition (b-33)*(p3-49) > 33*49.
    """
    if b <= 33:
        raise ValueError(f"b must exceed 33, got {b}")
    v = _as_simplex(x)
    records = [_rec("L4", f"x2 > 1/{b}", v[1], Fraction(1, b))]
    if t is not None:
        records.append(
            _rec("L4", f"(b-33)*(p3-49) > 33*49, b={b}",
                 (b - 33) * (t.p3 - 49), 33 * 49)
        )
    return records


def tower_vectors(
    schedule: ParameterSchedule,
    seed: int,
    copies: int,
    family: str = "reference",
) -> dict[int, tuple[Fraction, ...]]:
    """Level vectors of the tower seeded at basis vector ``seed``.

    Returns {level j: x^(j)} for j = 1..copies+1, where x^(copies+1) is the
    seed itself and x^(j) = normalize(M_j * x^(j+1)) with M_j the copy-j
    matrix of the chosen family.
    """
    if not (1 <= seed <= N_LABELS):
        raise ValueError(f"seed must be a label in 1..{N_LABELS}")
    if copies < 1:
        raise ValueError("copies must be >= 1")
    vec: tuple[Fraction, ...] = tuple(
        Fraction(1 if k == seed else 0) for k in range(1, N_LABELS + 1)
    )
    levels = {copies + 1: vec}
    for j in range(copies, 0, -1):
        vec = normalize(theta_copy(schedule, j, family).mat_vec(vec))
        levels[j] = vec
    return levels


def checked_levels(m: int) -> tuple[int, ...]:
    """Levels a depth-m run checks: 1..3m-2 (the last two are burn-in)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return tuple(range(1, 3 * m - BURN_IN_LEVELS + 1))


def lemma_towers(
    schedule: ParameterSchedule,
    m: int,
    c: int = 11,
    b: int = 34,
    family: str = "reference",
) -> dict:
    """Run all four inequality groups on their towers down to depth m blocks.

    Returns {"lambda7": {level: records}, "lambda5": ..., "lambda2": ...}
    where the lambda2 tower carries both its domination (L3) and lower-bound
    (L4) records, and additionally the level-1 vectors under "vectors".
    """
    copies = 3 * m
    levels = checked_levels(m)
    t7 = tower_vectors(schedule, 7, copies, family)
    t5 = tower_vectors(schedule, 5, copies, family)
    t2 = tower_vectors(schedule, 2, copies, family)
    out = {
        "lambda7": {
            j: check_lemma1(t7[j], schedule.params(j), schedule.d) for j in levels
        },
        "lambda5": {j: check_lemma2(t5[j], schedule.params(j)) for j in levels},
        "lambda2": {
            j: check_lemma3(t2[j], c, schedule.params(j))
            + check_lemma4(t2[j], b, schedule.params(j))
            for j in levels
        },
        "vectors": {"lambda7": t7[1], "lambda5": t5[1], "lambda2": t2[1]},
    }
    return out


def check_separation(
    l2: Sequence, l5: Sequence, l7: Sequence, t: PathParameters
) -> list[InequalityRecord]:
    """Separation records showing the three directions are pairwise distinct.

    Four sums of the form (1 - x_k(u)) + x_k(v) are checked against 1 and
    against their supporting analytic bounds; the three pairwise L1
    distances are checked against the coordinate gaps implying them.
    ``t`` supplies the p1 appearing in the bounds (use the copy-1
    parameters of the schedule that produced the vectors).
    """
    v2, v5, v7 = _as_simplex(l2), _as_simplex(l5), _as_simplex(l7)
    one = Fraction(1)
    p1 = t.p1
    s75 = (one - v5[6]) + v7[6]  # coordinate 7 separates lambda7 from lambda5
    s57 = (one - v7[4]) + v5[4]  # coordinate 5 separates lambda5 from lambda7
    s27 = (one - v7[1]) + v2[1]  # coordinate 2 separates lambda2 from lambda7
    s25 = (one - v5[1]) + v2[1]  # coordinate 2 separates lambda2 from lambda5
    b75 = (one - Fraction(1, p1)) + Fraction(1, 7)
    b57 = Fraction(9, 10) + Fraction(1, 4)
    b2x = (one - Fraction(1, p1)) + Fraction(1, 34)
    records = [
        _rec("SEP", "(1 - x7(l5)) + x7(l7) > 1", s75, one),
        _rec("SEP", "(1 - x5(l7)) + x5(l5) > 1", s57, one),
        _rec("SEP", "(1 - x2(l7)) + x2(l2) > 1", s27, one),
        _rec("SEP", "(1 - x2(l5)) + x2(l2) > 1", s25, one),
        _rec("SEP", "(1 - x7(l5)) + x7(l7) > (1 - 1/p1) + 1/7", s75, b75),
        _rec("SEP", "(1 - x5(l7)) + x5(l5) > 9/10 + 1/4", s57, b57),
        _rec("SEP", "(1 - x2(l7)) + x2(l2) > (1 - 1/p1) + 1/34", s27, b2x),
        _rec("SEP", "(1 - x2(l5)) + x2(l2) > (1 - 1/p1) + 1/34", s25, b2x),
        _rec("SEP", "L1(l5, l7) > 1/7 - 1/p1",
             l1_distance(v5, v7), Fraction(1, 7) - Fraction(1, p1)),
        _rec("SEP", "L1(l5, l7) > 1/4 - 1/10",
             l1_distance(v5, v7), Fraction(1, 4) - Fraction(1, 10)),
        _rec("SEP", "L1(l2, l7) > 1/34 - 1/p1",
             l1_distance(v2, v7), Fraction(1, 34) - Fraction(1, p1)),
        _rec("SEP", "L1(l2, l5) > 1/34 - 1/p1",
             l1_distance(v2, v5), Fraction(1, 34) - Fraction(1, p1)),
    ]
    return records


def verify_all(
    schedule: ParameterSchedule,
    m: int,
    c: int = 11,
    b: int = 34,
    family: str = "reference",
    include_matrix_report: bool = True,
) -> dict:
    """Full verification pipeline at depth m blocks.

    Returns a report with the schedule's validity flags, every tower
    inequality record at every checked level, the separation records on the
    level-1 vectors, and (optionally) the matrix fidelity report.  The
    "passed" flag is True iff every record holds AND the reference-family
    sum identities hold AND the computed/reference discrepancy is either
    absent or exactly isolated to reported entries.
    """
    towers = lemma_towers(schedule, m, c, b, family)
    separation = check_separation(
        towers["vectors"]["lambda2"],
        towers["vectors"]["lambda5"],
        towers["vectors"]["lambda7"],
        schedule.params(1),
    )
    all_records = separation[:]
    for key in ("lambda7", "lambda5", "lambda2"):
        for recs in towers[key].values():
            all_records.extend(recs)
    report = {
        "schedule": schedule,
        "validity": schedule.validity(),
        "depth": m,
        "family": family,
        "checked_levels": checked_levels(m),
        "towers": towers,
        "separation": separation,
        "records_total": len(all_records),
        "records_failing": [r for r in all_records if not r.holds],
    }
    matrix_ok = True
    if include_matrix_report:
        fidelity = matrix_fidelity_report()
        report["matrix_fidelity"] = fidelity
        matrix_ok = fidelity["reference_identities_hold"] and (
            fidelity["entrywise_equal"] or fidelity["discrepancy_isolated"]
        )
    report["passed"] = not report["records_failing"] and matrix_ok
    return report


@dataclass(frozen=True)
class StartResult:
    """Birkhoff statistics of one orbit up to one horizon."""

    start: Fraction
    horizon: int
    steps_completed: int
    terminated_at: Optional[int]
    frequencies: tuple[Fraction, ...]
    max_gap: Fraction


@dataclass(frozen=True)
class FrequencyReport:
    """Visit frequencies for several starts and horizons on one FIET."""

    start_points: tuple[Fraction, ...]
    horizons: tuple[int, ...]
    results: tuple[StartResult, ...]


def midpoint_starts(f: Fiet) -> tuple[Fraction, ...]:
    """Midpoints of the domain subintervals — generic starting points."""
    return tuple((lo + hi) / 2 for _, lo, hi in domain_partition(f))


def birkhoff_frequencies(
    f: Fiet, starts: Sequence, horizons
) -> FrequencyReport:
    """Exact visit frequencies of finite orbits.

    For each start and horizon: the fraction of the first ``horizon`` orbit
    points lying in each labeled subinterval (exact rationals summing to 1),
    the largest gap the visited points leave in [0, L) (a density
    diagnostic), and — if the orbit hits a point where the map is undefined —
    the step index at which it terminated, with frequencies over the steps
    actually completed.  A terminating start affects only its own rows.

    Arithmetic is pure integer: positions are scaled by twice the common
    denominator of the lengths, so flips stay exact and comparisons are
    machine integers whenever the data is small.
    """
    if isinstance(horizons, int):
        horizons = (horizons,)
    horizons = tuple(int(h) for h in horizons)
    if not horizons or any(h < 1 for h in horizons):
        raise ValueError("horizons must be positive integers")
    horizons = tuple(sorted(set(horizons)))
    starts = tuple(Fraction(s) for s in starts)

    # Integer scaling: denominators of lengths and starts, doubled so that
    # reflections (x -> a + b - x) and midpoints stay integral.
    scale = 2 * lcm(*(q.denominator for q in list(f.lengths) + list(starts)))
    dom = domain_partition(f)
    rng_left = {label: lo for label, lo, _ in range_partition(f)}
    cuts = [int(lo * scale) for _, lo, _ in dom]
    tiles = []
    for label, lo, hi in dom:
        u = int(lo * scale)
        lam = int((hi - lo) * scale)
        v = int(rng_left[label] * scale)
        flipped = label in f.comb.flips
        tiles.append((label, u, lam, v, flipped))
    L = int(f.total_length * scale)

    results = []
    hmax = horizons[-1]
    for start in starts:
        x = int(start * scale)
        if not (0 <= x < L):
            raise ValueError(f"start {start} outside [0, {f.total_length})")
        counts = [0] * f.n
        positions = [x]
        snapshots: dict[int, tuple] = {}
        terminated: Optional[int] = None
        hs = set(horizons)
        for step in range(hmax):
            i = bisect_right(cuts, x) - 1
            label, u, lam, v, flipped = tiles[i]
            if flipped:
                if x == u:
                    terminated = step
                    break
                nxt = v + (u + lam - x)
            else:
                nxt = v + (x - u)
            counts[label - 1] += 1
            x = nxt
            if step + 1 < hmax:
                positions.append(x)
            if step + 1 in hs:
                snapshots[step + 1] = tuple(counts)
        for h in horizons:
            if terminated is not None and h > terminated:
                done = terminated
                cts = tuple(counts)
            else:
                done = h
                cts = snapshots[h]
            total = sum(cts)
            freqs = tuple(
                Fraction(ct, total) if total else Fraction(0) for ct in cts
            )
            visited = sorted(positions[: max(done, 1)])
            gaps = [visited[0]] + [
                b - a for a, b in zip(visited, visited[1:])
            ] + [L - visited[-1]]
            results.append(StartResult(
                start=start,
                horizon=h,
                steps_completed=done,
                terminated_at=terminated if (terminated is not None and h > terminated) else None,
                frequencies=freqs,
                max_gap=Fraction(max(gaps), scale),
            ))
    return FrequencyReport(starts, horizons, tuple(results))


def frequency_l1_gaps(report: FrequencyReport, horizon: int) -> dict:
    """Pairwise L1 distances between the frequency vectors at one horizon."""
    rows = [r for r in report.results if r.horizon == horizon]
    gaps = {}
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            gaps[(str(rows[i].start), str(rows[j].start))] = l1_distance(
                rows[i].frequencies, rows[j].frequencies
            )
    return gaps


def oracle_crosscheck(trials: int, seed: int = 0) -> dict:
    """Random cross-validation of the induction step against the return map.

    For each trial draws a random FIET (n in 2..8, random rows, random flip
    set, random exact lengths with distinct rightmost pair), performs one
    length-driven induction step, and independently computes the first-return
    map to [0, L - loser_length) geometrically.  The two results must be
    identical labeled data.
    """
    rng = random.Random(seed)
    failures = []
    for trial in range(trials):
        f = _random_fiet(rng)
        lt = f.length_of(f.comb.pi0[-1])
        lb = f.length_of(f.comb.pi1[-1])
        cut = f.total_length - min(lt, lb)
        stepped, _ = rauzy_step(f)
        try:
            returned = first_return(f, cut)
        except Exception as exc:  # noqa: BLE001 - recorded, not silenced
            failures.append({"trial": trial, "fiet": f, "error": repr(exc)})
            continue
        if stepped != returned:
            failures.append({
                "trial": trial,
                "fiet": f,
                "stepped": stepped,
                "returned": returned,
            })
    return {
        "trials": trials,
        "passes": trials - len(failures),
        "failures": failures,
    }


def _random_fiet(rng: random.Random) -> Fiet:
    while True:
        n = rng.randint(2, 8)
        pi0 = list(range(1, n + 1))
        pi1 = list(range(1, n + 1))
        rng.shuffle(pi0)
        rng.shuffle(pi1)
        if pi0[-1] == pi1[-1]:
            continue
        flips = frozenset(k for k in range(1, n + 1) if rng.random() < 0.5)
        lengths = tuple(
            Fraction(rng.randint(1, 60), rng.randint(1, 30)) for _ in range(n)
        )
        f = Fiet(FietCombinatorics(n, tuple(pi0), tuple(pi1), flips), lengths)
        if f.length_of(pi0[-1]) != f.length_of(pi1[-1]):
            return f


def subtractive_steps(a: int, b: int) -> list[tuple[int, int]]:
    """Trace of the subtractive gcd algorithm: successive (larger-reduced) pairs.

    Oracle for induction on two unflipped swapped intervals, which performs
    exactly this subtraction until the lengths tie.
    """
    if a < 1 or b < 1 or a == b:
        raise ValueError("need distinct positive integers")
    trace = []
    while a != b:
        if a > b:
            a = a - b
        else:
            b = b - a
        trace.append((a, b))
    return trace
