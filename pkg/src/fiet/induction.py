"""Rauzy induction for interval exchange transformations with flips.

One induction step compares the rightmost domain subinterval (label
``pi0[-1]``) with the rightmost range subinterval (label ``pi1[-1]``), cuts
the shorter one off the end of the interval, and takes the first-return map.
The label of the longer subinterval is the *winner*, the other the *loser*;
the winner keeps its label with length ``len(winner) - len(loser)``.

Two step types, named by a letter:

* letter ``'a'``: the winner is the rightmost *range* label ``pi1[-1]``; the
  domain row ``pi0`` is modified.
* letter ``'b'``: the winner is the rightmost *domain* label ``pi0[-1]``; the
  range row ``pi1`` is modified.

In the modified row the loser is removed from the end and re-inserted
immediately *after* the winner when the winner is unflipped, immediately
*before* it when the winner is flipped; in the flipped case the loser's flip
state is toggled.  Each outcome also carries a case tag: ``'a*'`` when the
winner is the domain label, ``'b*'`` when it is the range label, with suffix
``'2'`` when the winner is flipped and ``'1'`` otherwise.

Lengths transform by old = E · new with E = I + e_{winner,loser}; a path's
matrix is the product of its step matrices in step order, so old lengths =
(path matrix) · new lengths throughout.

Every convention here is cross-checked in the test suite against a geometric
first-return oracle (:func:`fiet.core.first_return`) that knows nothing about
the case analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import Fiet, FietCombinatorics, FietError

LETTERS = ("a", "b")


class KeaneViolation(FietError):
    """The two rightmost subintervals tie (or coincide), so no step is defined."""


@dataclass(frozen=True)
class TransitionMatrix:
    """Square integer matrix, rows-of-tuples; exact bigint arithmetic."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(v) for v in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("matrix must be square and non-empty")

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int) -> "TransitionMatrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def elementary(cls, n: int, winner: int, loser: int) -> "TransitionMatrix":
        """I + e_{winner,loser} (labels are 1-based)."""
        return cls.elementary_power(n, winner, loser, 1)

    @classmethod
    def elementary_power(cls, n: int, winner: int, loser: int, k: int) -> "TransitionMatrix":
        """I + k * e_{winner,loser}: the matrix of k repeats of a state-fixed step."""
        if winner == loser:
            raise ValueError("winner and loser must differ")
        rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        rows[winner - 1][loser - 1] += k
        return cls(tuple(tuple(r) for r in rows))

    def __matmul__(self, other: "TransitionMatrix") -> "TransitionMatrix":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        n = self.n
        ocols = tuple(zip(*other.rows))
        return TransitionMatrix(
            tuple(
                tuple(sum(a * b for a, b in zip(row, col)) for col in ocols)
                for row in self.rows
            )
        )

    def power(self, k: int) -> "TransitionMatrix":
        if k < 0:
            raise ValueError("k must be >= 0")
        result = TransitionMatrix.identity(self.n)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base if k > 1 else base
            k >>= 1
        return result

    def mat_vec(self, vec: Sequence) -> tuple:
        if len(vec) != self.n:
            raise ValueError("dimension mismatch")
        return tuple(sum(a * x for a, x in zip(row, vec)) for row in self.rows)

    def column(self, j: int) -> tuple[int, ...]:
        """Column j (1-based) — the image of the j-th basis vector."""
        return tuple(row[j - 1] for row in self.rows)

    def column_sums(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.rows))

    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.rows)

    def transpose(self) -> "TransitionMatrix":
        return TransitionMatrix(tuple(zip(*self.rows)))

    def det(self) -> int:
        """Exact determinant (fraction-free Gaussian elimination)."""
        n = self.n
        m = [list(r) for r in self.rows]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                for i in range(k + 1, n):
                    if m[i][k] != 0:
                        m[k], m[i] = m[i], m[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            prev = m[k][k]
        return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class StepOutcome:
    """Everything one induction step produces besides the new lengths."""

    new_comb: FietCombinatorics
    winner: int
    loser: int
    case_tag: str  # 'a1', 'a2' (winner = domain label), 'b1', 'b2' (range label)
    letter: str  # 'a' (range label wins) or 'b' (domain label wins)
    matrix: TransitionMatrix


def symbolic_step(c: FietCombinatorics, letter: str) -> StepOutcome:
    """One induction step on combinatorics alone, driven by the given letter."""
    if letter not in LETTERS:
        raise ValueError(f"letter must be 'a' or 'b', got {letter!r}")
    if letter == "a":
        winner, loser = c.pi1[-1], c.pi0[-1]
        row = list(c.pi0)
    else:
        winner, loser = c.pi0[-1], c.pi1[-1]
        row = list(c.pi1)
    if winner == loser:
        raise KeaneViolation(
            f"label {winner} is rightmost in both rows; the step is undefined"
        )
    flipped = winner in c.flips
    row.pop()
    k0 = row.index(winner)
    row.insert(k0 + (0 if flipped else 1), loser)
    new_flips = frozenset(c.flips ^ {loser}) if flipped else c.flips
    if letter == "a":
        new_c = FietCombinatorics(c.n, tuple(row), c.pi1, new_flips)
    else:
        new_c = FietCombinatorics(c.n, c.pi0, tuple(row), new_flips)
    tag = ("a" if letter == "b" else "b") + ("2" if flipped else "1")
    return StepOutcome(new_c, winner, loser, tag, letter,
                       TransitionMatrix.elementary(c.n, winner, loser))


def rauzy_step(f: Fiet) -> tuple[Fiet, StepOutcome]:
    """One length-driven induction step.

    Raises :class:`KeaneViolation` when the rightmost domain and range
    subintervals have equal length (including the degenerate case where one
    label is rightmost in both rows).
    """
    top, bot = f.comb.pi0[-1], f.comb.pi1[-1]
    lt, lb = f.length_of(top), f.length_of(bot)
    if lt == lb:
        raise KeaneViolation(
            f"rightmost subintervals tie: len({top}) = len({bot}) = {lt}"
        )
    letter = "b" if lt > lb else "a"
    out = symbolic_step(f.comb, letter)
    lengths = list(f.lengths)
    lengths[out.winner - 1] -= lengths[out.loser - 1]
    return Fiet(out.new_comb, tuple(lengths)), out


@dataclass(frozen=True)
class RauzyPath:
    """A word over {'a','b'}, run-length encoded so runs may be astronomically long."""

    runs: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        merged: list[list] = []
        for letter, count in self.runs:
            if letter not in LETTERS:
                raise ValueError(f"invalid letter {letter!r}")
            count = int(count)
            if count < 0:
                raise ValueError("run counts must be >= 0")
            if count == 0:
                continue
            if merged and merged[-1][0] == letter:
                merged[-1][1] += count
            else:
                merged.append([letter, count])
        object.__setattr__(self, "runs", tuple((l, c) for l, c in merged))

    @classmethod
    def from_word(cls, word: str) -> "RauzyPath":
        return cls(tuple((ch, 1) for ch in word))

    @property
    def length(self) -> int:
        return sum(c for _, c in self.runs)

    def word(self, max_length: int = 10**6) -> str:
        if self.length > max_length:
            raise ValueError(f"path has {self.length} letters; too long to expand")
        return "".join(l * c for l, c in self.runs)

    def __add__(self, other: "RauzyPath") -> "RauzyPath":
        return RauzyPath(self.runs + other.runs)

    def repeat(self, k: int) -> "RauzyPath":
        if k < 0:
            raise ValueError("k must be >= 0")
        return RauzyPath(self.runs * k)


def _apply_run(
    c0: FietCombinatorics, letter: str, count: int
) -> tuple[FietCombinatorics, TransitionMatrix]:
    """Apply ``count`` steps of one letter, exploiting eventual periodicity.

    Combinatorial states under a fixed letter are eventually periodic; once a
    state repeats, the remaining steps are a power of the cycle's matrix.  A
    state fixed by its own step (the common case inside long runs) yields
    I + count * e_{winner,loser} without iterating.
    """
    seen = {c0: 0}
    states = [c0]
    step_mats: list[TransitionMatrix] = []
    c = c0
    t = 0
    while t < count:
        out = symbolic_step(c, letter)
        step_mats.append(out.matrix)
        c = out.new_comb
        t += 1
        if c in seen:
            i = seen[c]
            cycle_len = t - i
            remaining = count - t
            q, r = divmod(remaining, cycle_len)
            total = _product(c0.n, step_mats)
            if q:
                cycle = _product(c0.n, step_mats[i:t])
                total = total @ cycle.power(q)
            for k in range(r):
                total = total @ step_mats[i + k]
            return states[i + r], total
        seen[c] = t
        states.append(c)
    return c, _product(c0.n, step_mats)


def _product(n: int, mats: Iterable[TransitionMatrix]) -> TransitionMatrix:
    total = TransitionMatrix.identity(n)
    for m in mats:
        total = total @ m
    return total


def apply_path(
    c: FietCombinatorics, path: RauzyPath
) -> tuple[FietCombinatorics, TransitionMatrix]:
    """Thread a path through the combinatorics; returns (end state, path matrix).

    The matrix is the ordered product of the step matrices, so
    old lengths = matrix · new lengths across the whole path.
    """
    total = TransitionMatrix.identity(c.n)
    cur = c
    for letter, count in path.runs:
        cur, m = _apply_run(cur, letter, count)
        total = total @ m
    return cur, total


def path_matrix_for_power(
    c: FietCombinatorics, path: RauzyPath, k: int
) -> tuple[FietCombinatorics, TransitionMatrix]:
    """Thread ``path`` k times in a row; returns (end state, product matrix)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    total = TransitionMatrix.identity(c.n)
    cur = c
    for _ in range(k):
        cur, m = apply_path(cur, path)
        total = total @ m
    return cur, total


def induced_subpermutation(
    c: FietCombinatorics, c2: FietCombinatorics, labels: Sequence[int]
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Both rows of ``c2`` restricted to ``labels`` (relative order kept).

    ``labels`` must be a subset of the labels of both combinatorics; ``c`` is
    the state the path started from and is used only for validation.
    """
    keep = set(int(v) for v in labels)
    for name, comb in (("c", c), ("c2", c2)):
        if not keep <= set(range(1, comb.n + 1)):
            raise ValueError(f"labels {sorted(keep)} not a subset of {name}'s labels")
    return c2.restrict(sorted(keep))


def length_driven_letters(f: Fiet, steps: int) -> tuple[str, ...]:
    """The letter sequence chosen by ``steps`` length-driven induction steps."""
    letters = []
    cur = f
    for _ in range(steps):
        cur, out = rauzy_step(cur)
        letters.append(out.letter)
    return tuple(letters)
