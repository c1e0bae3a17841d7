"""Exact interval exchange transformations with flips (FIETs).

An FIET is a triple (lengths, (pi0, pi1), flips): the interval [0, L) is cut
into n subintervals whose left-to-right label order is ``pi0`` in the domain
and ``pi1`` in the range; the map sends the subinterval labeled k onto the
range subinterval labeled k, translating when ``k not in flips`` and
reflecting when ``k in flips``.

All arithmetic is exact: lengths and points are ``fractions.Fraction``.
Domain subintervals are closed on the left and open on the right.  For a
flipped label the left endpoint of its domain subinterval has no image under
this convention; it is declared a discontinuity and orbits reaching it
terminate with :class:`OrbitTerminated`.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class FietError(Exception):
    """Base class for errors raised by this package."""


class DomainError(FietError):
    """A point lies outside the interval [0, L)."""


class FlipDiscontinuityError(FietError):
    """The map is undefined at the left endpoint of a flipped subinterval."""

    def __init__(self, position: Fraction, label: int):
        super().__init__(
            f"map undefined at {position}: left endpoint of flipped interval {label}"
        )
        self.position = position
        self.label = label


class OrbitTerminated(FietError):
    """An orbit reached a point where the map is undefined.

    Carries the 0-based index of the step that could not be performed, the
    terminal position, and the visit counts accumulated so far.
    """

    def __init__(self, step: int, position: Fraction, visit_counts: tuple[int, ...]):
        super().__init__(f"orbit terminated at step {step} (position {position})")
        self.step = step
        self.position = position
        self.visit_counts = visit_counts


class OracleInapplicable(FietError):
    """first_return could not represent the return map as an n-interval FIET."""


def _check_permutation(images: Sequence[int], n: int, name: str) -> tuple[int, ...]:
    images = tuple(int(v) for v in images)
    if len(images) != n or sorted(images) != list(range(1, n + 1)):
        raise ValueError(f"{name} must be a permutation of 1..{n}, got {images}")
    return images


@dataclass(frozen=True)
class FietCombinatorics:
    """Discrete part of an FIET: label orders (pi0, pi1) and the flip set."""

    n: int
    pi0: tuple[int, ...]
    pi1: tuple[int, ...]
    flips: frozenset[int]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        object.__setattr__(self, "pi0", _check_permutation(self.pi0, self.n, "pi0"))
        object.__setattr__(self, "pi1", _check_permutation(self.pi1, self.n, "pi1"))
        object.__setattr__(self, "flips", frozenset(int(v) for v in self.flips))
        if not self.flips <= set(range(1, self.n + 1)):
            raise ValueError(f"flips {set(self.flips)} not a subset of 1..{self.n}")

    @property
    def rightmost_domain_label(self) -> int:
        return self.pi0[-1]

    @property
    def rightmost_range_label(self) -> int:
        return self.pi1[-1]

    def restrict(self, labels: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Both label rows restricted to ``labels``, preserving relative order."""
        keep = set(labels)
        if not keep <= set(range(1, self.n + 1)):
            raise ValueError(f"labels {sorted(keep)} not a subset of 1..{self.n}")
        return (
            tuple(v for v in self.pi0 if v in keep),
            tuple(v for v in self.pi1 if v in keep),
        )

    def swapped(self) -> "FietCombinatorics":
        """Combinatorics of the inverse map: domain and range rows exchange."""
        return FietCombinatorics(self.n, self.pi1, self.pi0, self.flips)


@dataclass(frozen=True)
class Fiet:
    """A full FIET: combinatorics plus positive exact lengths (indexed by label)."""

    comb: FietCombinatorics
    lengths: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        lengths = tuple(Fraction(v) for v in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        if len(lengths) != self.comb.n:
            raise ValueError("lengths must have one entry per label")
        if any(v <= 0 for v in lengths):
            raise ValueError("all lengths must be positive")

    @property
    def n(self) -> int:
        return self.comb.n

    @property
    def total_length(self) -> Fraction:
        return sum(self.lengths, Fraction(0))

    def length_of(self, label: int) -> Fraction:
        return self.lengths[label - 1]

    def inverse(self) -> "Fiet":
        return Fiet(self.comb.swapped(), self.lengths)


@dataclass(frozen=True)
class OrbitPoint:
    """Result of iterating an orbit: final position and per-label visit counts."""

    position: Fraction
    visit_counts: tuple[int, ...]


def _partition(order: Sequence[int], lengths: Sequence[Fraction]):
    """Tiles [(label, lo, hi), ...] for the given label order."""
    tiles = []
    lo = Fraction(0)
    for label in order:
        hi = lo + lengths[label - 1]
        tiles.append((label, lo, hi))
        lo = hi
    return tiles


def domain_partition(f: Fiet) -> list[tuple[int, Fraction, Fraction]]:
    """Half-open domain tiles [(label, lo, hi), ...] tiling [0, L) left to right."""
    return _partition(f.comb.pi0, f.lengths)


def range_partition(f: Fiet) -> list[tuple[int, Fraction, Fraction]]:
    """Half-open range tiles [(label, lo, hi), ...] tiling [0, L) left to right."""
    return _partition(f.comb.pi1, f.lengths)


class _Tiling:
    """Binary-searchable tiling with left endpoints by label."""

    def __init__(self, tiles):
        self.tiles = tiles
        self.cuts = [t[1] for t in tiles]
        self.left = {label: lo for label, lo, _ in tiles}

    def locate(self, x: Fraction) -> tuple[int, Fraction, Fraction]:
        i = bisect_right(self.cuts, x) - 1
        return self.tiles[i]


def evaluate(f: Fiet, x: Fraction) -> Fraction:
    """Apply the map to a point of [0, L); exact.

    Raises :class:`DomainError` outside [0, L) and
    :class:`FlipDiscontinuityError` at the left endpoint of a flipped
    subinterval (where the closed-left convention leaves no image).
    """
    x = Fraction(x)
    if x < 0 or x >= f.total_length:
        raise DomainError(f"{x} outside [0, {f.total_length})")
    dom = _Tiling(domain_partition(f))
    rng = _Tiling(range_partition(f))
    return _evaluate_located(f, x, dom, rng)


def _evaluate_located(f: Fiet, x: Fraction, dom: _Tiling, rng: _Tiling) -> Fraction:
    label, u, _ = dom.locate(x)
    v = rng.left[label]
    if label in f.comb.flips:
        if x == u:
            raise FlipDiscontinuityError(x, label)
        return v + (u + f.length_of(label) - x)
    return v + (x - u)


def iterate(f: Fiet, x0: Fraction, steps: int) -> OrbitPoint:
    """Apply the map ``steps`` times from ``x0``.

    ``visit_counts[k-1]`` counts the iterates x_0 .. x_{steps-1} lying in the
    domain subinterval of label k (the final point is not counted).  If the
    orbit reaches an undefined point, raises :class:`OrbitTerminated` carrying
    the step index and partial counts.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    x = Fraction(x0)
    if x < 0 or x >= f.total_length:
        raise DomainError(f"{x} outside [0, {f.total_length})")
    dom = _Tiling(domain_partition(f))
    rng = _Tiling(range_partition(f))
    counts = [0] * f.n
    for t in range(steps):
        label, u, _ = dom.locate(x)
        try:
            nxt = _evaluate_located(f, x, dom, rng)
        except FlipDiscontinuityError:
            raise OrbitTerminated(t, x, tuple(counts)) from None
        counts[label - 1] += 1
        x = nxt
    return OrbitPoint(x, tuple(counts))


def is_irreducible(c: FietCombinatorics) -> bool:
    """True iff no proper prefix of domain labels fills a prefix of range positions."""
    seen0: set[int] = set()
    seen1: set[int] = set()
    for k in range(c.n - 1):
        seen0.add(c.pi0[k])
        seen1.add(c.pi1[k])
        if seen0 == seen1:
            return False
    return True


class _Piece:
    """A subinterval of the induced domain being tracked through the map.

    ``dom`` is its place in [0, cut) (the induced FIET's domain); ``pos`` is
    where its points currently sit; ``sign`` is +1 if orientation is
    preserved, -1 if reversed; ``rtime`` counts applications of the map;
    ``home`` is the label of the original domain tile containing ``dom``.
    """

    __slots__ = ("dom_lo", "dom_hi", "pos_lo", "pos_hi", "sign", "rtime", "home")

    def __init__(self, dom_lo, dom_hi, pos_lo, pos_hi, sign, rtime, home):
        self.dom_lo = dom_lo
        self.dom_hi = dom_hi
        self.pos_lo = pos_lo
        self.pos_hi = pos_hi
        self.sign = sign
        self.rtime = rtime
        self.home = home

    def split_at(self, c: Fraction) -> tuple["_Piece", "_Piece"]:
        """Split at position-space point c in (pos_lo, pos_hi); returns (left, right)."""
        if self.sign == 1:
            mid = self.dom_lo + (c - self.pos_lo)
            left = _Piece(self.dom_lo, mid, self.pos_lo, c, 1, self.rtime, self.home)
            right = _Piece(mid, self.dom_hi, c, self.pos_hi, 1, self.rtime, self.home)
        else:
            mid = self.dom_hi - (c - self.pos_lo)
            left = _Piece(mid, self.dom_hi, self.pos_lo, c, -1, self.rtime, self.home)
            right = _Piece(self.dom_lo, mid, c, self.pos_hi, -1, self.rtime, self.home)
        return left, right


def first_return(f: Fiet, cut: Fraction, max_applications: int = 4096) -> Fiet:
    """First-return map of f to [0, cut) as an FIET — the induction oracle.

    Independent of any induction case analysis: subintervals of [0, cut) are
    tracked geometrically through the map until every piece has returned, then
    reassembled into an n-interval FIET.  Labels are inherited from the
    original domain tile containing each piece; when a tile holds two pieces
    (one label was pushed out beyond the cut), the piece with the larger
    return time inherits the missing label.  Raises
    :class:`OracleInapplicable` whenever the data does not assemble into an
    n-interval exchange under these rules.
    """
    cut = Fraction(cut)
    L = f.total_length
    if cut == L:
        return f
    if not (0 < cut < L):
        raise DomainError(f"cut {cut} outside (0, {L}]")

    dom_tiles = domain_partition(f)
    rng_left = {label: lo for label, lo, _ in range_partition(f)}

    # Initial pieces: [0, cut) split at the original domain breakpoints.
    pieces: list[_Piece] = []
    for label, lo, hi in dom_tiles:
        if lo >= cut:
            break
        hi2 = min(hi, cut)
        pieces.append(_Piece(lo, hi2, lo, hi2, 1, 0, label))

    done: list[_Piece] = []
    budget = max_applications
    while pieces:
        if budget <= 0:
            raise OracleInapplicable("iteration budget exhausted")
        p = pieces.pop()
        if p.rtime > 0 and p.pos_hi <= cut:
            done.append(p)
            continue
        if p.pos_lo < cut < p.pos_hi:
            left, right = p.split_at(cut)
            pieces.extend((left, right))
            continue
        # Apply the map to a piece lying in a single domain tile (split if not).
        i = bisect_right([t[1] for t in dom_tiles], p.pos_lo) - 1
        label, u, hi = dom_tiles[i]
        if p.pos_hi > hi:
            left, right = p.split_at(hi)
            pieces.extend((left, right))
            continue
        budget -= 1
        lam = f.length_of(label)
        v = rng_left[label]
        if label in f.comb.flips:
            new_lo = v + (u + lam - p.pos_hi)
            new_hi = v + (u + lam - p.pos_lo)
            p.sign = -p.sign
        else:
            new_lo = v + (p.pos_lo - u)
            new_hi = v + (p.pos_hi - u)
        p.pos_lo, p.pos_hi = new_lo, new_hi
        p.rtime += 1
        pieces.append(p)

    if len(done) != f.n:
        raise OracleInapplicable(
            f"return map has {len(done)} pieces, expected {f.n}"
        )

    done.sort(key=lambda p: p.dom_lo)
    # Exact tilings of [0, cut) in both domain and final positions.
    lo = Fraction(0)
    for p in done:
        if p.dom_lo != lo:
            raise OracleInapplicable("domain pieces do not tile the cut interval")
        lo = p.dom_hi
    if lo != cut:
        raise OracleInapplicable("domain pieces do not tile the cut interval")
    lo = Fraction(0)
    for p in sorted(done, key=lambda p: p.pos_lo):
        if p.pos_lo != lo:
            raise OracleInapplicable("returned pieces do not tile the cut interval")
        lo = p.pos_hi
    if lo != cut:
        raise OracleInapplicable("returned pieces do not tile the cut interval")

    # Label assignment: inherit the home tile's label; one doubled tile hands
    # the missing label to its later-returning piece.
    by_home: dict[int, list[_Piece]] = {}
    for p in done:
        by_home.setdefault(p.home, []).append(p)
    missing = [k for k in range(1, f.n + 1) if k not in by_home]
    labels: dict[int, int] = {}
    for home, ps in by_home.items():
        if len(ps) == 1:
            labels[id(ps[0])] = home
        elif len(ps) == 2 and len(missing) == 1:
            a, b = ps
            if a.rtime == b.rtime:
                raise OracleInapplicable(
                    "cannot assign labels: equal return times in a doubled tile"
                )
            late, early = (a, b) if a.rtime > b.rtime else (b, a)
            labels[id(early)] = home
            labels[id(late)] = missing[0]
        else:
            raise OracleInapplicable(
                f"cannot assign labels: tile {home} holds {len(ps)} pieces "
                f"with {len(missing)} labels missing"
            )

    new_pi0 = tuple(labels[id(p)] for p in done)
    new_pi1 = tuple(labels[id(p)] for p in sorted(done, key=lambda p: p.pos_lo))
    new_flips = frozenset(labels[id(p)] for p in done if p.sign == -1)
    new_lengths = [Fraction(0)] * f.n
    for p in done:
        new_lengths[labels[id(p)] - 1] = p.dom_hi - p.dom_lo
    comb = FietCombinatorics(f.n, new_pi0, new_pi1, new_flips)
    return Fiet(comb, tuple(new_lengths))
