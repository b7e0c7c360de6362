"""Iceberg geometry of a stage.

A pure stage presents the next word as ``q`` rotated copies of the current
one; reading the rotations as cut positions on the cycle gives the *iceberg*
cross-section: columns indexed by cut class with weights ``count / q``.  This
module measures how evenly the cuts are spread (uniformity deviation), how
the first-return (Poincaré) map moves mass between columns (jump matrix), and
how much of a deeper word consists of intact copies of a base stage (body
reports: combinatorial lower bound and exact marking).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import accumulate

import numpy as np

from .errors import ConfigurationError, ResourceRefusal
from .words import Schedule, Stage

#: Segment-marking simulations refuse beyond this many segments.
MAX_BODY_SEGMENTS = 20_000_000


# ---------------------------------------------------------------------------
# Iceberg cross-sections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Iceberg:
    """Column histogram of one stage: cut value -> copy count.

    ``counts`` maps each distinct rotation value (reduced into ``[0, h)``) to
    the number of copies using it; weights are the counts divided by ``q``,
    hence multiples of ``1/q`` summing to 1.  ``cyclic`` is False when the
    stage carries spacers (the cross-section is then only a histogram, not a
    cyclic tower).
    """

    h: int
    q: int
    counts: tuple[tuple[int, int], ...]  # sorted (cut value, count) pairs
    cyclic: bool = True

    def __post_init__(self) -> None:
        if sum(c for _, c in self.counts) != self.q:
            raise ConfigurationError("column counts must sum to q")
        if any(not 0 <= k < self.h for k, _ in self.counts):
            raise ConfigurationError("cut values must lie in [0, h)")

    @property
    def column_weight(self) -> dict[int, float]:
        return {k: c / self.q for k, c in self.counts}

    def column_weight_exact(self) -> dict[int, Fraction]:
        return {k: Fraction(c, self.q) for k, c in self.counts}


def from_stage(schedule: Schedule, n: int, *, allow_spacers: bool = False) -> Iceberg:
    """Iceberg cross-section of stage ``n``.

    Spacer stages are refused unless ``allow_spacers`` is set, in which case
    the rotation histogram is returned flagged non-cyclic.
    """
    st = schedule.stages[n]
    if not st.pure and not allow_spacers:
        raise ConfigurationError(
            f"stage {n} carries spacers; pass allow_spacers=True for the histogram"
        )
    h = schedule.height(n)
    vals, cnts = np.unique(schedule.rotations_mod(n), return_counts=True)
    counts = tuple((int(k), int(c)) for k, c in zip(vals, cnts))
    return Iceberg(h=h, q=st.q, counts=counts, cyclic=st.pure)


def uniformity_deviation(ib: Iceberg) -> float:
    """L1 distance between the column weights and the uniform law on ``Z_h``.

    Exact rational arithmetic; ranges over ``[0, 2)``.  Zero iff every cut
    class carries weight exactly ``1/h``.
    """
    dev = Fraction(0)
    present = 0
    for _, c in ib.counts:
        dev += abs(Fraction(c, ib.q) - Fraction(1, ib.h))
        present += 1
    dev += Fraction(ib.h - present, ib.h)
    return float(dev)


def poincare_permutation(st: Stage) -> np.ndarray:
    """First-return map on copy indices: ``y -> (y + 1) mod q``."""
    return (np.arange(st.q, dtype=np.int64) + 1) % st.q


# ---------------------------------------------------------------------------
# Jump matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpMatrix:
    """Transition counts between cut values along the copy order.

    Cell ``(a, b)`` counts indices ``y`` with ``rot[y] = a`` and
    ``rot[(y+1) mod q] = b`` (rotations reduced mod ``h``).  Total count is
    ``q``; the row sums reproduce the cut histogram.
    """

    h: int
    q: int
    cells: tuple[tuple[int, int, int], ...]  # sorted (a, b, count) triples

    def __post_init__(self) -> None:
        if sum(c for _, _, c in self.cells) != self.q:
            raise ConfigurationError("jump-matrix cells must sum to q")

    def row_sums(self) -> dict[int, int]:
        rows: dict[int, int] = {}
        for a, _, c in self.cells:
            rows[a] = rows.get(a, 0) + c
        return rows

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {(a, b): c for a, b, c in self.cells}


def jump_matrix(st: Stage, h: int) -> JumpMatrix:
    """Jump matrix of a stage acting at height ``h``."""
    if h < 1:
        raise ConfigurationError("height must be positive")
    al = np.asarray(st.rotations, dtype=np.int64) % h
    nxt = np.roll(al, -1)
    pairs, cnts = np.unique(np.stack([al, nxt], axis=1), axis=0, return_counts=True)
    cells = tuple((int(a), int(b), int(c)) for (a, b), c in zip(pairs, cnts))
    return JumpMatrix(h=h, q=st.q, cells=cells)


def jump_uniformity_deviation(jm: JumpMatrix) -> float:
    """Source-weighted L1 distance of the jump rows from uniform.

    ``sum_a (row_a / q) * sum_b |N[a][b]/row_a - 1/h|`` with empty rows
    skipped; exact rational arithmetic, value in ``[0, 2)``.
    """
    rows = jm.row_sums()
    by_row: dict[int, list[int]] = {a: [] for a in rows}
    for a, _, c in jm.cells:
        by_row[a].append(c)
    dev = Fraction(0)
    for a, row in rows.items():
        inner = sum(abs(Fraction(c, row) - Fraction(1, jm.h)) for c in by_row[a])
        inner += Fraction(jm.h - len(by_row[a]), jm.h)
        dev += Fraction(row, jm.q) * inner
    return float(dev)


# ---------------------------------------------------------------------------
# Body reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BodyReport:
    """Share of intact stage-``n`` copies inside ``W_{n+r}``.

    ``lower_bound`` is the recursive one-cut-per-block bound; ``exact_fraction``
    is the marked count from the cut simulation.  Always
    ``0 <= lower_bound <= exact_fraction <= 1``.
    """

    n: int
    r: int
    total_copies: int
    intact_copies: int
    lower_bound: float
    exact_fraction: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower_bound <= self.exact_fraction <= 1.0:
            raise ConfigurationError("body report out of order: lower > exact or outside [0,1]")


def body_lower_bound_counts(schedule: Schedule, n: int, r: int) -> list[int]:
    """Recursive intact-copy lower bounds ``Q^b`` for depths ``1..r``.

    ``Q^b_{n,n+1} = q_n`` and ``Q^b_{n,n+k+1} = (Q^b_{n,n+k} - 1) * q_{n+k}``
    (each deeper block severs at most one previously intact copy), clamped
    at zero.
    """
    qb = schedule.stages[n].q
    out = [qb]
    for k in range(1, r):
        qb = max(qb - 1, 0) * schedule.stages[n + k].q
        out.append(qb)
    return out


def body_report(schedule: Schedule, n: int, r: int) -> BodyReport:
    """Mark which stage-``n`` copies survive intact inside ``W_{n+r}``.

    Stages ``n .. n+r-1`` must be pure.  The word is tracked as a list of
    segments; each deeper rotation re-origins the segment cycle and severs
    the single copy its cut lands in (boundary cuts sever nothing).
    """
    if r < 1:
        raise ConfigurationError("body depth r must be >= 1")
    if n + r > schedule.depth:
        raise ConfigurationError(f"body depth {n}+{r} exceeds schedule depth {schedule.depth}")
    for m in range(n, n + r):
        if not schedule.stages[m].pure:
            raise ConfigurationError("body reports require pure stages")

    heights = schedule.heights()
    h_n = heights[n]
    total = 1
    for m in range(n, n + r):
        total *= schedule.stages[m].q

    # Segments: (length, intact-copy flag), in word order.  W_{n+1} consists of
    # q_n intact copies; every deeper stage splices rotated views of the list.
    segs: list[tuple[int, bool]] = [(h_n, True)] * schedule.stages[n].q
    for m in range(n + 1, n + r):
        h_m = heights[m]
        rots = schedule.rotations_mod(m)
        bounds = list(accumulate((L for L, _ in segs), initial=0))
        new_segs: list[tuple[int, bool]] = []
        for beta in rots:
            beta = int(beta)
            i = bisect_right(bounds, beta) - 1
            off = beta - bounds[i]
            if off == 0:
                new_segs.extend(segs[i:])
                new_segs.extend(segs[:i])
            else:
                L, _ = segs[i]
                new_segs.append((L - off, False))
                new_segs.extend(segs[i + 1:])
                new_segs.extend(segs[:i])
                new_segs.append((off, False))
        if len(new_segs) > MAX_BODY_SEGMENTS:
            raise ResourceRefusal(
                f"body simulation needs {len(new_segs)} segments; guardrail is {MAX_BODY_SEGMENTS}"
            )
        segs = new_segs

    intact = sum(1 for L, alive in segs if alive and L == h_n)
    counts = body_lower_bound_counts(schedule, n, r)
    return BodyReport(
        n=n,
        r=r,
        total_copies=total,
        intact_copies=intact,
        lower_bound=counts[-1] / total,
        exact_fraction=intact / total,
    )
