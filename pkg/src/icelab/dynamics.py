"""Finite-truncation dynamics via the projection chain.

The depth-``N`` truncation of a hierarchy is the cyclic shift ``x -> x + 1``
on ``Z_{h_N}``.  Each stage carries a projection ``phi_n`` sending a position
of ``W_{n+1}`` to the position of ``W_n`` it reads, ``phi_n(y*h_n + t) =
(t + a_{n,y}) mod h_n`` for pure stages; spacer positions map to a reserved
mark.  Composing projections yields every lower coordinate of a point, the
per-level jump structure of the shift, orbit codings, and the coverage
statistic (how much of the deep word is covered by rotations of a shallow
one).

Two evaluation routes are provided: a ``ProjectionChain`` with materialised
per-stage tables (fast for repeated full-cycle scans, guarded by the symbol
cap) and table-free arithmetic projection of arbitrary position subsets
(``project_positions`` / ``symbols_range``), which streams through words far
beyond the materialisation guardrail.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ResourceRefusal
from .words import MAX_MATERIAL_SYMBOLS, Schedule, Word, build_word

#: Reserved projection value for spacer positions.
SPACER_MARK = -1


def project_positions(
    schedule: Schedule, positions: np.ndarray, from_level: int, to_level: int
) -> np.ndarray:
    """Level-``to_level`` coordinates of positions given at ``from_level``.

    Pure arithmetic (no tables): works on arbitrary position subsets of
    arbitrarily tall truncations.  Spacer positions propagate the mark.
    """
    if not 0 <= to_level <= from_level <= schedule.depth:
        raise ConfigurationError(
            f"need 0 <= to_level <= from_level <= depth, got {to_level}, {from_level}"
        )
    heights = schedule.heights()
    arr = np.asarray(positions, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= heights[from_level]):
        raise ConfigurationError("positions outside the truncation")
    for n in range(from_level - 1, to_level - 1, -1):
        h = heights[n]
        starts = schedule.stage_starts(n)
        rots = schedule.rotations_mod(n)
        safe = np.maximum(arr, 0)
        y = np.searchsorted(starts, safe, side="right") - 1
        off = safe - starts[y]
        nxt = np.where(off < h, (off + rots[y]) % h, np.int64(SPACER_MARK))
        arr = np.where(arr >= 0, nxt, np.int64(SPACER_MARK))
    return arr


@dataclass(eq=False)
class ProjectionChain:
    """Per-stage projection tables ``phi_n: Z_{h_{n+1}} -> Z_{h_n} | mark``."""

    schedule: Schedule
    depth: int
    heights: list[int]
    tables: list[np.ndarray]
    _words: dict[int, Word] = field(default_factory=dict, repr=False)

    @classmethod
    def build(
        cls,
        schedule: Schedule,
        depth: int | None = None,
        *,
        max_symbols: int = MAX_MATERIAL_SYMBOLS,
        force: bool = False,
    ) -> "ProjectionChain":
        if depth is None:
            depth = schedule.depth
        if not 0 <= depth <= schedule.depth:
            raise ConfigurationError(f"depth {depth} outside [0, {schedule.depth}]")
        heights = schedule.heights()[: depth + 1]
        if heights[-1] >= max_symbols and not force:
            raise ResourceRefusal(
                f"projection tables for h_N = {heights[-1]} exceed the "
                f"{max_symbols}-symbol guardrail"
            )
        tables = [
            project_positions(schedule, np.arange(heights[n + 1], dtype=np.int64), n + 1, n)
            for n in range(depth)
        ]
        return cls(schedule=schedule, depth=depth, heights=heights, tables=tables)

    def word(self, m: int) -> Word:
        """Materialised ``W_m`` (cached; covered by the chain's guardrail)."""
        if m not in self._words:
            self._words[m] = build_word(self.schedule, m, force=True)[-1]
        return self._words[m]


@dataclass(frozen=True)
class FinitePoint:
    """A point of the depth-``level`` truncation: an index of ``Z_{h_level}``."""

    level: int
    index: int


@dataclass(frozen=True)
class StepResult:
    """Successor of a point with the per-level jump flags.

    ``jumps[n]`` is True when the level-``n`` coordinate did not advance by a
    plain ``+1`` (spacer marks always flag); ``regular_index`` is the smallest
    level without a jump (``= depth`` when every level jumps).
    """

    successor: int
    jumps: tuple[bool, ...]
    regular_index: int


def _coordinates(pc: ProjectionChain, x: int, down_to: int = 0) -> list[int]:
    """Coordinates ``x_down_to .. x_depth`` of a top-level index (marks kept)."""
    coords = [int(x)]
    for n in range(pc.depth - 1, down_to - 1, -1):
        top = coords[-1]
        coords.append(SPACER_MARK if top == SPACER_MARK else int(pc.tables[n][top]))
    coords.reverse()
    return coords


def project(pc: ProjectionChain, x: "int | FinitePoint", n: int) -> int:
    """Level-``n`` coordinate of ``x`` (an index of ``Z_{h_depth}`` by default).

    Returns ``SPACER_MARK`` for positions sitting inside a spacer run at or
    above level ``n``.  Letter consistency for pure schedules: the letter of
    ``W_N`` at ``x`` equals the letter of ``W_n`` at ``project(x, n)``.
    """
    level = pc.depth
    if isinstance(x, FinitePoint):
        level, x = x.level, x.index
    if not 0 <= n <= level <= pc.depth:
        raise ConfigurationError(f"need 0 <= n <= level <= depth, got n={n}, level={level}")
    if not 0 <= x < pc.heights[level]:
        raise ConfigurationError(f"index {x} outside Z_{pc.heights[level]}")
    val = int(x)
    for m in range(level - 1, n - 1, -1):
        if val == SPACER_MARK:
            break
        val = int(pc.tables[m][val])
    return val


def project_all(pc: ProjectionChain, n: int, level: int | None = None) -> np.ndarray:
    """Vector of level-``n`` coordinates of every position of ``Z_{h_level}``."""
    if level is None:
        level = pc.depth
    if not 0 <= n <= level <= pc.depth:
        raise ConfigurationError(f"need 0 <= n <= level <= depth, got n={n}, level={level}")
    arr = np.arange(pc.heights[level], dtype=np.int64)
    for m in range(level - 1, n - 1, -1):
        tab = pc.tables[m]
        arr = np.where(arr >= 0, tab[np.maximum(arr, 0)], np.int64(SPACER_MARK))
    return arr


def step(pc: ProjectionChain, x: int) -> StepResult:
    """Advance the truncation shift by one and flag per-level jumps."""
    h_N = pc.heights[pc.depth]
    x = int(x) % h_N
    succ = (x + 1) % h_N
    before = _coordinates(pc, x)
    after = _coordinates(pc, succ)
    jumps = []
    for n in range(pc.depth):
        a, b = before[n], after[n]
        plain = a != SPACER_MARK and b != SPACER_MARK and b == (a + 1) % pc.heights[n]
        jumps.append(not plain)
    regular = next((n for n, j in enumerate(jumps) if not j), pc.depth)
    return StepResult(successor=succ, jumps=tuple(jumps), regular_index=regular)


def inverse_step(pc: ProjectionChain, x: int) -> int:
    """Predecessor under the truncation shift (exact inverse of ``step``)."""
    h_N = pc.heights[pc.depth]
    return (int(x) - 1) % h_N


def jump_positions(pc: ProjectionChain, n: int) -> np.ndarray:
    """All positions ``p`` whose step jumps at level ``n`` (brute force)."""
    if not 0 <= n < pc.depth:
        raise ConfigurationError(f"level {n} outside [0, {pc.depth})")
    h_n = pc.heights[n]
    cur = project_all(pc, n)
    nxt = np.roll(cur, -1)
    plain = (cur != SPACER_MARK) & (nxt != SPACER_MARK) & (nxt == (cur + 1) % h_n)
    return np.nonzero(~plain)[0]


def orbit_coding(pc: ProjectionChain, start: int, length: int, m: int) -> Word:
    """Letters of ``W_m`` read along ``length`` forward steps from ``start``.

    Spacer positions contribute the alphabet's spacer symbol.  Starting at 0
    with ``length = h_N`` on a pure schedule returns ``W_N`` itself.
    """
    h_N = pc.heights[pc.depth]
    if not 1 <= length <= h_N:
        raise ConfigurationError(f"coding length {length} outside [1, {h_N}]")
    positions = (int(start) + np.arange(length, dtype=np.int64)) % h_N
    coords = project_all(pc, m)[positions]
    return _letters_at(pc, m, coords)


def _letters_at(pc: ProjectionChain, m: int, coords: np.ndarray) -> Word:
    """Letters of ``W_m`` at level-``m`` coordinates (marks -> spacer symbol)."""
    w_m = pc.word(m)
    spacer = pc.schedule.alphabet.spacer_index
    if np.any(coords == SPACER_MARK):
        if spacer is None:
            raise ConfigurationError("orbit crosses spacers but alphabet has no spacer symbol")
        letters = np.where(
            coords == SPACER_MARK, np.int32(spacer), w_m.symbols[np.maximum(coords, 0)]
        )
    else:
        letters = w_m.symbols[coords]
    return Word(pc.schedule.alphabet, letters)


def coverage_statistic(pc: ProjectionChain, m: int, windows: int) -> float:
    """Fraction of sampled aligned windows matching some rotation of ``W_m``.

    ``windows`` sample positions are taken at stride ``h_N // windows``; a
    sample ``p`` counts as covered when some length-``h_m`` window containing
    ``p`` equals one of the ``h_m`` rotations of ``W_m`` exactly.  This probes
    the intact-copy body directly: samples inside intact copies are always
    covered by their own copy's window, samples in cut scars generally are
    not, so the statistic tracks the body fraction up to boundary slack and
    accidental matches.  Cost is O(windows * h_m^2) in the worst case, so
    keep ``m`` small relative to the chain depth.
    """
    h_N = pc.heights[pc.depth]
    h_m = pc.heights[m]
    if not 1 <= windows <= h_N:
        raise ConfigurationError(f"window count {windows} outside [1, {h_N}]")
    stride = h_N // windows
    w_m = pc.word(m)
    rotations = {np.roll(w_m.symbols, -a).tobytes() for a in range(h_m)}
    coords = project_all(pc, m)
    spacer = pc.schedule.alphabet.spacer_index
    if np.any(coords == SPACER_MARK):
        if spacer is None:
            raise ConfigurationError("spacer positions need a spacer symbol to code")
        letters = np.where(
            coords == SPACER_MARK,
            np.int32(spacer),
            w_m.symbols[np.maximum(coords, 0)],
        )
    else:
        letters = w_m.symbols[coords]
    offsets = np.arange(h_m, dtype=np.int64)
    hits = 0
    for k in range(windows):
        p = k * stride
        if coords[p] == SPACER_MARK:
            continue  # spacer material belongs to no copy
        for back in range(h_m):
            window = letters[(p - back + offsets) % h_N]
            if window.tobytes() in rotations:
                hits += 1
                break
    return hits / windows


def symbols_range(schedule: Schedule, depth: int, start: int, stop: int) -> np.ndarray:
    """Symbols of ``W_depth`` on ``[start, stop)`` without materialising it.

    Streams through the arithmetic projection, so it works beyond the
    materialisation guardrail.  Pure schedules satisfy
    ``W_N[p] = W_0[project(p, 0)]``; spacer positions yield the spacer symbol.
    """
    h_N = schedule.heights()[depth]
    if not 0 <= start <= stop <= h_N:
        raise ConfigurationError("range outside the truncation")
    positions = np.arange(start, stop, dtype=np.int64)
    coords = project_positions(schedule, positions, depth, 0)
    seed = schedule.seed_word.symbols
    spacer = schedule.alphabet.spacer_index
    if np.any(coords == SPACER_MARK):
        if spacer is None:
            raise ConfigurationError("spacer positions but alphabet has no spacer symbol")
        return np.where(coords == SPACER_MARK, np.int32(spacer), seed[np.maximum(coords, 0)])
    return seed[coords]
