"""Rotated-word hierarchies.

A *schedule* describes how a seed word is grown through stages: stage ``n``
concatenates ``q_n`` rotated copies of the current word ``W_n`` (rotation
``rotate(W, a)[t] = W[(t + a) mod h]``), optionally padding each copy with a
run of spacer symbols.  Heights obey ``h_{n+1} = q_n * h_n + sum(spacers)``.

Pure schedules (no spacers) model cyclic iceberg towers; spacer schedules
model rank-one constructions (Ornstein-style random spacers, staircases).
The module provides the word combinatorics only — geometry, dynamics and
spectra live in the sibling modules.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, ResourceRefusal

#: Words at or above this many symbols are refused unless explicitly forced.
MAX_MATERIAL_SYMBOLS = 10_000_000

#: Default bound for the running product of finite-measure ratios
#: ``h_{n+1} / (q_n * h_n)``; schedules exceeding it fail validation.
DEFAULT_MEASURE_CAP = 1000.0


# ---------------------------------------------------------------------------
# Core data types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Alphabet:
    """A finite ordered alphabet, optionally with a designated spacer symbol.

    Symbols are arbitrary distinct strings (single characters in practice);
    words store indices into ``symbols``.  The spacer symbol, when present,
    is the letter written into spacer runs by stage concatenation.
    """

    symbols: tuple[str, ...]
    spacer_symbol: str | None = None

    def __post_init__(self) -> None:
        if len(self.symbols) < 2:
            raise ConfigurationError("alphabet needs at least two symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise ConfigurationError("alphabet symbols must be distinct")
        if self.spacer_symbol is not None and self.spacer_symbol not in self.symbols:
            raise ConfigurationError("spacer symbol must be a member of the alphabet")

    @property
    def spacer_index(self) -> int | None:
        if self.spacer_symbol is None:
            return None
        return self.symbols.index(self.spacer_symbol)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise ConfigurationError(f"symbol {symbol!r} not in alphabet") from None


@dataclass(frozen=True, eq=False)
class Word:
    """A finite word: an int index array over an alphabet.

    ``symbols`` is read-only; ``h`` is the word length (the tower height when
    the word is a stage of a hierarchy).
    """

    alphabet: Alphabet
    symbols: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.symbols, dtype=np.int32)
        if arr.ndim != 1 or arr.size == 0:
            raise ConfigurationError("a word is a non-empty 1-d symbol sequence")
        if arr.min() < 0 or arr.max() >= len(self.alphabet.symbols):
            raise ConfigurationError("word contains indices outside the alphabet")
        arr.setflags(write=False)
        object.__setattr__(self, "symbols", arr)

    @property
    def h(self) -> int:
        return int(self.symbols.size)

    @property
    def text(self) -> str:
        return "".join(self.alphabet.symbols[i] for i in self.symbols)

    def __len__(self) -> int:
        return self.h

    def __repr__(self) -> str:  # keep reprs short for long words
        body = self.text if self.h <= 40 else self.text[:37] + "..."
        return f"Word({body!r}, h={self.h})"


def word_from_text(alphabet: Alphabet, text: str) -> Word:
    """Build a word from a string of single-character symbols."""
    lookup = {s: i for i, s in enumerate(alphabet.symbols)}
    if any(len(s) != 1 for s in alphabet.symbols):
        raise ConfigurationError("word_from_text requires single-character symbols")
    try:
        idx = np.fromiter((lookup[c] for c in text), dtype=np.int32, count=len(text))
    except KeyError as exc:
        raise ConfigurationError(f"character {exc.args[0]!r} not in alphabet") from None
    return Word(alphabet, idx)


@dataclass(frozen=True)
class Stage:
    """One construction stage: ``q`` rotated copies with per-copy spacer runs.

    ``rotations[y]`` is the rotation applied to copy ``y`` (reduced mod the
    current height at application time); ``spacers[y]`` is the number of
    spacer symbols appended after copy ``y``.
    """

    q: int
    rotations: tuple[int, ...]
    spacers: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.q < 1:
            raise ConfigurationError("stage needs q >= 1")
        rot = tuple(int(a) for a in self.rotations)
        spc = tuple(int(s) for s in self.spacers) if self.spacers else (0,) * self.q
        if len(rot) != self.q:
            raise ConfigurationError("stage needs exactly q rotations")
        if len(spc) != self.q:
            raise ConfigurationError("stage needs exactly q spacer counts")
        if any(a < 0 for a in rot):
            raise ConfigurationError("rotations must be non-negative")
        if any(s < 0 for s in spc):
            raise ConfigurationError("spacer counts must be non-negative")
        object.__setattr__(self, "rotations", rot)
        object.__setattr__(self, "spacers", spc)

    @property
    def pure(self) -> bool:
        """True when the stage inserts no spacers."""
        return all(s == 0 for s in self.spacers)

    @property
    def total_spacers(self) -> int:
        return sum(self.spacers)


@dataclass(frozen=True, eq=False)
class Schedule:
    """A seed word plus a finite list of stages.

    ``family_tag`` records how the schedule was generated (``morse``,
    ``random``, ``ornstein``, ``staircase`` or ``custom``); ``rng_seed`` is
    kept for reproducibility when the stages were drawn at random.
    """

    alphabet: Alphabet
    seed_word: Word
    stages: tuple[Stage, ...]
    family_tag: str = "custom"
    rng_seed: int | None = None

    def __post_init__(self) -> None:
        if self.seed_word.alphabet != self.alphabet:
            raise ConfigurationError("seed word must use the schedule's alphabet")
        object.__setattr__(self, "stages", tuple(self.stages))

    @property
    def depth(self) -> int:
        return len(self.stages)

    def heights(self) -> list[int]:
        """Heights ``h_0 .. h_depth`` (exact integers)."""
        hs = [self.seed_word.h]
        for st in self.stages:
            hs.append(st.q * hs[-1] + st.total_spacers)
        return hs

    def height(self, n: int) -> int:
        return self.heights()[n]

    def rotations_mod(self, n: int) -> np.ndarray:
        """Stage-``n`` rotations reduced into ``[0, h_n)``."""
        h = self.height(n)
        return np.asarray(self.stages[n].rotations, dtype=np.int64) % h

    def stage_starts(self, n: int) -> np.ndarray:
        """Start offsets of the ``q_n`` copies inside ``W_{n+1}``, plus ``h_{n+1}``.

        ``starts[y] = y*h_n + sum(spacers[:y])``; length ``q_n + 1`` with the
        sentinel ``starts[q_n] = h_{n+1}``.
        """
        st = self.stages[n]
        h = self.height(n)
        lens = np.asarray([h + s for s in st.spacers], dtype=np.int64)
        return np.concatenate(([0], np.cumsum(lens)))

    def is_pure(self) -> bool:
        return all(st.pure for st in self.stages)

    def finite_measure_partial_products(self) -> list[float]:
        """Running products of ``h_{n+1} / (q_n * h_n)`` (the measure blow-up)."""
        out, prod = [], 1.0
        hs = self.heights()
        for n, st in enumerate(self.stages):
            prod *= hs[n + 1] / (st.q * hs[n])
            out.append(prod)
        return out

    def validate_measure_cap(self, cap: float = DEFAULT_MEASURE_CAP) -> None:
        prods = self.finite_measure_partial_products()
        if prods and max(prods) >= cap:
            raise ConfigurationError(
                f"finite-measure partial products reach {max(prods):.3g} >= cap {cap:g}"
            )


# ---------------------------------------------------------------------------
# Word operations
# ---------------------------------------------------------------------------


def rotate(word: Word, alpha: int) -> Word:
    """Left cyclic shift: ``rotate(W, a)[t] = W[(t + a) mod h]``.

    Requires ``0 <= alpha <= len(W)``; ``alpha == len(W)`` is the identity.
    """
    if not 0 <= alpha <= word.h:
        raise ConfigurationError(f"rotation {alpha} outside [0, {word.h}]")
    return Word(word.alphabet, np.roll(word.symbols, -alpha))


def concat_stage(word: Word, stage: Stage) -> Word:
    """Apply one stage: concatenate rotated copies with spacer runs.

    Result = ``rot(W, a_0) 1^{s_0} rot(W, a_1) 1^{s_1} ... rot(W, a_{q-1}) 1^{s_{q-1}}``
    where ``1`` is the alphabet's spacer symbol.  Rotations are reduced mod
    ``len(word)`` here, at application time.
    """
    h = word.h
    spacer = word.alphabet.spacer_index
    if any(s > 0 for s in stage.spacers) and spacer is None:
        raise ConfigurationError("stage requests spacers but alphabet has no spacer symbol")
    parts: list[np.ndarray] = []
    for y in range(stage.q):
        parts.append(np.roll(word.symbols, -(stage.rotations[y] % h)))
        s = stage.spacers[y]
        if s:
            parts.append(np.full(s, spacer, dtype=word.symbols.dtype))
    return Word(word.alphabet, np.concatenate(parts))


def build_word(
    schedule: Schedule,
    depth: int | None = None,
    *,
    max_symbols: int = MAX_MATERIAL_SYMBOLS,
    force: bool = False,
) -> list[Word]:
    """Materialise ``W_0 .. W_depth``; returns the full list of words.

    Refuses (``ResourceRefusal``) when the final height reaches
    ``max_symbols``, unless ``force`` is set.
    """
    if depth is None:
        depth = schedule.depth
    if not 0 <= depth <= schedule.depth:
        raise ConfigurationError(f"depth {depth} outside [0, {schedule.depth}]")
    h_final = schedule.heights()[depth]
    if h_final >= max_symbols and not force:
        raise ResourceRefusal(
            f"word of {h_final} symbols exceeds the {max_symbols}-symbol guardrail"
        )
    words = [schedule.seed_word]
    for n in range(depth):
        words.append(concat_stage(words[-1], schedule.stages[n]))
    return words


def subword_distribution(word: Word, length: int) -> dict[str, Fraction]:
    """Exact frequencies of length-``length`` subwords over the linear windows.

    There are ``h - length + 1`` windows (no wrap-around); frequencies are
    exact rationals summing to 1.  Keys are the joined symbol strings.
    """
    h = word.h
    if not 1 <= length <= h:
        raise ConfigurationError(f"subword length {length} outside [1, {h}]")
    windows = np.lib.stride_tricks.sliding_window_view(word.symbols, length)
    uniq, counts = np.unique(windows, axis=0, return_counts=True)
    total = h - length + 1
    out: dict[str, Fraction] = {}
    for row, c in zip(uniq, counts):
        key = "".join(word.alphabet.symbols[i] for i in row)
        out[key] = Fraction(int(c), total)
    return out


# ---------------------------------------------------------------------------
# Schedule families
# ---------------------------------------------------------------------------

#: Convenient default alphabets.
BINARY = Alphabet(("0", "1"))
BINARY_SPACER = Alphabet(("0", "1"), spacer_symbol="1")
DNA = Alphabet(("A", "C", "G", "T"))


def morse_schedule(r: int, depth: int, seed_word: Word) -> Schedule:
    """Generalised Morse schedule: ``q_n = r`` and rotations ``y * h_n / r``.

    Requires ``r >= 2`` and ``r | len(seed_word)`` (then ``r | h_n`` at every
    stage).  With seed ``01`` and ``r = 2`` this produces the Prouhet-Thue-
    Morse words.
    """
    if r < 2:
        raise ConfigurationError("morse family needs r >= 2")
    if seed_word.h % r != 0:
        raise ConfigurationError(f"r = {r} must divide the seed length {seed_word.h}")
    stages = []
    h = seed_word.h
    for _ in range(depth):
        stages.append(Stage(q=r, rotations=tuple((y * h) // r for y in range(r))))
        h *= r
    return Schedule(seed_word.alphabet, seed_word, tuple(stages), family_tag="morse")


def random_schedule(qs: Sequence[int], seed: int, seed_word: Word) -> Schedule:
    """Pure schedule with i.i.d. uniform rotations on ``[0, h_n)``.

    Deterministic for a given seed: stage ``n`` draws from
    ``numpy.random.default_rng([seed, n])`` so stages are independent and the
    split is reproducible.
    """
    stages = []
    h = seed_word.h
    for n, q in enumerate(qs):
        if q < 1:
            raise ConfigurationError("random stage needs q >= 1")
        rng = np.random.default_rng([int(seed), n])
        rot = rng.integers(0, h, size=int(q))
        stages.append(Stage(q=int(q), rotations=tuple(int(a) for a in rot)))
        h *= int(q)
    return Schedule(
        seed_word.alphabet, seed_word, tuple(stages), family_tag="random", rng_seed=int(seed)
    )


def rank_one_schedule(
    kind: str,
    qs: Sequence[int],
    *,
    seed_word: Word | None = None,
    seed: int | None = None,
    ratio: int = 4,
    measure_cap: float = DEFAULT_MEASURE_CAP,
) -> Schedule:
    """Rank-one spacer families: all rotations zero, structure in the spacers.

    ``kind = "staircase"``: stage ``n`` uses spacers ``(0, 1, ..., q_n - 1)``.
    ``kind = "ornstein"``: stage ``n`` draws ``q_n + 1`` i.i.d. uniform integers
    on ``[0, h_n // ratio]``, sorts them, and uses the successive differences
    as spacers (hence ``s >= 0`` always, and ``s = 0`` when all draws tie).

    The seed defaults to the single-letter word ``0`` over the binary alphabet
    with spacer symbol ``1``.  The finite-measure partial products are
    validated against ``measure_cap``.
    """
    if seed_word is None:
        seed_word = word_from_text(BINARY_SPACER, "0")
    if seed_word.alphabet.spacer_symbol is None:
        raise ConfigurationError("rank-one schedules need an alphabet with a spacer symbol")
    stages = []
    h = seed_word.h
    running = 1.0
    for n, q in enumerate(qs):
        q = int(q)
        if q < 1:
            raise ConfigurationError("rank-one stage needs q >= 1")
        if kind == "staircase":
            spc = tuple(range(q))
        elif kind == "ornstein":
            if seed is None:
                raise ConfigurationError("ornstein family needs an rng seed")
            if ratio < 1:
                raise ConfigurationError("ornstein family needs ratio >= 1")
            alpha_max = h // ratio
            rng = np.random.default_rng([int(seed), n])
            draws = np.sort(rng.integers(0, alpha_max + 1, size=q + 1))
            spc = tuple(int(s) for s in np.diff(draws))
            if any(s < 0 for s in spc):  # impossible after sorting; guards the rule
                raise ConfigurationError("spacer rule produced a negative spacer")
        else:
            raise ConfigurationError(f"unknown rank-one family {kind!r}")
        stages.append(Stage(q=q, rotations=(0,) * q, spacers=spc))
        h_next = q * h + sum(spc)
        running *= h_next / (q * h)
        if running > measure_cap:
            raise ConfigurationError(
                f"spacer mass after stage {n} inflates the measure by {running:.3g}"
                f" > cap {measure_cap}; thin the spacers or raise measure_cap"
            )
        h = h_next
    sch = Schedule(
        seed_word.alphabet,
        seed_word,
        tuple(stages),
        family_tag=kind,
        rng_seed=None if seed is None else int(seed),
    )
    sch.validate_measure_cap(measure_cap)
    return sch


# ---------------------------------------------------------------------------
# Serialisation and hashing
# ---------------------------------------------------------------------------


def schedule_to_dict(schedule: Schedule) -> dict:
    """Canonical JSON-ready dict (fixed field order, integers only)."""
    return {
        "alphabet": {
            "symbols": list(schedule.alphabet.symbols),
            "spacer_symbol": schedule.alphabet.spacer_symbol,
        },
        "seed_word": schedule.seed_word.text,
        "stages": [
            {
                "q": st.q,
                "rotations": [int(a) for a in st.rotations],
                "spacers": [int(s) for s in st.spacers],
            }
            for st in schedule.stages
        ],
        "family_tag": schedule.family_tag,
        "rng_seed": schedule.rng_seed,
    }


def schedule_to_json(schedule: Schedule) -> str:
    """Canonical compact JSON text (stable bytes for hashing)."""
    return json.dumps(schedule_to_dict(schedule), separators=(",", ":"))


def schedule_from_dict(data: Mapping) -> Schedule:
    try:
        alpha = Alphabet(
            tuple(data["alphabet"]["symbols"]), data["alphabet"].get("spacer_symbol")
        )
        seed = word_from_text(alpha, data["seed_word"])
        stages = tuple(
            Stage(
                q=int(st["q"]),
                rotations=tuple(int(a) for a in st["rotations"]),
                spacers=tuple(int(s) for s in st.get("spacers", [])),
            )
            for st in data["stages"]
        )
        tag = data.get("family_tag", "custom")
        rng_seed = data.get("rng_seed")
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"malformed schedule document: {exc}") from exc
    return Schedule(alpha, seed, stages, family_tag=tag,
                    rng_seed=None if rng_seed is None else int(rng_seed))


def schedule_from_json(text: str) -> Schedule:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"schedule is not valid JSON: {exc}") from exc
    return schedule_from_dict(data)


def schedule_hash(schedule: Schedule) -> str:
    """SHA-256 of the canonical JSON; stable across runs and platforms."""
    return hashlib.sha256(schedule_to_json(schedule).encode("utf-8")).hexdigest()


def save_schedule(schedule: Schedule, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(schedule_to_json(schedule))
        fh.write("\n")


def load_schedule(path) -> Schedule:
    with open(path, "r", encoding="utf-8") as fh:
        return schedule_from_json(fh.read())
