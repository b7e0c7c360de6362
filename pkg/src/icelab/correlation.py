"""Level functions, cyclic correlations, decay profiles, and the
far-half (simplicity) diagnostic.

A complex labelling of the alphabet lifts to a *level function* on each word;
the cyclic correlation ``C(t) = (1/h) sum_j f(j) conj(g(j-t))`` measures how
the shift mixes it.  For pure stages the next stage's correlations at lags
``s * h_n`` satisfy an exact averaging recursion over rotation differences,
which drives the square-root decay of correlations for fast-growing random
schedules.

The far-half diagnostic compares a lifted function ``f`` with its
reconstruction ``g`` from base-level returns: ``g = sum_{|j| <= (h-1)/2}
f_(n)(j) * T^j b_n`` where ``b_n`` is the indicator of the base level.  The
remainder splits as ``g = f - u + v`` with ``u`` the restriction of ``f`` to
the far half of the signed-level chart; the report carries all seven inner
products of the decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dynamics import ProjectionChain, project_all
from .errors import ConfigurationError
from .words import MAX_MATERIAL_SYMBOLS, Schedule, Word, build_word

#: Zero-mean lift tolerance: |sum of values| <= ZERO_MEAN_TOL * h.
ZERO_MEAN_TOL = 1e-12


# ---------------------------------------------------------------------------
# Level functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LevelFunction:
    """A complex function on ``Z_{h_n}`` lifted from alphabet labels.

    Spacer positions carry the value 0.  When ``zero_mean`` is set the values
    sum to (numerically) zero.
    """

    n: int
    values: np.ndarray
    zero_mean: bool = False

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.ndim != 1 or vals.size == 0:
            raise ConfigurationError("level function needs a non-empty 1-d value vector")
        if self.zero_mean and abs(vals.sum()) > ZERO_MEAN_TOL * vals.size:
            raise ConfigurationError("zero_mean flag set but values do not sum to zero")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def h(self) -> int:
        return int(self.values.size)


def lift(
    labels: Mapping[str, complex], word: Word, n: int, *, zero_mean: bool = False
) -> LevelFunction:
    """Lift alphabet labels to a level function on a word.

    Every non-spacer symbol occurring in the word must be labelled; spacer
    positions are forced to 0.  With ``zero_mean`` the mean over non-spacer
    positions is subtracted there (spacers stay 0, the total sum becomes 0).
    """
    alpha = word.alphabet
    spacer = alpha.spacer_index
    table = np.zeros(len(alpha.symbols), dtype=np.complex128)
    labelled = np.zeros(len(alpha.symbols), dtype=bool)
    for sym, val in labels.items():
        idx = alpha.index(sym)
        table[idx] = complex(val)
        labelled[idx] = True
    if spacer is not None:
        table[spacer] = 0.0
        labelled[spacer] = True
    present = np.unique(word.symbols)
    missing = [alpha.symbols[i] for i in present if not labelled[i]]
    if missing:
        raise ConfigurationError(f"labels missing for symbols {missing!r}")
    values = table[word.symbols]
    if zero_mean:
        if spacer is None:
            values = values - values.mean()
        else:
            mask = word.symbols != spacer
            if mask.any():
                values = np.where(mask, values - values[mask].mean(), 0.0)
    return LevelFunction(n=n, values=values, zero_mean=zero_mean)


# ---------------------------------------------------------------------------
# Cyclic correlations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CorrelationSeries:
    """``C(t) = (1/h) sum_j f(j) conj(g(j-t))`` for all ``t`` in ``Z_h``."""

    n: int
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.complex128)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def h(self) -> int:
        return int(self.values.size)


def cyclic_correlation(
    f: LevelFunction, g: LevelFunction | None = None, *, method: str = "fft"
) -> CorrelationSeries:
    """Full correlation series of two level functions at the same stage.

    The transform route computes ``ifft(fft(f) * conj(fft(g))) / h``; the
    direct route evaluates the defining O(h^2) sum and serves as the oracle
    (the two agree to 1e-10 relative).
    """
    if g is None:
        g = f
    if f.n != g.n or f.h != g.h:
        raise ConfigurationError("correlation needs two functions at the same stage")
    h = f.h
    if method == "fft":
        cross = np.fft.fft(f.values) * np.conj(np.fft.fft(g.values))
        vals = np.fft.ifft(cross) / h
    elif method == "direct":
        vals = np.array(
            [np.vdot(np.roll(g.values, t), f.values) for t in range(h)],
            dtype=np.complex128,
        ) / h
    else:
        raise ConfigurationError(f"unknown correlation method {method!r}")
    return CorrelationSeries(n=f.n, values=vals)


def correlation_at_lags(
    f: LevelFunction, g: LevelFunction | None = None, lags: Sequence[int] = ()
) -> np.ndarray:
    """Exact per-lag correlations (direct inner products, no transform)."""
    if g is None:
        g = f
    if f.n != g.n or f.h != g.h:
        raise ConfigurationError("correlation needs two functions at the same stage")
    h = f.h
    out = np.empty(len(lags), dtype=np.complex128)
    for i, t in enumerate(lags):
        out[i] = np.vdot(np.roll(g.values, int(t) % h), f.values) / h
    return out


def recursion_rhs(series: CorrelationSeries, stage, s: int) -> complex:
    """Stage-recursion right-hand side ``(1/q) sum_y C(rot_y - rot_{y-s})``.

    For pure stages this equals the next stage's correlation at lag
    ``s * h_n`` exactly.  Spacer stages are unsupported (the identity fails;
    correlate directly instead).
    """
    if not stage.pure:
        raise ConfigurationError("recursion_rhs supports pure stages only")
    if not 1 <= s <= stage.q - 1:
        raise ConfigurationError(f"shift s={s} outside [1, {stage.q - 1}]")
    h = series.h
    rots = np.asarray(stage.rotations, dtype=np.int64) % h
    diffs = (rots - np.roll(rots, s)) % h
    return complex(series.values[diffs].mean())


# ---------------------------------------------------------------------------
# Decay profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageDecay:
    """Statistics of ``|C_n(t)|`` over the central window ``[h/4, 3h/4]``."""

    n: int
    h: int
    max: float
    median: float
    rms: float
    variance: float


@dataclass(frozen=True)
class DecayProfile:
    """Per-stage decay statistics plus the log-log slope of the median.

    ``variance_ratios[k]`` is the measured ``Var C_{n+1} / Var C_n`` between
    consecutive reported stages; ``predicted_ratios`` is the doubling
    prediction ``2 / q_n`` for pure stages.
    """

    stages: tuple[StageDecay, ...]
    slope: float
    statistic: str
    variance_ratios: tuple[float, ...]
    predicted_ratios: tuple[float, ...]


def decay_profile(
    schedule: Schedule,
    labels: Mapping[str, complex],
    n_lo: int,
    n_hi: int,
    *,
    window: tuple[float, float] = (0.25, 0.75),
    statistic: str = "median",
    max_symbols: int = MAX_MATERIAL_SYMBOLS,
    force: bool = False,
) -> DecayProfile:
    """Correlation decay across stages ``n_lo .. n_hi`` (inclusive).

    Labels are lifted with mean subtraction (a no-op when they are already
    zero-mean).  Requires a pure schedule and at least three stages for the
    least-squares fit of ``log statistic`` against ``log h_n``.
    """
    if n_hi - n_lo + 1 < 3:
        raise ConfigurationError("decay fit needs at least 3 stages")
    if not 0 <= n_lo < n_hi <= schedule.depth:
        raise ConfigurationError(f"stage range [{n_lo}, {n_hi}] outside the schedule")
    for m in range(n_lo, n_hi):
        if not schedule.stages[m].pure:
            raise ConfigurationError("decay profiles require pure stages")
    if statistic not in ("max", "median", "rms"):
        raise ConfigurationError(f"unknown statistic {statistic!r}")
    lo_frac, hi_frac = window
    if not 0.0 <= lo_frac < hi_frac <= 1.0:
        raise ConfigurationError("window fractions must satisfy 0 <= lo < hi <= 1")

    words = build_word(schedule, n_hi, max_symbols=max_symbols, force=force)
    rows = []
    for n in range(n_lo, n_hi + 1):
        f = lift(labels, words[n], n, zero_mean=True)
        series = cyclic_correlation(f).values
        h = f.h
        sel = np.abs(series[int(h * lo_frac): int(h * hi_frac) + 1])
        rows.append(
            StageDecay(
                n=n,
                h=h,
                max=float(sel.max()),
                median=float(np.median(sel)),
                rms=float(np.sqrt(np.mean(sel**2))),
                variance=float(np.mean(sel**2)),
            )
        )

    stat = np.array([getattr(r, statistic) for r in rows])
    logh = np.log([r.h for r in rows])
    if np.any(stat <= 0):
        slope = 0.0  # degenerate (identically zero statistics): no decay to fit
    else:
        slope = float(np.polyfit(logh, np.log(stat), 1)[0])
    ratios = tuple(
        float(rows[k + 1].variance / rows[k].variance) if rows[k].variance > 0 else float("inf")
        for k in range(len(rows) - 1)
    )
    predicted = tuple(2.0 / schedule.stages[n].q for n in range(n_lo, n_hi))
    return DecayProfile(
        stages=tuple(rows),
        slope=slope,
        statistic=statistic,
        variance_ratios=ratios,
        predicted_ratios=predicted,
    )


# ---------------------------------------------------------------------------
# Far-half (simplicity) diagnostic
# ---------------------------------------------------------------------------


def signed_levels(schedule: Schedule, n: int) -> np.ndarray:
    """Signed chart levels of every position of ``W_{n+1}`` for a pure stage.

    A copy rotated by ``a`` has cut class ``k = a`` (or ``h`` when ``a = 0``)
    and spans signed levels ``[k - h, k - 1]``; the position at in-copy offset
    ``t`` sits at level ``t + a - h*[a >= 1]``.  Reducing mod ``h`` recovers
    the plain level ``(t + a) mod h``.
    """
    st = schedule.stages[n]
    if not st.pure:
        raise ConfigurationError("signed levels are defined for pure stages")
    h = schedule.height(n)
    rots = schedule.rotations_mod(n)
    p = np.arange(schedule.height(n + 1), dtype=np.int64)
    t = p % h
    a = rots[p // h]
    return t + a - h * (a >= 1)


@dataclass(frozen=True)
class SimplicityReport:
    """Inner products of the far-half decomposition ``g = f - u + v``.

    All quantities are exact averages over ``Z_{h_N}``: ``f`` is the lifted
    stage-``n`` function read through the projection, ``g`` its base-return
    reconstruction from the half-window of radius ``(h_n - 1)/2``, ``u`` the
    far-half restriction of ``f``, and ``v = g - f + u``.
    """

    n: int
    depth: int
    h_n: int
    h_N: int
    f2: float
    g2: float
    fg_diff2: float
    u2: float
    v2: float
    uv: complex
    fv: complex

    @property
    def fg_ratio(self) -> float:
        """``|f - g|^2 / |f|^2``."""
        return self.fg_diff2 / self.f2

    @property
    def g_ratio(self) -> float:
        """``|g|^2 / |f|^2``."""
        return self.g2 / self.f2

    @property
    def uv_ratio(self) -> float:
        """``|<u, v>| / |f|^2``."""
        return abs(self.uv) / self.f2

    @property
    def fv_ratio(self) -> float:
        """``|<f, v>| / |f|^2``."""
        return abs(self.fv) / self.f2

    @property
    def uv_norm_gap(self) -> float:
        """Relative gap ``| |u|^2 - |v|^2 | / |u|^2`` (0 when both vanish)."""
        if self.u2 == 0.0 and self.v2 == 0.0:
            return 0.0
        return abs(self.u2 - self.v2) / max(self.u2, self.v2)


def simplicity_diagnostic(
    schedule: Schedule,
    labels: Mapping[str, complex],
    n: int,
    depth: int,
    *,
    max_symbols: int = MAX_MATERIAL_SYMBOLS,
    force: bool = False,
) -> SimplicityReport:
    """Far-half diagnostic of stage ``n`` on the depth-``depth`` truncation.

    Preconditions: ``h_n`` odd, ``depth >= n``, pure stages throughout
    ``[n, depth)``, and zero-mean labels (mean subtraction is applied).
    ``depth = n`` returns the degenerate exact report (``g = f``,
    ``u = v = 0``).
    """
    if not 0 <= n <= depth <= schedule.depth:
        raise ConfigurationError(f"need 0 <= n <= depth <= {schedule.depth}")
    heights = schedule.heights()
    h = heights[n]
    if h % 2 == 0:
        raise ConfigurationError(f"far-half diagnostic needs odd h_n, got {h}")
    for m in range(n, depth):
        if not schedule.stages[m].pure:
            raise ConfigurationError("far-half diagnostic requires pure stages")

    words = build_word(schedule, n, max_symbols=max_symbols, force=True)
    fn = lift(labels, words[n], n, zero_mean=True).values
    f2_level = float(np.mean(np.abs(fn) ** 2))

    if depth == n:
        return SimplicityReport(
            n=n, depth=depth, h_n=h, h_N=h,
            f2=f2_level, g2=f2_level, fg_diff2=0.0,
            u2=0.0, v2=0.0, uv=0j, fv=0j,
        )

    pc = ProjectionChain.build(schedule, depth, max_symbols=max_symbols, force=force)
    h_N = pc.heights[depth]
    x_n = project_all(pc, n)
    f = fn[x_n]

    # Reconstruction from base returns: g = sum_{|j| <= w} f_(n)(j) T^j b_n,
    # scattered from the base positions {p : x_n(p) = 0}.
    w = (h - 1) // 2
    bases = np.nonzero(x_n == 0)[0]
    g = np.zeros(h_N, dtype=np.complex128)
    for j in range(-w, w + 1):
        g[(bases + j) % h_N] += fn[j % h]

    # Far half: positions whose signed chart level falls outside [-w, w].
    x_n1 = project_all(pc, n + 1)
    rots = schedule.rotations_mod(n)
    t = x_n1 % h
    a = rots[x_n1 // h]
    signed = t + a - h * (a >= 1)
    far = np.abs(signed) > w

    u = np.where(far, f, 0.0)
    v = g - f + u
    # Decomposition sanity: g = f - u + v up to float re-association.
    assert np.allclose(g, f - u + v, rtol=1e-12, atol=1e-12)

    def avg(x: np.ndarray, y: np.ndarray) -> complex:
        return complex(np.vdot(y, x) / h_N)

    return SimplicityReport(
        n=n,
        depth=depth,
        h_n=h,
        h_N=h_N,
        f2=avg(f, f).real,
        g2=avg(g, g).real,
        fg_diff2=avg(f - g, f - g).real,
        u2=avg(u, u).real,
        v2=avg(v, v).real,
        uv=avg(u, v),
        fv=avg(f, v),
    )
