"""Correlation module: lifts, cyclic correlations, recursion, decay, simplicity."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import icelab as il
from icelab.errors import ConfigurationError

from conftest import OMEGA


# ---------------------------------------------------------------------------
# Lifts
# ---------------------------------------------------------------------------


def test_lift_indicator(cat_words):
    f = il.lift({"C": 1, "A": 0, "T": 0}, cat_words[0], 0)
    assert np.array_equal(f.values, np.array([1, 0, 0], dtype=complex))


def test_lift_cube_roots_zero_mean(cat_words, cat_labels):
    # Symbol counts are balanced in the 18-symbol word: mean is 0 exactly.
    f = il.lift(cat_labels, cat_words[1], 1)
    assert abs(f.values.sum()) < 1e-13


def test_lift_missing_label(cat_words):
    with pytest.raises(ConfigurationError):
        il.lift({"C": 1}, cat_words[0], 0)


def test_lift_zero_mean_flag(cat_words):
    f = il.lift({"C": 1, "A": 0, "T": 0}, cat_words[1], 1, zero_mean=True)
    assert abs(f.values.sum()) < 1e-12
    assert f.zero_mean


def test_lift_spacer_forced_zero():
    sch = il.rank_one_schedule("staircase", [3])
    w1 = il.build_word(sch)[1]
    f = il.lift({"0": 1.0}, w1, 1)
    spacer = sch.alphabet.spacer_index
    assert np.all(f.values[w1.symbols == spacer] == 0)


# ---------------------------------------------------------------------------
# Cyclic correlations
# ---------------------------------------------------------------------------


def test_correlation_at_zero_is_mean_square(cat_words, cat_labels):
    f = il.lift(cat_labels, cat_words[1], 1)
    series = il.cyclic_correlation(f)
    assert series.values[0] == pytest.approx(np.mean(np.abs(f.values) ** 2))


def test_correlation_hermitian(cat_words, cat_labels):
    f = il.lift(cat_labels, cat_words[1], 1)
    c = il.cyclic_correlation(f).values
    h = c.size
    for t in range(h):
        assert c[(-t) % h] == pytest.approx(np.conj(c[t]))


def test_fft_matches_direct(cat_words, cat_labels):
    f = il.lift(cat_labels, cat_words[2], 2)
    via_fft = il.cyclic_correlation(f, method="fft").values
    direct = il.cyclic_correlation(f, method="direct").values
    assert np.max(np.abs(via_fft - direct)) < 1e-12


def test_delta_correlation():
    w = il.word_from_text(il.DNA, "CAT")
    f = il.lift({"C": 1, "A": 0, "T": 0}, w, 0)
    c = il.cyclic_correlation(f).values
    assert np.allclose(c, [1 / 3, 0, 0])


def test_correlation_at_lags_matches_series(cat_words, cat_labels):
    f = il.lift(cat_labels, cat_words[2], 2)
    series = il.cyclic_correlation(f).values
    lags = [0, 9, 18, 53]
    got = il.correlation_at_lags(f, lags=lags)
    for lag, val in zip(lags, got):
        assert val == pytest.approx(series[lag], abs=1e-13)


def test_wiener_khinchin(cat_words, cat_labels):
    # fft of the correlation equals the normalized power spectrum.
    f = il.lift(cat_labels, cat_words[1], 1)
    c = il.cyclic_correlation(f).values
    lhs = np.fft.fft(c)
    rhs = np.abs(np.fft.fft(f.values)) ** 2 / f.values.size
    assert np.max(np.abs(lhs - rhs)) < 1e-12


# ---------------------------------------------------------------------------
# Stage recursion
# ---------------------------------------------------------------------------


def test_recursion_cat_worked_example(cat_schedule, cat_words, cat_labels):
    # C at lag 9 on the 18-symbol word equals the stage-0 recursion value,
    # which is -1/2 for cube-root labels.
    f0 = il.lift(cat_labels, cat_words[0], 0)
    series = il.cyclic_correlation(f0)
    f1 = il.lift(cat_labels, cat_words[1], 1)
    direct = il.correlation_at_lags(f1, lags=[9])[0]
    rhs = il.recursion_rhs(series, cat_schedule.stages[0], 3)
    assert direct == pytest.approx(-0.5, abs=1e-12)
    assert rhs == pytest.approx(-0.5, abs=1e-12)
    assert abs(direct - rhs) < 1e-12


def test_recursion_all_shifts_cat(cat_schedule, cat_words, cat_labels):
    f0 = il.lift(cat_labels, cat_words[0], 0)
    series = il.cyclic_correlation(f0)
    f1 = il.lift(cat_labels, cat_words[1], 1)
    st_ = cat_schedule.stages[0]
    lhs = il.correlation_at_lags(f1, lags=[3 * s for s in range(1, 6)])
    for s, left in zip(range(1, 6), lhs):
        assert abs(left - il.recursion_rhs(series, st_, s)) < 1e-12


def test_recursion_constant_rotations():
    # All rotations equal: differences vanish, rhs = C(0) for every shift.
    w0 = il.word_from_text(il.BINARY, "0110")
    sch = il.Schedule(il.BINARY, w0, (il.Stage(5, (3, 3, 3, 3, 3)),))
    labels = {"0": 1.0, "1": -1.0}
    f0 = il.lift(labels, w0, 0)
    series = il.cyclic_correlation(f0)
    f1 = il.lift(labels, il.build_word(sch)[1], 1)
    for s in range(1, 5):
        direct = il.correlation_at_lags(f1, lags=[4 * s])[0]
        rhs = il.recursion_rhs(series, sch.stages[0], s)
        assert rhs == pytest.approx(series.values[0])
        assert abs(direct - rhs) < 1e-12


def test_recursion_rejects_spacer_stage():
    sch = il.rank_one_schedule("staircase", [3])
    f = il.lift({"0": 1.0}, sch.seed_word, 0)
    series = il.cyclic_correlation(f)
    with pytest.raises(ConfigurationError):
        il.recursion_rhs(series, sch.stages[0], 1)


@given(
    seed=st.integers(min_value=0, max_value=2**31),
    h0=st.integers(min_value=2, max_value=12),
    q=st.integers(min_value=2, max_value=12),
)
@settings(max_examples=30, deadline=None)
def test_recursion_identity_property(seed, h0, q):
    rng = np.random.default_rng(seed)
    text = "".join("01"[int(b)] for b in rng.integers(0, 2, h0))
    w0 = il.word_from_text(il.BINARY, text)
    sch = il.random_schedule([q], seed, w0)
    labels = {"0": 1.0, "1": -1.0}
    f0 = il.lift(labels, w0, 0)
    series = il.cyclic_correlation(f0)
    f1 = il.lift(labels, il.build_word(sch)[1], 1)
    lhs = il.correlation_at_lags(f1, lags=[h0 * s for s in range(1, q)])
    for s, left in zip(range(1, q), lhs):
        assert abs(left - il.recursion_rhs(series, sch.stages[0], s)) < 1e-12


# ---------------------------------------------------------------------------
# Decay profiles
# ---------------------------------------------------------------------------


def test_decay_profile_fields(trit_word, trit_labels):
    sch = il.random_schedule([27, 27], 3, trit_word)
    prof = il.decay_profile(sch, trit_labels, 0, 2)
    assert len(prof.stages) == 3
    assert prof.statistic == "median"
    assert len(prof.variance_ratios) == 2
    assert prof.predicted_ratios == (2 / 27, 2 / 27)
    for s in prof.stages:
        assert s.max >= s.median >= 0


def test_decay_requires_three_stages(trit_word, trit_labels):
    sch = il.random_schedule([27], 3, trit_word)
    with pytest.raises(ConfigurationError):
        il.decay_profile(sch, trit_labels, 0, 1)


def test_decay_morse_negative_control():
    # Deterministic doubling words do not decay in sup: the half-period
    # antisymmetry keeps |C(h/2)| = 1 at every scale, so the max-statistic
    # slope is exactly zero.
    sch = il.morse_schedule(2, 8, il.word_from_text(il.BINARY, "01"))
    labels = {"0": 1.0, "1": -1.0}
    prof = il.decay_profile(sch, labels, 2, 8, statistic="max")
    for s in prof.stages:
        assert s.max == pytest.approx(1.0, abs=1e-12)
    assert abs(prof.slope) < 1e-9


def test_decay_constant_function_harmless(trit_word):
    # All labels equal: zero-mean lift kills everything; stats are zero and
    # the slope degrades to 0 rather than crashing.
    sch = il.random_schedule([9, 9], 5, trit_word)
    labels = {"0": 1.0, "1": 1.0, "2": 1.0}
    prof = il.decay_profile(sch, labels, 0, 2)
    assert prof.slope == 0.0
    for s in prof.stages:
        assert s.max == pytest.approx(0.0, abs=1e-14)


# ---------------------------------------------------------------------------
# Signed levels and the far-half diagnostic
# ---------------------------------------------------------------------------


def test_signed_levels_partition(cat_schedule):
    # Every column of the signed chart holds exactly h consecutive levels.
    for n in (0, 1):
        h = cat_schedule.heights()[n]
        signed = il.signed_levels(cat_schedule, n)
        assert signed.shape == (cat_schedule.heights()[n + 1],)
        assert np.all(signed >= -h) and np.all(signed <= h - 1)
        # per-column count: each copy contributes h consecutive signed levels
        q = cat_schedule.stages[n].q
        for y in range(q):
            col = signed[y * h: (y + 1) * h]
            assert len(np.unique(col)) == h
            assert col.max() - col.min() == h - 1


def test_simplicity_degenerate_depth(trit_word, trit_labels):
    sch = il.random_schedule([9], 2, trit_word)
    rep = il.simplicity_diagnostic(sch, trit_labels, 0, 0)
    assert rep.g2 == rep.f2
    assert rep.fg_diff2 == 0.0
    assert rep.u2 == rep.v2 == 0.0


def test_simplicity_exact_at_one_stage(trit_word, trit_labels):
    # With every stage-n copy intact, the far and reconstruction halves
    # balance exactly: |u|^2 = |v|^2 to machine precision.
    sch = il.random_schedule([9, 81], 7, trit_word)
    rep = il.simplicity_diagnostic(sch, trit_labels, 1, 2)
    assert rep.h_n == 27
    assert rep.uv_norm_gap < 1e-12


def test_simplicity_requires_odd_height(trit_word, trit_labels):
    sch = il.random_schedule([2], 1, il.word_from_text(il.BINARY, "01"))
    with pytest.raises(ConfigurationError):
        il.simplicity_diagnostic(sch, {"0": 1.0, "1": -1.0}, 1, 1)


def test_simplicity_identity_decomposition(trit_word, trit_labels):
    # g = f - u + v by construction; norms reported are consistent.
    sch = il.random_schedule([9, 27], 13, trit_word)
    rep = il.simplicity_diagnostic(sch, trit_labels, 1, 2)
    # |f - g|^2 = |u - v|^2 = u2 + v2 - 2 Re<u,v>
    assert rep.fg_diff2 == pytest.approx(
        rep.u2 + rep.v2 - 2 * rep.uv.real, abs=1e-12
    )
