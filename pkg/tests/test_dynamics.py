"""Dynamics module: projections, stepping, jumps, codings, coverage, streaming."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import icelab as il
from icelab.errors import ConfigurationError


@pytest.fixture(scope="module")
def cat_chain_1(cat_schedule) -> il.ProjectionChain:
    """Chain whose top level is the 18-symbol word."""
    return il.ProjectionChain.build(cat_schedule, 1)


@pytest.fixture(scope="module")
def cat_chain_2(cat_schedule) -> il.ProjectionChain:
    """Chain whose top level is the 54-symbol word."""
    return il.ProjectionChain.build(cat_schedule, 2)


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------


def test_project_example(cat_chain_1):
    # Position 3 of the 18-symbol word sits at offset 0 of copy 1 (alpha=1).
    assert il.project(cat_chain_1, 3, 0) == 1


def test_project_letter_consistency(cat_chain_2, cat_words):
    # Every position of the 54-symbol word carries the letter of its
    # projected base position.
    for p in range(54):
        x0 = il.project(cat_chain_2, p, 0)
        assert cat_words[2].text[p] == cat_words[0].text[x0]


def test_project_all_matches_scalar(cat_chain_2):
    coords = il.project_all(cat_chain_2, 1)
    for p in range(54):
        assert coords[p] == il.project(cat_chain_2, p, 1)


def test_project_identity_at_top(cat_chain_2):
    assert np.array_equal(il.project_all(cat_chain_2, 2), np.arange(54))


def test_project_positions_streaming(cat_schedule):
    # Table-free arithmetic projection agrees with the chain tables.
    pc = il.ProjectionChain.build(cat_schedule, 2)
    pos = np.arange(54)
    got = il.project_positions(cat_schedule, pos, 2, 0)
    assert np.array_equal(got, il.project_all(pc, 0))


# ---------------------------------------------------------------------------
# Stepping and jumps
# ---------------------------------------------------------------------------


def test_step_jump_at_2(cat_chain_1):
    res = il.step(cat_chain_1, 2)
    assert res.successor == 3
    assert res.jumps == (True,)
    assert res.regular_index == 1


def test_step_no_jump_at_8(cat_chain_1):
    # Copies 2 and 3 share rotation 2, so the boundary at 8 is seamless.
    res = il.step(cat_chain_1, 8)
    assert res.successor == 9
    assert res.jumps == (False,)
    assert res.regular_index == 0


def test_jump_positions_cat(cat_chain_1):
    got = sorted(int(x) for x in il.jump_positions(cat_chain_1, 0))
    assert got == [2, 5, 11, 14, 17]


def test_jump_positions_top_stage(cat_chain_2):
    # Stage-1 rotations (7,4,11) all differ, so every copy boundary jumps.
    got = sorted(int(x) for x in il.jump_positions(cat_chain_2, 1))
    assert got == [17, 35, 53]


def test_step_cycles_whole_truncation(cat_chain_2):
    x = 0
    for _ in range(54):
        x = il.step(cat_chain_2, x).successor
    assert x == 0


def test_inverse_step(cat_chain_2):
    for x in (0, 1, 17, 53):
        assert il.inverse_step(cat_chain_2, il.step(cat_chain_2, x).successor) == x


def test_project_step_commutes_when_plain(cat_chain_2):
    h1 = 18
    coords = il.project_all(cat_chain_2, 1)
    for x in range(54):
        res = il.step(cat_chain_2, x)
        if not res.jumps[1]:
            assert coords[res.successor] == (coords[x] + 1) % h1


# ---------------------------------------------------------------------------
# Orbit codings
# ---------------------------------------------------------------------------


def test_orbit_coding_anchor(cat_chain_1):
    assert il.orbit_coding(cat_chain_1, 5, 4, 0).text == "CTCA"


def test_orbit_coding_full_cycle_is_word(cat_chain_2, cat_words):
    assert il.orbit_coding(cat_chain_2, 0, 54, 0).text == cat_words[2].text


def test_orbit_coding_regular_window_matches_rotation():
    # A window whose interior steps have no level-1 jump reads a rotation of
    # the level-1 word: the coordinate advances by one at every step, so the
    # coding is the word rotated by the starting coordinate.
    sch = il.random_schedule([4, 5], 17, il.word_from_text(il.BINARY, "0110"))
    pc = il.ProjectionChain.build(sch, 2)
    w1 = pc.word(1)
    h1 = w1.h
    jumps = set(int(x) for x in il.jump_positions(pc, 1))
    coords = il.project_all(pc, 1)
    rotations = {il.rotate(w1, a).text for a in range(h1)}
    checked = 0
    for x in range(0, pc.heights[2], h1):
        if any((x + j) % pc.heights[2] in jumps for j in range(h1 - 1)):
            continue
        coding = il.orbit_coding(pc, x, h1, 1).text
        assert coding == il.rotate(w1, int(coords[x])).text
        assert coding in rotations
        checked += 1
    assert checked > 0


# ---------------------------------------------------------------------------
# Coverage
# ---------------------------------------------------------------------------


def test_coverage_cat(cat_chain_2):
    cov = il.coverage_statistic(cat_chain_2, 0, 54)
    assert cov >= 15 / 18


def test_coverage_morse_is_one():
    sch = il.morse_schedule(2, 3, il.word_from_text(il.BINARY, "01"))
    pc = il.ProjectionChain.build(sch, 3)
    for m in (0, 1, 2):
        for k in (1, 7, 16):
            assert il.coverage_statistic(pc, m, k) == 1.0


def test_coverage_q64_exceeds_090():
    sch = il.random_schedule([64, 64, 64], 11, il.word_from_text(il.BINARY, "01"))
    pc = il.ProjectionChain.build(sch, 3)
    assert il.coverage_statistic(pc, 0, 128) >= 0.9


def test_coverage_full_sampling_ge_body():
    # With every position sampled, intact copies guarantee the body fraction.
    rng = np.random.default_rng(4)
    w0 = il.word_from_text(il.BINARY, "011")
    for _ in range(5):
        qs = [int(rng.integers(2, 6)) for _ in range(2)]
        sch = il.random_schedule(qs, int(rng.integers(0, 2**31)), w0)
        pc = il.ProjectionChain.build(sch, 2)
        h_N = pc.heights[2]
        cov = il.coverage_statistic(pc, 0, h_N)
        rep = il.body_report(sch, 0, 2)
        assert cov >= rep.exact_fraction - 1e-12


# ---------------------------------------------------------------------------
# Streaming symbols
# ---------------------------------------------------------------------------


def test_symbols_range_matches_build(cat_schedule, cat_words):
    got = il.symbols_range(cat_schedule, 2, 10, 30)
    assert np.array_equal(got, cat_words[2].symbols[10:30])


def test_symbols_range_spacer_family():
    sch = il.rank_one_schedule("staircase", [3, 3])
    words = il.build_word(sch)
    got = il.symbols_range(sch, 2, 0, words[2].h)
    assert np.array_equal(got, words[2].symbols)


def test_symbols_range_beyond_materialisation_cap():
    # h_N = 2 * 256^4 is far past the cap; streaming still reads a window.
    sch = il.random_schedule([256] * 4, 9, il.word_from_text(il.BINARY, "01"))
    window = il.symbols_range(sch, 4, 2**31, 2**31 + 16)
    assert window.shape == (16,)
    assert set(np.unique(window)) <= {0, 1}


# ---------------------------------------------------------------------------
# Guardrails and errors
# ---------------------------------------------------------------------------


def test_chain_guardrail():
    sch = il.random_schedule([256] * 4, 9, il.word_from_text(il.BINARY, "01"))
    with pytest.raises(il.ResourceRefusal):
        il.ProjectionChain.build(sch, 4)


def test_coverage_window_count_validated(cat_chain_1):
    with pytest.raises(ConfigurationError):
        il.coverage_statistic(cat_chain_1, 0, 0)
    with pytest.raises(ConfigurationError):
        il.coverage_statistic(cat_chain_1, 0, 100)


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------


@given(
    seed=st.integers(min_value=0, max_value=2**31),
    qs=st.lists(st.integers(min_value=1, max_value=5), min_size=1, max_size=3),
)
@settings(max_examples=25, deadline=None)
def test_step_properties(seed, qs):
    sch = il.random_schedule(qs, seed, il.word_from_text(il.BINARY, "011"))
    pc = il.ProjectionChain.build(sch, len(qs))
    h_N = pc.heights[pc.depth]
    # Invertibility everywhere; plain steps advance every lower level by one.
    all_coords = [il.project_all(pc, n) for n in range(pc.depth + 1)]
    for x in range(h_N):
        res = il.step(pc, x)
        assert il.inverse_step(pc, res.successor) == x
        for n in range(pc.depth):
            if not res.jumps[n]:
                assert all_coords[n][res.successor] == (all_coords[n][x] + 1) % pc.heights[n]


@given(
    seed=st.integers(min_value=0, max_value=2**31),
    qs=st.lists(st.integers(min_value=2, max_value=4), min_size=2, max_size=2),
)
@settings(max_examples=20, deadline=None)
def test_projection_tower_consistency(seed, qs):
    # Projecting in one hop agrees with two hops through the middle level.
    sch = il.random_schedule(qs, seed, il.word_from_text(il.BINARY, "0110"))
    pos = np.arange(sch.heights()[2])
    one_hop = il.project_positions(sch, pos, 2, 0)
    mid = il.project_positions(sch, pos, 2, 1)
    two_hop = il.project_positions(sch, mid, 1, 0)
    assert np.array_equal(one_hop, two_hop)
