"""Shared fixtures and the acceptance-summary terminal hook."""

from __future__ import annotations

import numpy as np
import pytest

import icelab as il

# Frozen reference strings for the three-letter worked example.
CAT_W1 = "CATATCTCATCACATATC"
CAT_W2 = "CATCACATATCCATATCT" "TCTCATCACATATCCATA" "ACATATCCATATCTCATC"

OMEGA = np.exp(2j * np.pi / 3)


@pytest.fixture(scope="session")
def cat_schedule() -> il.Schedule:
    w0 = il.word_from_text(il.DNA, "CAT")
    return il.Schedule(
        il.DNA, w0, (il.Stage(6, (0, 1, 2, 2, 0, 1)), il.Stage(3, (7, 4, 11)))
    )


@pytest.fixture(scope="session")
def cat_words(cat_schedule) -> list[il.Word]:
    return il.build_word(cat_schedule)


@pytest.fixture(scope="session")
def cat_labels() -> dict[str, complex]:
    """Cube-root labels on the three-letter alphabet (zero mean on balanced words)."""
    return {"C": 1.0 + 0j, "A": complex(OMEGA), "T": complex(OMEGA**2)}


@pytest.fixture(scope="session")
def trit_labels() -> dict[str, complex]:
    """Cube-root labels on the digit alphabet '012'."""
    return {"0": 1.0 + 0j, "1": complex(OMEGA), "2": complex(OMEGA**2)}


@pytest.fixture(scope="session")
def trit_word() -> il.Word:
    return il.word_from_text(il.Alphabet(tuple("012")), "012")


# ---------------------------------------------------------------------------
# Acceptance summary: one PASS/FAIL line per numbered criterion.
# ---------------------------------------------------------------------------

ACCEPTANCE_TITLES = {
    "test_criterion_01": "exact three-letter worked-example strings",
    "test_criterion_02": "Thue-Morse parity oracle, first 2^12 symbols",
    "test_criterion_03": "correlation recursion identity, 50 random schedules",
    "test_criterion_04": "decay exponent in [-0.65, -0.35] over >= 20 seeds",
    "test_criterion_05": "far-half simplicity diagnostic tolerances",
    "test_criterion_06": "body lower bound vs exact marking",
    "test_criterion_07": "rectangle certificates: morse betas, uniform, brute force",
    "test_criterion_08": "Parseval normalization of random polynomials",
    "test_criterion_09": "Riesz partial product vs direct spectrum oracle",
    "test_criterion_10": "exponential-frequency flatness decreases with n",
    "test_criterion_11": "jump uniformity deviation halves as q quadruples",
    "test_criterion_12": "byte-identical CSV payloads for a fixed seed",
}

_results: dict[str, tuple[str, float]] = {}


def pytest_runtest_logreport(report):
    base = report.nodeid.split("::")[-1].split("[")[0]
    if base not in ACCEPTANCE_TITLES:
        return
    if report.when == "call":
        prev = _results.get(base)
        duration = report.duration + (prev[1] if prev else 0.0)
        outcome = report.outcome
        if prev and prev[0] == "failed":
            outcome = "failed"
        _results[base] = (outcome, duration)
    elif report.when == "setup" and report.outcome != "passed":
        _results[base] = (report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(ACCEPTANCE_TITLES):
        title = ACCEPTANCE_TITLES[name]
        num = name.rsplit("_", 1)[-1]
        if name in _results:
            outcome, duration = _results[name]
            word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(
                outcome, outcome.upper()
            )
            terminalreporter.write_line(
                f"[criterion {num}] {word} ({duration:.1f}s) — {title}"
            )
        else:
            terminalreporter.write_line(f"[criterion {num}] NOT RUN — {title}")
