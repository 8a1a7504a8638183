"""Shared fixtures plus the acceptance-criterion result board.

Acceptance tests register a pass/fail verdict for each numbered criterion;
the terminal summary prints one line per criterion so a full run ends with
a compact scoreboard.
"""

from __future__ import annotations

import numpy as np
import pytest

import contract_forge as cf

_CRITERIA: dict[str, tuple[bool, str]] = {}


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    _CRITERIA[name] = (passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        passed, detail = _CRITERIA[name]
        verdict = "PASS" if passed else "FAIL"
        line = f"{name} {verdict}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def economy() -> cf.ModelEconomy:
    return cf.ModelEconomy(
        accuracy=cf.AccuracySpec(k=1.0, a_opt=1.0),
        valuation=cf.ValuationSpec(slope=100.0),
    )


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260817)


def make_population(
    economy: cf.ModelEconomy,
    costs,
    probs=None,
    N: int = 4,
) -> cf.Population:
    costs = tuple(float(c) for c in costs)
    if probs is None:
        probs = tuple(1.0 / len(costs) for _ in costs)
    return cf.Population(costs=costs, probs=tuple(probs), N=N, economy=economy)


def random_population(
    rng: np.random.Generator,
    economy: cf.ModelEconomy,
    max_types: int = 4,
    max_n: int = 12,
    cost_lo: float = 0.005,
    cost_hi: float = 0.6,
) -> cf.Population:
    """Random instance with strictly decreasing costs and interior probs."""
    I = int(rng.integers(1, max_types + 1))
    N = int(rng.integers(max(2, I), max_n + 1))
    while True:
        costs = np.sort(rng.uniform(cost_lo, cost_hi, size=I))[::-1]
        if I == 1 or np.min(costs[:-1] - costs[1:]) > 1e-3:
            break
    raw = rng.uniform(0.5, 2.0, size=I)
    probs = raw / raw.sum()
    probs = probs / probs.sum()
    # nudge so the float sum is exactly renormalized
    probs = tuple(float(p) for p in probs)
    total = sum(probs)
    probs = tuple(p / total for p in probs)
    return cf.Population(
        costs=tuple(float(c) for c in costs), probs=probs, N=N, economy=economy
    )
