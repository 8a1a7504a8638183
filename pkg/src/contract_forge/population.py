"""Participant populations and exact expectation over type realizations.

A population draws N participants whose private types follow a multinomial
distribution over I cost levels.  Expectations are computed by exhaustive
enumeration of all count vectors, never by sampling, because the audit
checks downstream are equality-sensitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, EnumerationCapError
from .model import ModelEconomy

__all__ = [
    "Population",
    "Realization",
    "OutcomeTable",
    "enumerate_realizations",
    "outcome_table",
    "expect",
    "expect_conditional",
]

DEFAULT_ENUM_CAP = 10**6


@dataclass(frozen=True)
class Population:
    """Participant pool: N draws over I cost types with known frequencies."""

    costs: tuple[float, ...]
    probs: tuple[float, ...]
    N: int
    economy: ModelEconomy

    def __post_init__(self) -> None:
        if len(self.costs) == 0:
            raise DomainError("at least one type is required")
        if len(self.costs) != len(self.probs):
            raise DomainError(
                f"{len(self.costs)} costs but {len(self.probs)} probabilities"
            )
        if not isinstance(self.N, int) or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N}")
        for c in self.costs:
            if not (math.isfinite(c) and c > 0.0):
                raise DomainError(f"costs must be positive reals, got {c}")
        for hi, lo in zip(self.costs, self.costs[1:]):
            if not hi > lo:
                raise DomainError(
                    f"costs must be strictly decreasing; got {hi} before {lo}"
                )
        for p in self.probs:
            if not (math.isfinite(p) and 0.0 < p <= 1.0):
                raise DomainError(f"type probabilities must lie in (0, 1], got {p}")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise DomainError(
                f"type probabilities must sum to 1, got {math.fsum(self.probs)}"
            )

    @property
    def I(self) -> int:
        return len(self.costs)

    def realization_count(self) -> int:
        return math.comb(self.N + self.I - 1, self.I - 1)


@dataclass(frozen=True)
class Realization:
    """One count vector over types, with its multinomial probability."""

    counts: tuple[int, ...]
    probability: float


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class OutcomeTable:
    """All realizations of a population, with vectorized count/pmf arrays."""

    def __init__(self, pop: Population, counts: np.ndarray, pmf: np.ndarray):
        self.population = pop
        self.counts = counts
        self.pmf = pmf
        self.counts.setflags(write=False)
        self.pmf.setflags(write=False)

    @cached_property
    def realizations(self) -> list[Realization]:
        return [
            Realization(tuple(int(c) for c in row), float(p))
            for row, p in zip(self.counts, self.pmf)
        ]

    def mask(self, i: int) -> np.ndarray:
        """Boolean selector for realizations where type i is present."""
        return self.counts[:, i] >= 1

    def presence_probability(self, i: int) -> float:
        """P(at least one participant of type i shows up)."""
        p = self.population.probs[i]
        return -math.expm1(self.population.N * math.log1p(-p)) if p < 1.0 else 1.0


def enumerate_realizations(
    pop: Population, cap: int = DEFAULT_ENUM_CAP
) -> OutcomeTable:
    """Exhaustively list every count vector with its exact probability.

    Count vectors appear in ascending lexicographic order.  Refuses to
    build tables larger than the cap so the combinatorial wall surfaces as
    an error instead of a hang.
    """
    count = pop.realization_count()
    if count > cap:
        raise EnumerationCapError(count, cap)
    counts = np.array(list(_compositions(pop.N, pop.I)), dtype=np.int64)
    log_p = np.log(np.asarray(pop.probs, dtype=float))
    log_pmf = (
        gammaln(pop.N + 1)
        - gammaln(counts + 1).sum(axis=1)
        + counts @ log_p
    )
    return OutcomeTable(pop, counts, np.exp(log_pmf))


@lru_cache(maxsize=256)
def outcome_table(pop: Population, cap: int = DEFAULT_ENUM_CAP) -> OutcomeTable:
    """Cached enumeration; populations are immutable so reuse is safe."""
    return enumerate_realizations(pop, cap)


def _checked_values(
    table: OutcomeTable, g: Callable[[tuple[int, ...]], float]
) -> list[float]:
    values = []
    for real in table.realizations:
        val = float(g(real.counts))
        if not math.isfinite(val):
            raise DomainError(
                f"functional returned non-finite value {val} at realization "
                f"{real.counts}"
            )
        values.append(val)
    return values


def expect(table: OutcomeTable, g: Callable[[tuple[int, ...]], float]) -> float:
    """Expectation of g(counts) over the full realization table."""
    values = _checked_values(table, g)
    return math.fsum(p * v for p, v in zip(table.pmf, values))


def expect_conditional(
    table: OutcomeTable, i: int, g: Callable[[tuple[int, ...]], float]
) -> float:
    """Expectation of g(counts) given at least one type-i participant."""
    if not 0 <= i < table.population.I:
        raise DomainError(f"type index {i} out of range")
    values = _checked_values(table, g)
    mask = table.mask(i)
    total = math.fsum(
        p * v for p, v, keep in zip(table.pmf, values, mask) if keep
    )
    return total / table.presence_probability(i)
