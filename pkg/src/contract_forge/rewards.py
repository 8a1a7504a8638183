"""Realization-dependent rewards from a first-moment menu.

The menu fixes only expected reward values.  The proportional rule turns
them into per-realization model rewards by scaling the collectively
trained model's value by the ratio of the promised expectation to the
conditional expected value of that collective model, which preserves the
expectations and never awards a model better than the collective one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ContractViolationError, DomainError
from .model import accuracy, valuation_inverse
from .population import DEFAULT_ENUM_CAP, Population, outcome_table
from .solver import ContractMenu

__all__ = ["RealizedRewards", "expected_bound", "expected_bounds", "assign"]

_ZERO_TOL = 1e-12
_VIOLATION_TOL = 1e-6


@dataclass(frozen=True)
class RealizedRewards:
    """Per-type accuracy rewards for one realized count vector."""

    counts: tuple[int, ...]
    rewards: tuple[float, ...]
    collective_accuracy: float


@lru_cache(maxsize=1024)
def expected_bounds(
    pop: Population, menu: ContractMenu, cap: int = DEFAULT_ENUM_CAP
) -> tuple[float, ...]:
    """Conditional expected collective values, one entry per type.

    Cached because assigning rewards realization by realization reuses the
    same bounds for every count vector of an instance.
    """
    table = outcome_table(pop, cap)
    m = np.asarray(menu.contributions, dtype=float)
    totals = table.counts @ m
    a_vals = accuracy(pop.economy, totals)
    weighted = table.pmf * a_vals
    slope = pop.economy.valuation.slope
    out = []
    for i in range(pop.I):
        mask = table.mask(i)
        out.append(
            slope
            * math.fsum(weighted[mask].tolist())
            / table.presence_probability(i)
        )
    return tuple(out)


def expected_bound(
    pop: Population, menu: ContractMenu, i: int, cap: int = DEFAULT_ENUM_CAP
) -> float:
    """Conditional expected value of the collective model, given type i present.

    This is the ceiling on the expected reward value the menu may promise
    to type i.
    """
    if not 0 <= i < pop.I:
        raise DomainError(f"type index {i} out of range")
    return float(expected_bounds(pop, menu, cap)[i])


def assign(
    pop: Population,
    menu: ContractMenu,
    counts: Sequence[int],
    cap: int = DEFAULT_ENUM_CAP,
) -> RealizedRewards:
    """Proportional reward assignment for one realized count vector.

    Each type's reward accuracy solves v(r) = (t_i / bound_i) * v(collective),
    so conditional expectations recover the menu exactly while every
    realized reward stays below the collective accuracy.  A promised value
    above its bound means the menu itself violates the first-moment budget
    and is rejected.
    """
    counts = tuple(int(c) for c in counts)
    if len(counts) != pop.I:
        raise DomainError(f"expected {pop.I} counts, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise DomainError("counts must be nonnegative")
    if sum(counts) != pop.N:
        raise DomainError(f"counts must sum to N={pop.N}, got {sum(counts)}")
    bounds = expected_bounds(pop, menu, cap)
    econ = pop.economy
    total = float(np.dot(counts, menu.contributions))
    coll_acc = accuracy(econ, total)
    coll_val = econ.valuation.slope * coll_acc
    rewards = []
    for i in range(pop.I):
        t_i = menu.rewards[i]
        bound = bounds[i]
        if bound <= _ZERO_TOL:
            if abs(t_i) > _ZERO_TOL:
                raise ContractViolationError(
                    f"type {i + 1} is promised {t_i} but the collective model "
                    f"is worthless whenever that type participates"
                )
            rewards.append(0.0)
            continue
        if t_i > bound * (1.0 + _VIOLATION_TOL) + _ZERO_TOL:
            raise ContractViolationError(
                f"type {i + 1} is promised {t_i}, above its expected bound "
                f"{bound}"
            )
        ratio = min(max(t_i / bound, 0.0), 1.0)
        rewards.append(valuation_inverse(econ, ratio * coll_val))
    return RealizedRewards(
        counts=counts, rewards=tuple(rewards), collective_accuracy=float(coll_acc)
    )
