"""Welfare accounting: what hidden costs cost, and who pockets the difference.

Two quantities compare the private-cost optimum against the observable
-cost benchmark: the coordinator's expected loss in model value, and each
type's expected utility surplus over its benchmark utility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .complete_info import solve_complete
from .errors import ContractForgeError, DomainError, SolverError
from .model import accuracy
from .population import DEFAULT_ENUM_CAP, Population, outcome_table
from .reservation import reservations
from .solver import ContractMenu

__all__ = ["WelfareReport", "information_cost", "information_rent", "welfare_report"]


@dataclass(frozen=True)
class WelfareReport:
    """Coordinator's value loss and per-type surpluses from hidden costs."""

    information_cost: float
    information_rent: tuple[float, ...]


def _complete_value(
    pop: Population, counts: tuple[int, ...], cache: dict | None
) -> float:
    """Value of the observable-cost benchmark model for one realization.

    Cache keys are count vectors; entries stay valid as long as the
    economy and cost vector do not change.  Concurrent duplicate inserts
    are benign because every writer computes the same value.
    """
    if cache is not None:
        hit = cache.get(counts)
        if hit is not None:
            return hit
    try:
        value = solve_complete(pop, counts).reward_value
    except ContractForgeError as exc:
        raise SolverError(
            f"observable-cost benchmark failed at realization {counts}: {exc}"
        ) from exc
    if cache is not None:
        cache[counts] = value
    return value


def information_cost(
    pop: Population,
    menu: ContractMenu,
    cap: int = DEFAULT_ENUM_CAP,
    cache: dict | None = None,
) -> float:
    """Expected model-value gap between the menu and the benchmark.

    Nonpositive at optimal menus: hiding costs never helps the
    coordinator.  A single type means nothing is hidden, so the gap is
    identically zero.
    """
    if pop.I == 1:
        return 0.0
    table = outcome_table(pop, cap)
    m = np.asarray(menu.contributions, dtype=float)
    totals = table.counts @ m
    slope = pop.economy.valuation.slope
    menu_vals = slope * accuracy(pop.economy, totals)
    terms = []
    for real, mv in zip(table.realizations, menu_vals):
        bench = _complete_value(pop, real.counts, cache)
        terms.append(real.probability * (float(mv) - bench))
    return math.fsum(terms)


def information_rent(pop: Population, menu: ContractMenu, i: int) -> float:
    """Type i's expected utility surplus over the benchmark break-even level.

    Under observable costs every participating type is held to its
    outside option, and the binding bottom option anchors that level at
    the highest-cost type's utility; the surplus is the menu utility in
    excess of it.
    """
    if not 0 <= i < pop.I:
        raise DomainError(f"type index {i} out of range")
    if pop.I == 1:
        return 0.0
    f1 = reservations(pop)[0].f
    # grouped to mirror the solver's reward construction t1 = f1 + c1*m1,
    # so the bottom type's rent cancels to exactly zero at solver output
    return menu.rewards[i] - (f1 + pop.costs[i] * menu.contributions[i])


def welfare_report(
    pop: Population,
    menu: ContractMenu,
    cap: int = DEFAULT_ENUM_CAP,
    cache: dict | None = None,
) -> WelfareReport:
    """Bundle the information cost with every type's information rent."""
    rents = tuple(information_rent(pop, menu, i) for i in range(pop.I))
    return WelfareReport(
        information_cost=information_cost(pop, menu, cap, cache),
        information_rent=rents,
    )
