"""Independent verification of candidate menus.

Everything here re-derives constraint residuals from scratch, without
trusting the solver: participation, truth-telling over every ordered type
pair, budget bounds, and the optimality signatures (ordering, weak
efficiency at the top, break-even at the bottom).  Residuals are reported
scaled by max(1, f1) so one tolerance works across instances whose
monetary scales differ by orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .model import model_value
from .population import DEFAULT_ENUM_CAP, Population
from .reservation import reservations, reserve
from .rewards import expected_bounds
from .solver import ContractMenu

__all__ = [
    "AuditReport",
    "check_full",
    "check_ic_equivalence",
    "check_reservation_append",
]

_EFFICIENCY_TOL = 1e-5
_BREAK_EVEN_TOL = 1e-8
_DAC_TOL = 1e-8


@dataclass(frozen=True)
class AuditReport:
    """Constraint residuals for one menu, all scaled by max(1, f1).

    ir_residuals[i] >= 0 means type i clears its outside option;
    ic_matrix[i][j] >= 0 means type i prefers its own option to type j's;
    bc_residuals[i] >= 0 means the promise to type i fits under its
    expected bound.  dac_binding holds the absolute adjacent-comparison
    gaps for types 2..I, which a solver menu drives to zero.
    """

    ir_residuals: tuple[float, ...]
    ic_matrix: tuple[tuple[float, ...], ...]
    bc_residuals: tuple[float, ...]
    dac_binding: tuple[float, ...]
    ordering_ok: bool
    efficiency_gap: float
    break_even_gap: float
    verdict: str


def check_full(
    pop: Population,
    menu: ContractMenu,
    tol: float = 1e-6,
    cap: int = DEFAULT_ENUM_CAP,
) -> AuditReport:
    """Evaluate every constraint and optimality signature of a menu.

    The verdict is feasible when no participation, truth-telling, or
    budget residual falls below -tol; optimal_conditions_met additionally
    requires the ordering, binding adjacent comparisons, weak efficiency
    at the top option, and exact break-even at the bottom option.
    """
    I = pop.I
    if len(menu.rewards) != I or len(menu.contributions) != I:
        raise DomainError("menu dimensions do not match the population")
    t = np.asarray(menu.rewards, dtype=float)
    m = np.asarray(menu.contributions, dtype=float)
    costs = np.asarray(pop.costs, dtype=float)
    res = reservations(pop)
    f = np.array([r.f for r in res])
    scale = max(1.0, f[0])

    own = t - costs * m
    ir = (own - f) / scale
    ic = np.empty((I, I))
    for i in range(I):
        ic[i] = (own[i] - (t - costs[i] * m)) / scale
    bounds = np.asarray(expected_bounds(pop, menu, cap))
    bc = (bounds - t) / scale
    dac = np.array(
        [abs(own[i] - (t[i - 1] - costs[i] * m[i - 1])) for i in range(1, I)]
    ) / scale

    step = tol * scale
    ordering_ok = bool(
        np.all(m[1:] >= m[:-1] - step) and np.all(t[1:] >= t[:-1] - step)
    )
    efficiency_gap = abs(t[I - 1] - bounds[I - 1]) / scale
    break_even_gap = abs(t[0] - costs[0] * m[0] - f[0]) / scale

    feasible = bool(ir.min() >= -tol and ic.min() >= -tol and bc.min() >= -tol)
    if (
        feasible
        and ordering_ok
        and efficiency_gap <= _EFFICIENCY_TOL
        and break_even_gap <= _BREAK_EVEN_TOL
        and (dac.size == 0 or dac.max() <= _DAC_TOL)
    ):
        verdict = "optimal_conditions_met"
    elif feasible:
        verdict = "feasible"
    else:
        verdict = "infeasible"
    return AuditReport(
        ir_residuals=tuple(ir),
        ic_matrix=tuple(tuple(row) for row in ic),
        bc_residuals=tuple(bc),
        dac_binding=tuple(dac),
        ordering_ok=ordering_ok,
        efficiency_gap=float(efficiency_gap),
        break_even_gap=float(break_even_gap),
        verdict=verdict,
    )


def check_ic_equivalence(costs: Sequence[float], menu: ContractMenu) -> bool:
    """Reduced truth-telling test against the pairwise brute force.

    The reduced form asks only that adjacent comparisons bind and the
    contributions never decrease; the brute force checks every ordered
    pair.  Returns whether the two deliver the same verdict on this menu.
    """
    t = [float(x) for x in menu.rewards]
    m = [float(x) for x in menu.contributions]
    c = [float(x) for x in costs]
    I = len(c)
    tol = 1e-9 * max(
        1.0,
        max((abs(x) for x in t), default=0.0),
        max((abs(ci * mi) for ci, mi in zip(c, m)), default=0.0),
    )
    brute = all(
        t[i] - c[i] * m[i] >= t[j] - c[i] * m[j] - tol
        for i in range(I)
        for j in range(I)
        if i != j
    )
    dac_bind = all(
        abs((t[i] - c[i] * m[i]) - (t[i - 1] - c[i] * m[i - 1])) <= tol
        for i in range(1, I)
    )
    monotone = all(m[i] >= m[i - 1] - tol for i in range(1, I))
    return brute == (dac_bind and monotone)


def check_reservation_append(
    pop: Population, menu: ContractMenu, new_cost: float
) -> bool:
    """Would appending a new type's own reservation option disturb the menu?

    Returns True when every existing type still prefers its own option
    over the appended one and the appended option leaves the new type at
    exactly its outside option.
    """
    for c in pop.costs:
        if new_cost == c:
            raise DomainError(f"new cost {new_cost} duplicates an existing type")
    point = reserve(pop.economy, new_cost)
    new_t = model_value(pop.economy, point.m_bar)
    new_m = point.m_bar
    res = reservations(pop)
    scale = max(1.0, res[0].f)
    tol = 1e-9 * scale
    for i in range(pop.I):
        own = menu.rewards[i] - pop.costs[i] * menu.contributions[i]
        lured = new_t - pop.costs[i] * new_m
        if own < lured - tol:
            return False
    return abs((new_t - new_cost * new_m) - point.f) <= tol
