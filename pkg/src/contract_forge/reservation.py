"""Solo-training outside options.

A participant with unit data cost c who trains alone picks the data amount
maximizing model value net of cost.  That optimum and its utility are the
participant's reservation point; any acceptable contract must beat it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import DomainError
from .model import ModelEconomy, clamp_threshold, model_value, model_value_slope
from .numerics import bisect_root
from .population import Population

__all__ = ["ReservationPoint", "reserve", "reservations"]


@dataclass(frozen=True)
class ReservationPoint:
    """Best solo data amount and the utility it yields."""

    m_bar: float
    f: float


def reserve(econ: ModelEconomy, c: float) -> ReservationPoint:
    """Maximize model_value(m) - c*m over m >= 0.

    The composite value curve is flat at zero up to the clamp boundary and
    strictly concave beyond it, so the first-order condition
    model_value_slope(m) = c has at most one root there and bisection on
    the slope is globally convergent.  When the slope never reaches c, or
    the resulting utility is not strictly positive, the participant
    prefers to train nothing and the reservation point is (0, 0).
    """
    if not (math.isfinite(c) and c > 0.0):
        raise DomainError(f"unit cost must be a positive real, got {c}")
    m0 = clamp_threshold(econ.accuracy)
    lo = m0 * (1.0 + 1e-9)
    slope_lo = model_value_slope(econ, lo)
    if slope_lo <= c:
        return ReservationPoint(0.0, 0.0)
    hi = 10.0 * m0
    while model_value_slope(econ, hi) >= c:
        hi *= 2.0
    m_bar = bisect_root(
        lambda m: model_value_slope(econ, m) - c,
        lo,
        hi,
        rel_tol=1e-10,
        f_lo=slope_lo - c,
    )
    f = model_value(econ, m_bar) - c * m_bar
    if f <= 0.0:
        return ReservationPoint(0.0, 0.0)
    return ReservationPoint(m_bar, f)


@lru_cache(maxsize=512)
def reservations(pop: Population) -> tuple[ReservationPoint, ...]:
    """Reservation points for every type in the population, highest cost first."""
    return tuple(reserve(pop.economy, c) for c in pop.costs)
