"""The contribution game without contracts.

If participants simply choose data amounts, each type weighs its own cost
against the expected collective model, conditioned on its own presence.
Best responses are exact one-dimensional maximizations; the equilibrium
check classifies a symmetric profile by whether any type gains from a
unilateral deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError
from .model import accuracy, accuracy_slope, clamp_threshold
from .population import DEFAULT_ENUM_CAP, Population, outcome_table
from .reservation import reservations
from .numerics import bisect_root

__all__ = ["DeviationReport", "deviation_utility", "best_response", "check_pbe"]

_GAIN_TOL = 1e-8


@dataclass(frozen=True)
class DeviationReport:
    """Best responses and deviation gains for one candidate profile."""

    best_response: tuple[float, ...]
    gain: tuple[float, ...]
    classification: str


def _validated_profile(pop: Population, profile: Sequence[float]) -> tuple[float, ...]:
    prof = tuple(float(x) for x in profile)
    if len(prof) != pop.I:
        raise DomainError(f"expected {pop.I} profile entries, got {len(prof)}")
    for x in prof:
        if not (math.isfinite(x) and x >= 0.0):
            raise DomainError(f"profile entries must be finite and nonnegative, got {x}")
    return prof


def _deviation_terms(
    pop: Population, profile: tuple[float, ...], i: int, cap: int
) -> tuple[list[float], list[float]]:
    """Conditional weights and baseline data totals facing a type-i deviator.

    The deviator knows it participates, so realizations are reweighted on
    its own presence; its peers (including same-type peers) are assumed to
    play the profile.
    """
    table = outcome_table(pop, cap)
    z = table.presence_probability(i)
    weights = []
    bases = []
    for real in table.realizations:
        if real.counts[i] < 1:
            continue
        weights.append(real.probability / z)
        bases.append(
            math.fsum(n * profile[k] for k, n in enumerate(real.counts))
            - profile[i]
        )
    return weights, bases


def deviation_utility(
    pop: Population,
    profile: Sequence[float],
    i: int,
    m: float,
    cap: int = DEFAULT_ENUM_CAP,
) -> float:
    """Type i's expected utility from contributing m against the profile."""
    prof = _validated_profile(pop, profile)
    if not 0 <= i < pop.I:
        raise DomainError(f"type index {i} out of range")
    weights, bases = _deviation_terms(pop, prof, i, cap)
    econ = pop.economy
    slope = econ.valuation.slope
    value = math.fsum(
        w * slope * accuracy(econ, b + m) for w, b in zip(weights, bases)
    )
    return value - pop.costs[i] * m


def best_response(
    pop: Population,
    profile: Sequence[float],
    i: int,
    cap: int = DEFAULT_ENUM_CAP,
) -> float:
    """Utility-maximizing contribution for type i against a fixed profile.

    The utility derivative is strictly decreasing between the points where
    individual realizations leave the flat accuracy region, and jumps up
    at those points, so scanning the segments and bisecting each interior
    sign change enumerates every local maximum.  Against an all-zero
    profile the problem is exactly the solo-training problem, whose
    maximizer is already known.
    """
    prof = _validated_profile(pop, profile)
    if not 0 <= i < pop.I:
        raise DomainError(f"type index {i} out of range")
    if all(x == 0.0 for x in prof):
        return reservations(pop)[i].m_bar

    weights, bases = _deviation_terms(pop, prof, i, cap)
    econ = pop.economy
    slope = econ.valuation.slope
    c_i = pop.costs[i]
    m0 = clamp_threshold(econ.accuracy)

    def util(m: float) -> float:
        return (
            math.fsum(w * slope * accuracy(econ, b + m) for w, b in zip(weights, bases))
            - c_i * m
        )

    def deriv(m: float) -> float:
        return (
            math.fsum(
                w * slope * accuracy_slope(econ, b + m) for w, b in zip(weights, bases)
            )
            - c_i
        )

    kinks = sorted({m0 - b for b in bases if m0 - b > 0.0})
    candidates = [0.0, prof[i]]
    candidates.extend(kinks)
    edges = [0.0] + kinks
    for left, right in zip(edges, edges[1:]):
        lo = left * (1.0 + 1e-12) + 1e-15
        hi = right * (1.0 - 1e-12)
        if hi <= lo:
            continue
        d_lo, d_hi = deriv(lo), deriv(hi)
        if d_lo > 0.0 > d_hi:
            candidates.append(bisect_root(deriv, lo, hi, rel_tol=1e-11,
                                          f_lo=d_lo, f_hi=d_hi))
    tail = edges[-1] * (1.0 + 1e-12) + 1e-15
    d_tail = deriv(tail)
    if d_tail > 0.0:
        hi = max(2.0 * tail, 2.0 * m0)
        while deriv(hi) >= 0.0:
            hi *= 2.0
        candidates.append(bisect_root(deriv, tail, hi, rel_tol=1e-11, f_lo=d_tail))

    best_m = candidates[0]
    best_u = util(best_m)
    for cand in candidates[1:]:
        u = util(cand)
        if u > best_u:
            best_m, best_u = cand, u
    return best_m


def check_pbe(
    pop: Population, profile: Sequence[float], cap: int = DEFAULT_ENUM_CAP
) -> DeviationReport:
    """Classify a symmetric contribution profile by unilateral deviations.

    The all-zero profile with no profitable deviation is the collapse
    equilibrium; anything else is not an equilibrium, with the gains
    showing who deviates.
    """
    prof = _validated_profile(pop, profile)
    responses = []
    gains = []
    for i in range(pop.I):
        br = best_response(pop, prof, i, cap)
        u_br = deviation_utility(pop, prof, i, br, cap)
        u_now = deviation_utility(pop, prof, i, prof[i], cap)
        responses.append(br)
        gains.append(max(u_br - u_now, 0.0))
    zero_profile = all(x == 0.0 for x in prof)
    if zero_profile and max(gains) <= _GAIN_TOL:
        classification = "failure_equilibrium"
    else:
        classification = "not_equilibrium"
    return DeviationReport(
        best_response=tuple(responses),
        gain=tuple(gains),
        classification=classification,
    )
