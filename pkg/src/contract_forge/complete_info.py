"""Observable-cost benchmark contract.

When contribution costs are public, the buyer-side principal offers every
present participant the full collectively trained model and demands the
data amount that leaves each exactly at their outside option (plus any
fairness surplus).  The result is a fixed point of a binding system: one
equation per present type, coupled through the collective data total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, InfeasibleSurplusError, SolverError
from .model import accuracy, clamp_threshold, model_value_slope, valuation
from .numerics import bisect_root
from .population import Population
from .reservation import reservations

__all__ = ["CompleteContract", "solve_complete"]

_MAX_SWEEPS = 1000
_SWEEP_TOL = 1e-10
_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class CompleteContract:
    """Benchmark outcome: per-type demands and the shared model reward.

    contributions holds entries only for types present in the realization,
    keyed by zero-based type index.
    """

    contributions: dict[int, float]
    reward_accuracy: float
    reward_value: float


def _slope_root(pop: Population, target: float, lo: float) -> float:
    """Total data amount where the value curve's slope equals target."""
    econ = pop.economy
    hi = 10.0 * lo
    while model_value_slope(econ, hi) >= target:
        hi *= 2.0
    return bisect_root(
        lambda m: model_value_slope(econ, m) - target, lo, hi, rel_tol=1e-12
    )


def _inner_update(
    pop: Population,
    i: int,
    n_i: int,
    others_total: float,
    f_i: float,
    m_bar_i: float,
    s_i: float,
) -> float:
    """Solve the type-i binding equation holding the others' data fixed.

    phi(x) = v(a(others_total + n_i x)) - c_i x - f_i - s_i is linear and
    decreasing while the collective total sits on the flat accuracy region
    and strictly concave beyond it, so locating the peak of the concave
    part classifies the bracket completely: a nonnegative peak puts the
    data-maximizing root on the descending side; otherwise any root lies
    before the peak and a plain bisection over the whole bracket finds it.
    """
    econ = pop.economy
    c_i = pop.costs[i]
    v_max = valuation(econ, econ.accuracy.a_opt)
    if m_bar_i > 0.0:
        lo = m_bar_i
        hi = (v_max - f_i - s_i) / c_i
    else:
        lo = 0.0
        hi = (v_max - s_i) / c_i
    if hi <= lo:
        raise InfeasibleSurplusError(
            f"surplus {s_i} for type {i + 1} leaves no room in the bracket"
        )

    def phi(x: float) -> float:
        return (
            valuation(econ, accuracy(econ, others_total + n_i * x))
            - c_i * x
            - f_i
            - s_i
        )

    m0 = clamp_threshold(econ.accuracy)
    slope_target = c_i / n_i
    if model_value_slope(econ, m0 * (1.0 + 1e-9)) > slope_target:
        total_star = _slope_root(pop, slope_target, m0 * (1.0 + 1e-9))
        x_peak = min(max((total_star - others_total) / n_i, lo), hi)
    else:
        x_peak = lo
    # check the left endpoint before the peak: a participant training alone
    # with no surplus has phi(m_bar) == 0 in the same arithmetic used to
    # build the reservation point, and the early-exit below then returns
    # that point bit-exactly instead of re-bisecting around the peak
    f_lo = phi(lo)
    if f_lo >= 0.0:
        return bisect_root(phi, lo, hi, rel_tol=_SWEEP_TOL, f_lo=f_lo)
    f_peak = phi(x_peak)
    if f_peak >= 0.0:
        return bisect_root(phi, x_peak, hi, rel_tol=_SWEEP_TOL, f_lo=f_peak)
    raise InfeasibleSurplusError(
        f"binding equation for type {i + 1} has no root: peak value {f_peak:.3e}, "
        f"left endpoint value {f_lo:.3e}"
    )


def solve_complete(
    pop: Population,
    counts: Sequence[int],
    surpluses: Sequence[float] | None = None,
) -> CompleteContract:
    """Fixed point of the binding participation system for one realization.

    Sweeps the present types in order, re-solving each binding equation
    against the latest iterate, until the largest update falls below the
    sweep tolerance.
    """
    counts = tuple(int(c) for c in counts)
    if len(counts) != pop.I:
        raise DomainError(f"expected {pop.I} counts, got {len(counts)}")
    if any(c < 0 for c in counts):
        raise DomainError("counts must be nonnegative")
    if sum(counts) != pop.N:
        raise DomainError(f"counts must sum to N={pop.N}, got {sum(counts)}")
    if all(c == 0 for c in counts):
        raise DomainError("at least one participant must be present")
    if surpluses is None:
        surpluses = (0.0,) * pop.I
    else:
        surpluses = tuple(float(s) for s in surpluses)
        if len(surpluses) != pop.I:
            raise DomainError(f"expected {pop.I} surpluses, got {len(surpluses)}")
        for s in surpluses:
            if not (math.isfinite(s) and s >= 0.0):
                raise DomainError(f"surpluses must be nonnegative reals, got {s}")

    res = reservations(pop)
    present = [i for i in range(pop.I) if counts[i] >= 1]
    m = {i: res[i].m_bar for i in present}

    for _ in range(_MAX_SWEEPS):
        max_change = 0.0
        for i in present:
            others = math.fsum(counts[j] * m[j] for j in present if j != i)
            new_val = _inner_update(
                pop, i, counts[i], others, res[i].f, res[i].m_bar, surpluses[i]
            )
            change = abs(new_val - m[i]) / max(1.0, abs(new_val))
            max_change = max(max_change, change)
            m[i] = new_val
        if max_change < _SWEEP_TOL:
            break
    else:
        raise SolverError(
            "binding system did not converge within the sweep cap",
            residuals={f"type_{i + 1}_last_change": max_change for i in present},
        )

    total = math.fsum(counts[i] * m[i] for i in present)
    r_acc = accuracy(pop.economy, total)
    r_val = valuation(pop.economy, r_acc)
    worst = max(
        abs(r_val - pop.costs[i] * m[i] - res[i].f - surpluses[i]) for i in present
    )
    if worst > _RESIDUAL_TOL:
        raise SolverError(
            f"binding residual {worst:.3e} exceeds tolerance after convergence",
            residuals={
                f"type_{i + 1}": r_val - pop.costs[i] * m[i] - res[i].f - surpluses[i]
                for i in present
            },
        )
    return CompleteContract(contributions=m, reward_accuracy=r_acc, reward_value=r_val)
