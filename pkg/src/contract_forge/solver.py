"""Optimal menu design under private contribution costs.

The screening problem reduces to choosing per-type data contributions
only: binding adjacent comparisons pin every expected reward value to a
closed form in the contributions, leaving a concave maximization of
expected collective accuracy under ordering, participation, and budget
inequalities.  An augmented-Lagrangian outer loop with a quasi-Newton
inner minimizer handles the inequalities, since no strictly feasible
interior start exists in the reduced space.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import NonlinearConstraint, minimize, nnls

from .errors import SolverError
from .model import accuracy, accuracy_slope, clamp_threshold, model_value_slope
from .numerics import bisect_root
from .population import DEFAULT_ENUM_CAP, Population, outcome_table
from .reservation import reservations

__all__ = [
    "ContractMenu",
    "SolveReport",
    "closed_form_rewards",
    "objective",
    "solve_incomplete",
]

_OUTER_CAP = 50
_OUTER_TOL = 1e-8
_FEASIBLE_TOL = 1e-6
_RHO_START = 10.0
_RHO_GROWTH = 10.0
_RHO_MAX = 1e10
_LAMBDA_MAX = 1e12


@dataclass(frozen=True)
class ContractMenu:
    """Per-type expected reward values and required data contributions.

    Entry i is the option designed for the i-th highest cost type; both
    vectors are non-decreasing in any menu this package produces.
    """

    rewards: tuple[float, ...]
    contributions: tuple[float, ...]


@dataclass(frozen=True)
class SolveReport:
    """Solve diagnostics for one incomplete-information run."""

    objective: float
    iterations: int
    max_constraint_violation: float
    stationarity_residual: float
    status: str


def closed_form_rewards(
    contributions: Sequence[float], f1: float, costs: Sequence[float]
) -> tuple[float, ...]:
    """Expected reward values implied by binding adjacent comparisons.

    The lowest entry covers the highest-cost type's outside option plus
    its contribution cost; each later entry adds the incremental cost of
    the extra data at that type's own rate.
    """
    m = [float(x) for x in contributions]
    c = [float(x) for x in costs]
    if len(m) != len(c):
        raise ValueError(f"{len(m)} contributions but {len(c)} costs")
    for a, b in zip(m, m[1:]):
        if b < a - 1e-9 * max(1.0, abs(a)):
            warnings.warn(
                "contributions are not non-decreasing; the implied rewards "
                "will fail an audit",
                stacklevel=2,
            )
            break
    t = [f1 + c[0] * m[0]]
    for i in range(1, len(m)):
        t.append(t[-1] + c[i] * (m[i] - m[i - 1]))
    return tuple(t)


def objective(
    pop: Population, contributions: Sequence[float], cap: int = DEFAULT_ENUM_CAP
) -> float:
    """Expected collective accuracy of a contribution vector."""
    m = np.asarray(contributions, dtype=float)
    table = outcome_table(pop, cap)
    totals = table.counts @ m
    a_vals = accuracy(pop.economy, totals)
    return math.fsum((table.pmf * a_vals).tolist())


@dataclass
class _Workspace:
    """Precomputed arrays shared by every objective/constraint evaluation."""

    counts: np.ndarray
    pmf: np.ndarray
    masks: list[np.ndarray]
    presence: np.ndarray
    Tmat: np.ndarray
    costs: np.ndarray
    f: np.ndarray
    f1: float
    slope: float
    m0: float
    pop: Population


def _assemble(pop: Population, cap: int) -> _Workspace:
    table = outcome_table(pop, cap)
    res = reservations(pop)
    costs = np.asarray(pop.costs, dtype=float)
    I = pop.I
    Tmat = np.zeros((I, I))
    for i in range(I):
        Tmat[i, i] = costs[i]
        for j in range(i):
            Tmat[i, j] = costs[j] - costs[j + 1]
    return _Workspace(
        counts=table.counts.astype(float),
        pmf=table.pmf,
        masks=[table.mask(i) for i in range(I)],
        presence=np.array([table.presence_probability(i) for i in range(I)]),
        Tmat=Tmat,
        costs=costs,
        f=np.array([r.f for r in res]),
        f1=res[0].f,
        slope=pop.economy.valuation.slope,
        m0=clamp_threshold(pop.economy.accuracy),
        pop=pop,
    )


def _evaluate(ws: _Workspace, m: np.ndarray):
    """Objective, constraints, and their gradients at one point.

    Constraint vector layout: I-1 ordering rows, I-1 participation rows
    for types 2..I, then I budget rows.  All are written as h(m) >= 0.
    """
    I = len(m)
    econ = ws.pop.economy
    totals = ws.counts @ m
    a_vals = accuracy(econ, totals)
    a_slopes = accuracy_slope(econ, totals)
    obj = float(ws.pmf @ a_vals)
    grad_obj = ws.counts.T @ (ws.pmf * a_slopes)

    t = ws.f1 + ws.Tmat @ m
    h_parts = []
    J_parts = []
    if I > 1:
        h_parts.append(m[1:] - m[:-1])
        J_ord = np.zeros((I - 1, I))
        for i in range(I - 1):
            J_ord[i, i] = -1.0
            J_ord[i, i + 1] = 1.0
        J_parts.append(J_ord)
        h_parts.append((t - ws.costs * m - ws.f)[1:])
        J_ir = ws.Tmat[1:].copy()
        for row, i in enumerate(range(1, I)):
            J_ir[row, i] -= ws.costs[i]
        J_parts.append(J_ir)
    weighted = ws.pmf * a_vals
    weighted_slope = ws.pmf * a_slopes
    tbar = np.empty(I)
    J_bc = np.empty((I, I))
    for i in range(I):
        mask = ws.masks[i]
        tbar[i] = ws.slope * float(weighted[mask].sum()) / ws.presence[i]
        J_bc[i] = (
            ws.slope * (ws.counts[mask].T @ weighted_slope[mask]) / ws.presence[i]
            - ws.Tmat[i]
        )
    h_parts.append(tbar - t)
    J_parts.append(J_bc)
    h = np.concatenate(h_parts)
    J = np.vstack(J_parts)
    return obj, grad_obj, h, J, t, tbar


def _stationarity(grad_obj: np.ndarray, J: np.ndarray, lam_hat: np.ndarray,
                  m: np.ndarray) -> float:
    g = -grad_obj - J.T @ lam_hat
    at_bound = m <= 0.0
    g = np.where(at_bound, np.minimum(g, 0.0), g)
    return float(np.max(np.abs(g)))


def _certified_stationarity(
    grad_obj: np.ndarray,
    h: np.ndarray,
    J: np.ndarray,
    m: np.ndarray,
    scale: float,
) -> float:
    """KKT residual with the best nonnegative multipliers at this point.

    The running multiplier estimates converge only as fast as the dual
    iteration, which can leave a point that is already first-order optimal
    looking unconverged.  Fitting multipliers to the near-active
    constraints by nonnegative least squares certifies such a point
    directly.
    """
    act = h <= 1e-6 * scale
    free = m > 0.0
    lam = np.zeros(len(h))
    if act.any() and free.any():
        A = J[act][:, free].T
        b = (-grad_obj)[free]
        try:
            lam_act, _ = nnls(A, b)
        except Exception:
            return math.inf
        lam[act] = lam_act
    return _stationarity(grad_obj, J, lam, m)


def _budget_snap(ws: _Workspace, m: np.ndarray) -> np.ndarray:
    """Smallest uniform downscale that clears every budget row.

    Converged iterates may overdraw a binding budget row by a few ulps,
    and the per-realization award then clips, which breaks exact reward
    recovery downstream.  Scaling all contributions together preserves the
    ordering rows exactly and costs only an ulp-level dent elsewhere.
    """
    I = ws.pop.I
    for _ in range(4):
        _, _, h, J, _, _ = _evaluate(ws, m)
        bc = h[-I:]
        if float(bc.min()) >= 0.0:
            break
        eps = 0.0
        fixable = True
        for r in range(len(h) - I, len(h)):
            if h[r] < 0.0:
                g = float(J[r] @ m)
                if g >= 0.0:
                    fixable = False
                    break
                eps = max(eps, float(h[r]) / g)
        if not fixable or eps <= 0.0:
            break
        m = m * (1.0 - 1.25 * eps)
    return m


def _final(ws: _Workspace, m: np.ndarray, scale: float):
    """Snap a candidate to exact budget feasibility and re-measure it."""
    m = _budget_snap(ws, m)
    obj, grad_obj, h, J, _, _ = _evaluate(ws, m)
    viol = float(np.maximum(-h, 0.0).max()) / scale if h.size else 0.0
    stat = _certified_stationarity(grad_obj, h, J, m, scale)
    return m, obj, viol, stat


def _polish(ws: _Workspace, x0: np.ndarray) -> np.ndarray | None:
    """Second-order finishing step for iterates the dual loop cannot move.

    Past the accuracy knee the objective is nearly flat along a ridge that
    trades one type's contribution against another's, and a first-order
    inner solver stalls there with a gradient far above tolerance.  A
    trust-region step with exact constraint jacobians walks the ridge to
    the boundary instead.
    """

    def neg_obj(m: np.ndarray) -> float:
        return -_evaluate(ws, m)[0]

    def neg_grad(m: np.ndarray) -> np.ndarray:
        return -_evaluate(ws, m)[1]

    def con_fun(m: np.ndarray) -> np.ndarray:
        return _evaluate(ws, m)[2]

    def con_jac(m: np.ndarray) -> np.ndarray:
        return _evaluate(ws, m)[3]

    try:
        res = minimize(
            neg_obj,
            x0,
            jac=neg_grad,
            method="trust-constr",
            constraints=[NonlinearConstraint(con_fun, 0.0, np.inf, jac=con_jac)],
            bounds=[(0.0, None)] * x0.size,
            options={"gtol": 1e-12, "xtol": 1e-14, "maxiter": 300},
        )
    except Exception:
        return None
    return np.maximum(res.x, 0.0)


def _pooling_restoration(ws: _Workspace) -> np.ndarray | None:
    """Feasible pooling menu derived from reservation data, if one exists.

    Along the pooling line every budget row reduces to the same scalar
    inequality, and participation rows reduce to a lower bound on the
    pooled contribution; the best feasible point is the upper root of the
    budget gap.
    """
    econ = ws.pop.economy
    N = ws.pop.N
    I = ws.pop.I
    x_min = 0.0
    for i in range(1, I):
        x_min = max(x_min, (ws.f[i] - ws.f1) / (ws.costs[0] - ws.costs[i]))

    def gap(x: float) -> float:
        return (
            ws.slope * accuracy(econ, N * x) - ws.f1 - ws.costs[0] * x
        )

    target = ws.costs[0] / N
    lo = ws.m0 * (1.0 + 1e-9)
    if model_value_slope(econ, lo) <= target:
        return None
    hi = 10.0 * ws.m0
    while model_value_slope(econ, hi) >= target:
        hi *= 2.0
    total_peak = bisect_root(
        lambda mm: model_value_slope(econ, mm) - target, lo, hi, rel_tol=1e-12
    )
    x_peak = total_peak / N
    if gap(x_peak) < 0.0:
        return None
    x_hi = 2.0 * x_peak
    while gap(x_hi) >= 0.0:
        x_hi *= 2.0
    x_root = bisect_root(gap, x_peak, x_hi, rel_tol=1e-12)
    if x_root < x_min:
        return None
    return np.full(I, x_root)


def solve_incomplete(
    pop: Population, cap: int = DEFAULT_ENUM_CAP, outer_cap: int = _OUTER_CAP
) -> tuple[ContractMenu, SolveReport]:
    """Maximize expected collective accuracy over contribution menus.

    Augmented-Lagrangian outer loop: the inner quasi-Newton step
    minimizes the penalized objective with analytic gradients, then the
    multipliers absorb the penalty and the penalty weight grows whenever
    the worst violation stalls.
    """
    ws = _assemble(pop, cap)
    I = pop.I
    res = reservations(pop)
    scale = max(1.0, abs(ws.f1))

    start = res[-1].m_bar
    if start <= 0.0:
        start = 2.0 * ws.m0 / pop.N
    x0 = np.full(I, start)

    n_con = 3 * I - 2 if I > 1 else 1
    lam = np.zeros(n_con)
    rho = _RHO_START
    viol_prev = math.inf
    best_m: np.ndarray | None = None
    best_obj = -math.inf
    best_viol = math.inf
    best_stat = math.inf
    last = None

    for outer in range(1, outer_cap + 1):

        def al(m_vec: np.ndarray):
            obj, grad_obj, h, J, _, _ = _evaluate(ws, m_vec)
            z = lam - rho * h
            active = np.maximum(z, 0.0)
            psi = float((active**2 - lam**2).sum()) / (2.0 * rho)
            val = -obj + psi
            grad = -grad_obj - J.T @ active
            return val, grad

        result = minimize(
            al,
            x0,
            jac=True,
            method="L-BFGS-B",
            bounds=[(0.0, None)] * I,
            options={"maxiter": 1000, "maxfun": 5000, "ftol": 1e-18, "gtol": 1e-12},
        )
        m = np.maximum(result.x, 0.0)

        totals = ws.counts @ m
        if totals.max() <= ws.m0:
            # the flat accuracy region has zero gradient everywhere, so an
            # iterate stranded there must be lifted before continuing
            x0 = np.maximum(m, 2.0 * ws.m0 / pop.N)
            continue

        obj, grad_obj, h, J, _, _ = _evaluate(ws, m)
        viol = float(np.maximum(-h, 0.0).max()) / scale if h.size else 0.0
        lam_hat = np.maximum(lam - rho * h, 0.0)
        stat = _stationarity(grad_obj, J, lam_hat, m)
        if viol <= _OUTER_TOL and stat > _OUTER_TOL:
            stat = min(stat, _certified_stationarity(grad_obj, h, J, m, scale))
        last = (m, obj, viol, stat, outer)
        if viol <= _FEASIBLE_TOL and (obj > best_obj or viol < best_viol):
            best_m, best_obj, best_viol, best_stat = m, obj, viol, stat
        if viol <= _OUTER_TOL and stat <= _OUTER_TOL:
            fm, fobj, fviol, fstat = _final(ws, m, scale)
            if fviol <= _OUTER_TOL and fstat <= _OUTER_TOL:
                return _menu_from(ws, fm), SolveReport(
                    objective=fobj,
                    iterations=outer,
                    max_constraint_violation=fviol,
                    stationarity_residual=fstat,
                    status="optimal",
                )
        lam = np.minimum(lam_hat, _LAMBDA_MAX)
        # a feasible iterate that is not yet stationary stalls the dual
        # update, because the violation-based rule alone never sharpens the
        # penalty when constraints are approached from the feasible side
        if viol > 0.1 * viol_prev or (viol <= _OUTER_TOL and stat > _OUTER_TOL):
            rho = min(rho * _RHO_GROWTH, _RHO_MAX)
        viol_prev = viol
        x0 = m

    candidates: list[tuple[np.ndarray, float, float, float]] = []
    if best_m is not None:
        candidates.append((best_m, best_obj, best_viol, best_stat))
    if last is not None and last[2] <= _FEASIBLE_TOL:
        candidates.append((last[0], last[1], last[2], last[3]))
    rest = _pooling_restoration(ws)
    if rest is not None:
        obj, grad_obj, h, J, _, _ = _evaluate(ws, rest)
        viol = float(np.maximum(-h, 0.0).max()) / scale if h.size else 0.0
        if viol <= _FEASIBLE_TOL:
            candidates.append(
                (rest, obj, viol,
                 _certified_stationarity(grad_obj, h, J, rest, scale))
            )
    seed = best_m if best_m is not None else (last[0] if last is not None else None)
    if seed is not None:
        polished = _polish(ws, seed)
        if polished is not None:
            obj, grad_obj, h, J, _, _ = _evaluate(ws, polished)
            viol = float(np.maximum(-h, 0.0).max()) / scale if h.size else 0.0
            if viol <= _FEASIBLE_TOL:
                candidates.append(
                    (polished, obj, viol,
                     _certified_stationarity(grad_obj, h, J, polished, scale))
                )
    if candidates:
        m, obj, viol, stat = max(candidates, key=lambda c: c[1])
        m, obj, viol, stat = _final(ws, m, scale)
        # a candidate that satisfies both tolerances is a genuine optimum even
        # though the dual loop itself ran out of iterations
        status = "optimal" if viol <= _OUTER_TOL and stat <= _OUTER_TOL else "max_iter"
        return _menu_from(ws, m), SolveReport(
            objective=obj,
            iterations=outer_cap,
            max_constraint_violation=viol,
            stationarity_residual=stat,
            status=status,
        )
    if last is None:
        raise SolverError("no usable iterate produced")
    m, obj, viol, stat, _ = last
    return _menu_from(ws, m), SolveReport(
        objective=obj,
        iterations=outer_cap,
        max_constraint_violation=viol,
        stationarity_residual=stat,
        status="infeasible",
    )


def _menu_from(ws: _Workspace, m: np.ndarray) -> ContractMenu:
    contributions = tuple(float(x) for x in m)
    rewards = closed_form_rewards(contributions, ws.f1, tuple(ws.costs))
    return ContractMenu(rewards=rewards, contributions=contributions)
