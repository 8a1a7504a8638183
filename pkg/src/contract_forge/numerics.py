"""Small scalar root-finding and line-search utilities.

Everything here operates on plain Python floats and callables; the heavy
vectorized work lives next to the data it needs.
"""

from __future__ import annotations

from typing import Callable

from .errors import SolverError

_MAX_BISECT = 400


def bisect_root(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    rel_tol: float = 1e-10,
    f_lo: float | None = None,
    f_hi: float | None = None,
) -> float:
    """Bisection for a sign change of ``fn`` on [lo, hi].

    Requires fn(lo) >= 0 >= fn(hi); the caller points the positive end at
    ``lo``.  Converges to the downcrossing nearest the positive end when the
    function has a single sign change on the bracket.

    Args:
        fn: scalar function, continuous on the bracket.
        lo: left endpoint, fn(lo) >= 0.
        hi: right endpoint, fn(hi) <= 0.
        rel_tol: stop when the bracket width falls below
            rel_tol * max(1, |midpoint|).

    Returns:
        The midpoint of the final bracket.
    """
    a, b = float(lo), float(hi)
    fa = fn(a) if f_lo is None else f_lo
    fb = fn(b) if f_hi is None else f_hi
    if fa < 0.0:
        raise SolverError(f"bisect_root: fn(lo)={fa} is negative at lo={a}")
    if fb > 0.0:
        raise SolverError(f"bisect_root: fn(hi)={fb} is positive at hi={b}")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (a + b)
        if (b - a) <= rel_tol * max(1.0, abs(mid)):
            return mid
        fm = fn(mid)
        if fm >= 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def expand_upper(
    fn: Callable[[float], float],
    start: float,
    *,
    max_doublings: int = 200,
) -> float:
    """Double ``start`` until fn becomes negative; returns that endpoint.

    Used to close a bracket whose right end must have fn < 0.
    """
    hi = float(start)
    for _ in range(max_doublings):
        if fn(hi) < 0.0:
            return hi
        hi *= 2.0
    raise SolverError(f"expand_upper: no sign change found up to {hi}")


def golden_max(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    rel_tol: float = 1e-11,
    max_iter: int = 300,
) -> float:
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    invphi = 0.6180339887498949
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if (b - a) <= rel_tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)
