"""Accuracy and valuation primitives.

The accuracy curve maps a quantity of training data to a model accuracy via
a generalization bound; the valuation maps accuracy to money.  Their
composition is the gross value a buyer places on a model trained with a
given amount of data.  All solvers downstream consume these through the
helpers here, which also expose analytic slopes and the clamp boundary of
the flat region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import bisect_root, expand_upper

__all__ = [
    "AccuracySpec",
    "ValuationSpec",
    "ModelEconomy",
    "accuracy",
    "accuracy_slope",
    "valuation",
    "valuation_inverse",
    "model_value",
    "model_value_slope",
    "clamp_threshold",
]


@dataclass(frozen=True)
class AccuracySpec:
    """Generalization-bound accuracy curve parameters.

    k is the task difficulty scale, a_opt the best accuracy achievable in
    the infinite-data limit.
    """

    k: float
    a_opt: float
    kind: str = "generalization_bound"

    def __post_init__(self) -> None:
        if self.kind != "generalization_bound":
            raise DomainError(f"unknown accuracy kind: {self.kind!r}")
        if not (math.isfinite(self.k) and self.k > 0.0):
            raise DomainError(f"k must be a positive real, got {self.k}")
        if not (math.isfinite(self.a_opt) and 0.0 < self.a_opt <= 1.0):
            raise DomainError(f"a_opt must lie in (0, 1], got {self.a_opt}")


@dataclass(frozen=True)
class ValuationSpec:
    """Monetary value per unit of accuracy."""

    slope: float
    kind: str = "linear"

    def __post_init__(self) -> None:
        if self.kind != "linear":
            raise DomainError(f"unknown valuation kind: {self.kind!r}")
        if not (math.isfinite(self.slope) and self.slope > 0.0):
            raise DomainError(f"slope must be a positive real, got {self.slope}")


@dataclass(frozen=True)
class ModelEconomy:
    """An accuracy curve paired with a valuation."""

    accuracy: AccuracySpec
    valuation: ValuationSpec


_m0_cache: dict[tuple[float, float], float] = {}


def _bound_term(m: float, k: float) -> float:
    return 2.0 * k * (2.0 + math.log(m / k)) + 4.0


def clamp_threshold(spec: AccuracySpec) -> float:
    """Boundary of the flat region: accuracy is zero for m at or below it.

    Solves a_opt^2 * m = 2k(2 + ln(m/k)) + 4.  The left bracket endpoint
    2k/a_opt^2 is the maximizer of the gap between the two sides, so the
    bisection sees exactly one sign change and cannot land on the spurious
    low-m crossing of the raw formula.
    """
    key = (spec.k, spec.a_opt)
    cached = _m0_cache.get(key)
    if cached is not None:
        return cached

    k, a_opt = spec.k, spec.a_opt

    def gap(m: float) -> float:
        return _bound_term(m, k) - a_opt * a_opt * m

    lo = max(k * math.exp(-2.0), 2.0 * k / (a_opt * a_opt))
    hi = expand_upper(gap, max(1e6 * k, 2.0 * lo))
    m0 = bisect_root(gap, lo, hi, rel_tol=1e-10)
    _m0_cache[key] = m0
    return m0


def _accuracy_scalar(spec: AccuracySpec, m: float) -> float:
    if not math.isfinite(m) or m < 0.0:
        raise DomainError(f"data quantity must be a finite nonnegative real, got {m}")
    if m <= clamp_threshold(spec):
        return 0.0
    return spec.a_opt - math.sqrt(_bound_term(m, spec.k) / m)


def _slope_scalar(spec: AccuracySpec, m: float) -> float:
    if not math.isfinite(m) or m < 0.0:
        raise DomainError(f"data quantity must be a finite nonnegative real, got {m}")
    if m <= clamp_threshold(spec):
        return 0.0
    r = _bound_term(m, spec.k)
    return (r - 2.0 * spec.k) / (2.0 * m ** 1.5 * math.sqrt(r))


def accuracy(econ: ModelEconomy, m):
    """Model accuracy from m units of training data; zero through the flat region.

    Accepts a scalar or a numpy array.
    """
    spec = econ.accuracy
    if isinstance(m, np.ndarray):
        if not np.all(np.isfinite(m)) or np.any(m < 0.0):
            raise DomainError("data quantities must be finite nonnegative reals")
        m0 = clamp_threshold(spec)
        out = np.zeros_like(m, dtype=float)
        active = m > m0
        if np.any(active):
            ma = m[active]
            r = 2.0 * spec.k * (2.0 + np.log(ma / spec.k)) + 4.0
            out[active] = spec.a_opt - np.sqrt(r / ma)
        return out
    return _accuracy_scalar(spec, float(m))


def accuracy_slope(econ: ModelEconomy, m):
    """Derivative of the accuracy curve; zero on the flat region.

    Accepts a scalar or a numpy array.
    """
    spec = econ.accuracy
    if isinstance(m, np.ndarray):
        if not np.all(np.isfinite(m)) or np.any(m < 0.0):
            raise DomainError("data quantities must be finite nonnegative reals")
        m0 = clamp_threshold(spec)
        out = np.zeros_like(m, dtype=float)
        active = m > m0
        if np.any(active):
            ma = m[active]
            r = 2.0 * spec.k * (2.0 + np.log(ma / spec.k)) + 4.0
            out[active] = (r - 2.0 * spec.k) / (2.0 * ma ** 1.5 * np.sqrt(r))
        return out
    return _slope_scalar(spec, float(m))


def valuation(econ: ModelEconomy, x: float) -> float:
    """Monetary value of accuracy level x."""
    if not math.isfinite(x) or x < 0.0 or x > 1.0:
        raise DomainError(f"accuracy level must lie in [0, 1], got {x}")
    return econ.valuation.slope * x


def valuation_inverse(econ: ModelEconomy, y: float) -> float:
    """Accuracy level whose value is y."""
    slope = econ.valuation.slope
    if not math.isfinite(y) or y < 0.0 or y > slope:
        raise DomainError(f"value must lie in [0, {slope}], got {y}")
    return y / slope


def model_value(econ: ModelEconomy, m):
    """Composite curve: monetary value of a model trained on m units of data."""
    return econ.valuation.slope * accuracy(econ, m)


def model_value_slope(econ: ModelEconomy, m):
    """Derivative of the composite curve with respect to the data quantity."""
    return econ.valuation.slope * accuracy_slope(econ, m)
