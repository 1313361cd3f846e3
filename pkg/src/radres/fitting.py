"""Least-squares scaling fits for h-sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FitResult", "FitError", "fit_power_law", "fit_exponential_rate", "upper_envelope"]


class FitError(ValueError):
    """Too few, non-positive or degenerate points."""


@dataclass(frozen=True)
class FitResult:
    """``log y = -p log h + b`` (``power-law``) or ``log y = C/h + b`` (``exponential``).

    ``exponent`` holds ``p`` or ``C``.
    """

    model: str
    exponent: float
    intercept: float
    r_squared: float


def _prepare(points, min_points):
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < min_points:
        raise FitError(f"need at least {min_points} (h, value) pairs")
    h, y = arr[:, 0], arr[:, 1]
    if np.any(h <= 0) or np.any(y <= 0) or not np.all(np.isfinite(arr)):
        raise FitError("h and values must be positive and finite")
    if np.ptp(h) == 0:
        raise FitError("all h are equal")
    return h, y


def _linear(x, y):
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(res**2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = max(0.0, 1.0 - ss_res / ss_tot)
    return coef[0], coef[1], r2


def fit_power_law(points, min_points: int = 4) -> FitResult:
    """Fit ``value ~ e^b h^{-p}`` on ``(log h, log value)``."""
    h, y = _prepare(points, min_points)
    slope, b, r2 = _linear(np.log(h), np.log(y))
    return FitResult("power-law", -slope, b, r2)


def fit_exponential_rate(points, min_points: int = 4) -> FitResult:
    """Fit ``value ~ e^{b + C/h}`` on ``(1/h, log value)``."""
    h, y = _prepare(points, min_points)
    C, b, r2 = _linear(1.0 / h, np.log(y))
    return FitResult("exponential", C, b, r2)


def upper_envelope(points):
    """Points that set a new maximum as ``h`` decreases, ordered by decreasing ``h``.

    Resonance dips below the running maximum are dropped rather than
    replaced, so the fit only sees measured values.
    """
    arr = np.asarray(points, dtype=float)
    arr = arr[np.argsort(-arr[:, 0], kind="stable")]
    keep = arr[:, 1] >= np.maximum.accumulate(arr[:, 1])
    return arr[keep]
