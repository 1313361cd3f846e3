"""Radial grids and scaled grid functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["GridFunction", "GridSpec", "make_grid", "GridRangeError"]


class GridRangeError(ValueError):
    """Evaluation point outside the grid."""


@dataclass(frozen=True)
class GridSpec:
    """Recipe for a radial grid.

    Attributes
    ----------
    r_max : float
        Right end of the grid.
    points_per_wavelength : float
        Uniform spacing is ``2 pi h / (k * ppw)`` with ``k = sqrt(E - min V)``.
    r_min_factor : float
        ``r_min = r_min_factor * h``.
    ratio : float
        Growth factor of the geometric part near the origin.
    """

    r_max: float
    points_per_wavelength: float = 24.0
    r_min_factor: float = 1e-3
    ratio: float = 1.06


def make_grid(spec: GridSpec, h: float, E: float, v_min: float = 0.0, breakpoints=()) -> np.ndarray:
    """Geometric grid from ``r_min`` until the step reaches the uniform spacing, uniform afterwards.

    Every breakpoint inside ``(r_min, r_max]`` is a grid node.
    """
    k = math.sqrt(max(E - min(v_min, 0.0), E))
    dr = 2.0 * math.pi * h / (k * spec.points_per_wavelength)
    r_min = spec.r_min_factor * h
    if spec.r_max <= r_min:
        raise ValueError("r_max must exceed r_min")
    q = spec.ratio
    r_switch = dr / (q - 1.0)
    geo = [r_min]
    while geo[-1] * q < min(r_switch, spec.r_max):
        geo.append(geo[-1] * q)
    start = geo[-1]
    n_uni = max(int(math.ceil((spec.r_max - start) / dr)), 1)
    uni = start + (spec.r_max - start) * np.arange(1, n_uni + 1) / n_uni
    uni[-1] = spec.r_max
    r = np.concatenate([np.asarray(geo), uni])
    bps = [b for b in breakpoints if r_min < b < spec.r_max]
    if bps:
        step = np.diff(r, prepend=0.0)
        keep = np.ones(r.size, dtype=bool)
        for b in bps:
            i = int(np.argmin(np.abs(r - b)))
            if abs(r[i] - b) < 0.3 * step[i] and 0 < i < r.size - 1:
                keep[i] = False
        r = np.union1d(r[keep], np.asarray(bps))
    return r


@dataclass(frozen=True)
class GridFunction:
    """Complex function on a radial grid, ``u(r_i) = mantissa_i * exp(log_scale_i)``.

    The derivative shares the scale: ``u'(r_i) = d_mantissa_i * exp(log_scale_i)``.
    A real scale with a signed or complex mantissa stays well defined through
    sign changes, where a log-magnitude/phase pair would not.
    """

    grid: np.ndarray
    mantissa: np.ndarray
    d_mantissa: np.ndarray
    log_scale: np.ndarray

    def __post_init__(self):
        n = self.grid.shape
        if self.mantissa.shape != n or self.d_mantissa.shape != n or self.log_scale.shape != n:
            raise ValueError("grid function arrays must match the grid")

    @property
    def log_mag(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mantissa)) + self.log_scale

    @property
    def phase(self) -> np.ndarray:
        a = np.abs(self.mantissa)
        return np.where(a > 0, self.mantissa / np.where(a > 0, a, 1.0), 1.0)

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.mantissa) & np.isfinite(self.log_scale)

    def values(self) -> np.ndarray:
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            return self.mantissa * np.exp(self.log_scale)

    def derivatives(self) -> np.ndarray:
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            return self.d_mantissa * np.exp(self.log_scale)

    def scaled(self, c: complex) -> GridFunction:
        return GridFunction(self.grid, self.mantissa * c, self.d_mantissa * c, self.log_scale)

    def restrict(self, mask) -> GridFunction:
        return GridFunction(self.grid[mask], self.mantissa[mask], self.d_mantissa[mask], self.log_scale[mask])

    def interp(self, r, curvature=None, derivative=False):
        """Hermite interpolation in the local scale; returns ``(mantissa, log_scale)``.

        Cubic by default. With ``curvature(r_nodes, r_mid)`` giving ``u''/u`` at
        the interval ends (``r_mid`` selects the piece of a piecewise potential)
        the interpolant is quintic. With ``derivative=True`` the derivative
        mantissa is returned as a third item.
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        g = self.grid
        if np.any(r < g[0] * (1 - 1e-14)) or np.any(r > g[-1] * (1 + 1e-14)):
            raise GridRangeError("interpolation outside the grid")
        i = np.clip(np.searchsorted(g, r, side="right") - 1, 0, g.size - 2)
        r0, r1 = g[i], g[i + 1]
        s = np.maximum(self.log_scale[i], self.log_scale[i + 1])
        e0 = np.exp(self.log_scale[i] - s)
        e1 = np.exp(self.log_scale[i + 1] - s)
        y0, y1 = self.mantissa[i] * e0, self.mantissa[i + 1] * e1
        d0, d1 = self.d_mantissa[i] * e0, self.d_mantissa[i + 1] * e1
        dx = r1 - r0
        t = np.clip((r - r0) / dx, 0.0, 1.0)
        if curvature is None:
            basis = _CUBIC
            coef = (y0, dx * d0, y1, dx * d1)
        else:
            mid = 0.5 * (r0 + r1)
            a0 = curvature(r0, mid) * y0
            a1 = curvature(r1, mid) * y1
            basis = _QUINTIC
            coef = (y0, dx * d0, dx * dx * a0, y1, dx * d1, dx * dx * a1)
        val = sum(np.polynomial.polynomial.polyval(t, b) * c for b, c in zip(basis, coef))
        if not derivative:
            return val, s
        der = sum(np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyder(b)) * c for b, c in zip(basis, coef))
        return val, s, der / dx


# Hermite bases on [0, 1] as power-series coefficients, ordered like the data tuples above
_CUBIC = (
    np.array([1.0, 0.0, -3.0, 2.0]),
    np.array([0.0, 1.0, -2.0, 1.0]),
    np.array([0.0, 0.0, 3.0, -2.0]),
    np.array([0.0, 0.0, -1.0, 1.0]),
)
_QUINTIC = (
    np.array([1.0, 0.0, 0.0, -10.0, 15.0, -6.0]),
    np.array([0.0, 1.0, 0.0, -6.0, 8.0, -3.0]),
    np.array([0.0, 0.0, 0.5, -1.5, 1.5, -0.5]),
    np.array([0.0, 0.0, 0.0, 10.0, -15.0, 6.0]),
    np.array([0.0, 0.0, 0.0, -4.0, 7.0, -3.0]),
    np.array([0.0, 0.0, 0.0, 0.5, -1.0, 0.5]),
)
