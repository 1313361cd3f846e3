"""Piecewise-constant, compactly supported radial potentials and their geometric functionals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "RadialPotential",
    "EnergyWindow",
    "InvalidRadius",
    "support_radius",
    "m_zero",
    "r_one",
    "m_plus",
    "load_potential",
    "parse_potential",
]


class InvalidRadius(ValueError):
    """Exterior radius does not exceed ``r_one(V, E)``."""


@dataclass(frozen=True)
class RadialPotential:
    """``V(r) = values[i]`` on ``(breakpoints[i-1], breakpoints[i]]`` (with ``breakpoints[-1] := 0``), zero beyond.

    Attributes
    ----------
    breakpoints : tuple of float
        Strictly increasing positive right endpoints of the pieces.
    values : tuple of float
        Value on each piece.
    """

    breakpoints: tuple
    values: tuple
    sup_norm: float = field(init=False)

    def __post_init__(self):
        b = tuple(float(x) for x in self.breakpoints)
        v = tuple(float(x) for x in self.values)
        if len(b) != len(v):
            raise ValueError("breakpoints and values must have equal length")
        if any(x <= 0 for x in b) or any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise ValueError("breakpoints must be positive and strictly increasing")
        if not all(math.isfinite(x) for x in b + v):
            raise ValueError("non-finite potential data")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "sup_norm", max((abs(x) for x in v), default=0.0))

    @classmethod
    def zero(cls) -> RadialPotential:
        return cls((), ())

    @classmethod
    def step(cls, value: float, radius: float) -> RadialPotential:
        """``value`` on ``(0, radius]``: a barrier for positive, a well for negative values."""
        return cls((radius,), (value,))

    @property
    def pieces(self):
        """List of ``(r_left, r_right, value)``."""
        left = (0.0,) + self.breakpoints[:-1]
        return list(zip(left, self.breakpoints, self.values))

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if not self.breakpoints:
            return np.zeros_like(r)
        idx = np.searchsorted(np.asarray(self.breakpoints), r, side="left")
        vals = np.append(np.asarray(self.values), 0.0)
        return vals[idx]

    def piece_index(self, r: float) -> int:
        """Index of the piece containing ``r`` (``len(values)`` past the support)."""
        return int(np.searchsorted(np.asarray(self.breakpoints), r, side="left"))


@dataclass(frozen=True)
class EnergyWindow:
    e_min: float
    e_max: float
    samples: tuple = ()

    def __post_init__(self):
        if not 0 < self.e_min <= self.e_max:
            raise ValueError("need 0 < e_min <= e_max")
        if any(not self.e_min <= e <= self.e_max for e in self.samples):
            raise ValueError("energy sample outside the window")

    @classmethod
    def uniform(cls, e_min, e_max, count):
        return cls(e_min, e_max, tuple(np.linspace(e_min, e_max, count)))


def support_radius(V: RadialPotential) -> float:
    """Largest breakpoint closing a piece with a nonzero value (0 for ``V = 0``)."""
    for b, v in zip(reversed(V.breakpoints), reversed(V.values)):
        if v != 0.0:
            return b
    return 0.0


def m_zero(V: RadialPotential, E: float) -> float:
    """Least ``m`` with ``V + m/r^2 - E >= 0`` a.e. near ``(0, R0]``.

    On each piece ``r^2 (E - v)_+`` is largest at the right endpoint, so the
    infimum is a maximum over pieces inside the support, then maximized with
    ``E R0^2`` because the condition must also hold just beyond ``R0``.
    """
    if E <= 0:
        raise ValueError("E must be positive")
    R0 = support_radius(V)
    if R0 == 0.0:
        return 0.0
    best = E * R0 * R0
    for (_, right, v) in V.pieces:
        if right > R0:
            break
        best = max(best, right * right * max(E - v, 0.0))
    return best


def r_one(V: RadialPotential, E: float) -> float:
    """``sqrt(m_zero(V, E) / E)``; never smaller than the support radius."""
    return math.sqrt(m_zero(V, E) / E)


def m_plus(V: RadialPotential, E: float, R: float) -> float:
    """``M0 + E (R^2 - R1^2) / 2`` for an exterior radius ``R >= R1``."""
    m0 = m_zero(V, E)
    r1 = math.sqrt(m0 / E)
    if R < r1 * (1 - 1e-12):
        raise InvalidRadius(f"exterior radius {R} is below R1 = {r1}")
    return m0 + E * (R * R - r1 * r1) / 2.0


def parse_potential(spec: str) -> RadialPotential:
    """Named presets ``zero``, ``well:<depth>:<radius>``, ``barrier:<height>:<radius>``, or a file path."""
    spec = spec.strip()
    if spec == "zero":
        return RadialPotential.zero()
    head, _, rest = spec.partition(":")
    if head in ("well", "barrier") and rest:
        amp, _, radius = rest.partition(":")
        amp, radius = float(amp), float(radius)
        return RadialPotential.step(-abs(amp) if head == "well" else abs(amp), radius)
    return load_potential(spec)


def load_potential(path) -> RadialPotential:
    """Read ``r_left r_right value`` lines; gaps between pieces are filled with zero."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        a, b, v = (float(t) for t in line.split())
        rows.append((a, b, v))
    rows.sort()
    breaks, vals = [], []
    cursor = 0.0
    for a, b, v in rows:
        if a < cursor - 1e-15 or b <= a:
            raise ValueError(f"overlapping or empty piece ({a}, {b}]")
        if a > cursor:
            breaks.append(a)
            vals.append(0.0)
        breaks.append(b)
        vals.append(v)
        cursor = b
    return RadialPotential(tuple(breaks), tuple(vals))


def write_potential(V: RadialPotential, path) -> None:
    lines = [f"{a!r} {b!r} {v!r}" for a, b, v in V.pieces]
    Path(path).write_text("\n".join(lines) + "\n")
