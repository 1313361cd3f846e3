"""Mellin transform on a logarithmic grid and the near-origin decomposition ``u = Pi + E``.

With ``r = e^x`` the transform ``M(u)(tau + i t) = int r^{i sigma} u dr / r``
is the Fourier transform of ``e^{-t x} u(e^x)``. On a uniform periodic
``x`` grid the FFT realizes it with an exact discrete Parseval identity.

For ``Q_m = -d^2/dr^2 + m h^-2 r^-2`` one has
``M(r^2 Q_m u)(sigma) = p(sigma) M(u)(sigma)`` with
``p(sigma) = sigma^2 - i sigma + m h^-2``, whose zeros are ``sigma = i t_+-``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LogGrid",
    "MellinLine",
    "MultiplierSpec",
    "PiPart",
    "Decomposition",
    "MellinDomainError",
    "PoleError",
    "SupportLeakageWarning",
    "NearPoleWarning",
    "LogResonanceWarning",
    "mellin_forward",
    "mellin_inverse",
    "mellin_at",
    "t_pm",
    "lambda_bound",
    "t0_choice",
    "multiplier",
    "multiplier_sup",
    "decompose",
    "r2_qm",
    "smooth_cutoff",
    "vanishing_residue",
    "parseval_relerr",
    "manufactured",
    "reconstruction_relerr",
]

LEAK_TOL = 1e-12
POLE_TOL = 1e-3


class MellinDomainError(ValueError):
    """``m < -h^2/4``."""


class PoleError(ValueError):
    """``t`` coincides with ``t_-`` or ``t_+``."""


class SupportLeakageWarning(UserWarning):
    """Weighted samples do not decay at the grid ends."""


class NearPoleWarning(UserWarning):
    """Contour within ``1e-3`` of a zero of the multiplier denominator."""


class LogResonanceWarning(UserWarning):
    """``t_+ - t_-`` below ``1e-3`` but not exactly degenerate."""


@dataclass(frozen=True)
class LogGrid:
    """Samples ``u(e^{x_j})`` at ``x_j = x_min + j (x_max - x_min) / count``, ``j < count``.

    The grid is periodic: ``x_max`` itself is not a node.
    """

    x_min: float
    x_max: float
    count: int
    samples: np.ndarray

    def __post_init__(self):
        if self.count < 64 or self.count & (self.count - 1):
            raise ValueError("count must be a power of two >= 64")
        if self.x_max <= self.x_min:
            raise ValueError("need x_max > x_min")
        if np.shape(self.samples) != (self.count,):
            raise ValueError("samples must have length count")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.count

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.count)

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.x)

    @classmethod
    def from_function(cls, f, x_min=-30.0, x_max=30.0, count=4096, in_x=False) -> LogGrid:
        """Sample ``f(r)`` (or ``f(x)`` if ``in_x``) on the grid."""
        x = x_min + (x_max - x_min) / count * np.arange(count)
        vals = f(x) if in_x else f(np.exp(x))
        return cls(x_min, x_max, count, np.asarray(vals, dtype=complex))

    def weighted_norm(self, t: float) -> float:
        """``||r^{-t-1/2} u||_{L^2(dr)} = ||e^{-t x} u||_{L^2(dx)}`` by the trapezoid rule."""
        g = np.exp(-t * self.x) * self.samples
        return math.sqrt(self.dx * float(np.sum(np.abs(g) ** 2)))


@dataclass(frozen=True)
class MellinLine:
    """``M(u)(tau + i t)`` at the FFT frequencies ``tau``; remembers its originating grid."""

    t: float
    tau: np.ndarray
    values: np.ndarray
    x_min: float = 0.0
    x_max: float = 1.0

    def l2_norm(self) -> float:
        dtau = abs(self.tau[1] - self.tau[0])
        return math.sqrt(dtau * float(np.sum(np.abs(self.values) ** 2)))


def _check_leak(g, what):
    a = np.abs(g)
    peak = a.max()
    if peak == 0:
        return
    k = max(1, a.size // 256)
    if max(a[:k].max(), a[-k:].max()) > LEAK_TOL * peak:
        warnings.warn(f"{what} does not decay at the grid ends", SupportLeakageWarning, stacklevel=3)


def mellin_forward(u: LogGrid, t: float) -> MellinLine:
    """FFT of ``e^{-t x} u(e^x)``; ``||M u|| = sqrt(2 pi) ||r^{-t-1/2} u||`` holds exactly for the grid sums."""
    x = u.x
    g = np.exp(-t * x) * u.samples
    _check_leak(g, "weighted input")
    n, dx = u.count, u.dx
    tau = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    vals = dx * n * np.fft.ifft(g) * np.exp(1j * tau * u.x_min)
    return MellinLine(t, tau, vals, u.x_min, u.x_max)


def mellin_inverse(line: MellinLine, t: float | None = None) -> LogGrid:
    """``(1/2 pi) int r^{-i sigma} v(sigma) d tau`` on ``Im sigma = t`` back on the originating grid."""
    if t is not None and t != line.t:
        raise ValueError("inverse must use the line's own t")
    n = line.tau.size
    dx = (line.x_max - line.x_min) / n
    x = line.x_min + dx * np.arange(n)
    g = np.fft.fft(line.values * np.exp(-1j * line.tau * line.x_min)) / (dx * n)
    return LogGrid(line.x_min, line.x_max, n, np.exp(line.t * x) * g)


def mellin_at(u: LogGrid, sigma: complex, log_power: int = 0) -> complex:
    """``M((log r)^k u)(sigma)`` at one complex ``sigma`` by the (spectrally accurate) trapezoid rule."""
    x = u.x
    g = np.exp(1j * sigma * x) * u.samples * x**log_power
    return complex(u.dx * np.sum(g))


def parseval_relerr(u: LogGrid, line: MellinLine, reference: float | None = None) -> float:
    """``| ||M u|| / sqrt(2 pi) - ||r^{-t-1/2} u|| |`` relative to ``reference`` (default: the grid norm)."""
    ref = u.weighted_norm(line.t) if reference is None else reference
    if ref == 0:
        return line.l2_norm()
    return abs(line.l2_norm() / math.sqrt(2 * np.pi) - ref) / ref


# multiplier --------------------------------------------------------------------


def t_pm(m: float, h: float) -> tuple[float, float]:
    """Roots ``(1 -+ sqrt(1 + 4 m / h^2)) / 2`` of ``t^2 - t - m/h^2``."""
    disc = 1.0 + 4.0 * m / (h * h)
    if disc < -1e-12:
        raise MellinDomainError("m must be >= -h^2/4")
    s = math.sqrt(max(disc, 0.0))
    return (1.0 - s) / 2.0, (1.0 + s) / 2.0


def lambda_bound(t: float, m: float, h: float) -> float:
    """``|t^2 - t - m/h^2|^{-1}``."""
    d = abs(t * t - t - m / (h * h))
    if d == 0.0:
        raise PoleError(f"t = {t} is a root of t^2 - t - m/h^2")
    return 1.0 / d


def t0_choice(m: float, h: float) -> float:
    """Contour height ``-1/2`` for ``m <= h^2/4`` and ``1`` above."""
    return -0.5 if m <= h * h / 4.0 else 1.0


def multiplier(tau, t0: float, m: float, h: float) -> np.ndarray:
    """``1 / p(tau + i t0)``."""
    s = np.asarray(tau) + 1j * t0
    return 1.0 / (s * s - 1j * s + m / (h * h))


def multiplier_sup(t0: float, m: float, h: float, tau=None) -> float:
    """``sup_tau |p(tau + i t0)|^{-1}``.

    ``|p|^2 = (A + tau^2)^2 + tau^2 (2 t0 - 1)^2`` with ``A = -t0^2 + t0 + m/h^2``
    is minimized at ``tau^2 = max(0, -A - (2t0-1)^2 / 2)``; ``tau`` samples, if
    given, are included in the maximum.
    """
    A = -t0 * t0 + t0 + m / (h * h)
    B = (2 * t0 - 1) ** 2
    s = max(0.0, -A - B / 2.0)
    best = 1.0 / math.sqrt((A + s) ** 2 + B * s)
    if tau is not None:
        best = max(best, float(np.max(np.abs(multiplier(tau, t0, m, h)))))
    return best


@dataclass(frozen=True)
class MultiplierSpec:
    """``t_+-`` and ``Lambda(t, m)`` for one channel."""

    m: float
    h: float
    t: float
    t_minus: float = field(init=False)
    t_plus: float = field(init=False)
    lambda_bound: float = field(init=False)

    def __post_init__(self):
        tm, tp = t_pm(self.m, self.h)
        object.__setattr__(self, "t_minus", tm)
        object.__setattr__(self, "t_plus", tp)
        object.__setattr__(self, "lambda_bound", lambda_bound(self.t, self.m, self.h))


# decomposition -----------------------------------------------------------------


@dataclass(frozen=True)
class PiPart:
    """``sum_k c_k r^{a_k} (log r)^{p_k}``; ``case`` names the branch of the case table."""

    case: str
    exponents: tuple = ()
    coefficients: tuple = ()
    log_powers: tuple = ()

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        lr = np.log(r)
        for a, c, p in zip(self.exponents, self.coefficients, self.log_powers):
            out += c * np.exp(a * lr) * lr**p
        return out


@dataclass(frozen=True)
class Decomposition:
    pi_part: PiPart
    e_part: LogGrid


def _is_degenerate(m: float, h: float) -> bool:
    return abs(1.0 + 4.0 * m / (h * h)) <= 1e-14


def decompose(v: LogGrid, t0: float, m: float, h: float) -> Decomposition:
    """Split ``u`` (with ``v = r^2 Q_m u``) into residue terms and a contour integral on ``Im sigma = t0``.

    ``E = M^{-1}_{t0}[M(v) / p]`` and ``Pi = i sum Res`` over the zeros of
    ``p`` below the contour.
    """
    tm, tp = t_pm(m, h)
    degenerate = _is_degenerate(m, h)
    if min(abs(t0 - tm), abs(t0 - tp)) == 0.0:
        raise PoleError("contour passes through a root")
    if min(abs(t0 - tm), abs(t0 - tp)) < POLE_TOL:
        warnings.warn("contour within 1e-3 of a root", NearPoleWarning, stacklevel=2)
    if not degenerate and tp - tm < POLE_TOL:
        warnings.warn("roots nearly coincide; residues are ill-conditioned", LogResonanceWarning, stacklevel=2)
    line = mellin_forward(v, t0)
    e_line = MellinLine(t0, line.tau, line.values * multiplier(line.tau, t0, m, h), line.x_min, line.x_max)
    e_part = mellin_inverse(e_line)
    if t0 < tm:
        pi = PiPart("zero")
    elif degenerate:
        a = mellin_at(v, 0.5j)
        b = mellin_at(v, 0.5j, log_power=1)
        pi = PiPart("log-resonant", (0.5, 0.5), (a, -b), (1, 0))
    elif t0 < tp:
        c = mellin_at(v, 1j * tm) / (tm - tp)
        pi = PiPart("one-residue", (tm,), (c,), (0,))
    else:
        cm = mellin_at(v, 1j * tm) / (tm - tp)
        cp = mellin_at(v, 1j * tp) / (tp - tm)
        pi = PiPart("two-residues", (tm, tp), (cm, cp), (0, 0))
    return Decomposition(pi, e_part)


def r2_qm(u: LogGrid, m: float, h: float) -> LogGrid:
    """``r^2 Q_m u = -(d_x^2 - d_x) u + (m/h^2) u`` by spectral differentiation in ``x``."""
    k = 2.0 * np.pi * np.fft.fftfreq(u.count, d=u.dx)
    U = np.fft.fft(u.samples)
    d1 = np.fft.ifft(1j * k * U)
    d2 = np.fft.ifft(-(k * k) * U)
    return LogGrid(u.x_min, u.x_max, u.count, -(d2 - d1) + (m / (h * h)) * u.samples)


# vanishing residue --------------------------------------------------------------


def smooth_cutoff(s):
    """``chi(s)``: 1 on ``[0, 1]``, 0 on ``[2, inf)``, smooth; returns ``(chi, chi', chi'')``."""
    s = np.asarray(s, dtype=float)
    y = np.clip(s - 1.0, 0.0, 1.0)

    def psi(t):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            f = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
            df = np.where(t > 0, f / np.where(t > 0, t, 1.0) ** 2, 0.0)
            tt = np.where(t > 0, t, 1.0)
            d2f = np.where(t > 0, f * (1.0 - 2.0 * tt) / tt**4, 0.0)
        return f, df, d2f

    a, da, d2a = psi(1.0 - y)
    b, db, d2b = psi(y)
    den = a + b
    chi = a / den
    # derivatives with respect to y, da/dy = -psi'(1-y), db/dy = psi'(y)
    a1, b1 = -da, db
    a2, b2 = d2a, d2b
    num1 = a1 * den - a * (a1 + b1)
    chi1 = num1 / den**2
    den1 = a1 + b1
    den2 = a2 + b2
    chi2 = (a2 * den - a * den2) / den**2 - 2.0 * den1 * num1 / den**3
    inside = (s > 1.0) & (s < 2.0)
    chi1 = np.where(inside, chi1, 0.0)
    chi2 = np.where(inside, chi2, 0.0)
    return chi, chi1, chi2


def vanishing_residue(pair, V, delta0: float = 0.1, order: int = 8) -> tuple[complex, float]:
    """``M(r^2 Q_m (chi u0))(i t_-)`` and the absolute size of its integrand.

    ``chi = chi(r / delta_1)`` with ``delta_1 = max(delta0 h <m/h^2>^{1/2}, 1/2)``.
    Since ``Q_m u0 = h^-2 (z - V) u0``,
    ``r^2 Q_m(chi u0) = chi r^2 h^-2 (z - V) u0 - r^2 (2 chi' u0' + chi'' u0)``.
    The integral ``int r^{-t_- - 1} (...) dr`` uses sixth-order interval weights on the
    solver grid (Gauss-Legendre on every interval, quintic Hermite ``u0``);
    for a function in the Friedrichs domain it vanishes.
    """
    from .radial_solver import curvature

    ch = pair.channel
    h = ch.h
    tm, _ = t_pm(ch.m, h)
    delta = delta0 * h * (1.0 + (ch.m / (h * h)) ** 2) ** 0.25
    d1 = max(delta, 0.5)
    top = 2.0 * d1
    grid = pair.grid
    if grid[-1] < top * (1 - 1e-9):
        raise ValueError("solver grid does not cover the cutoff support")
    nodes = grid[grid < top]
    edges = np.append(nodes, top)
    gx, gw = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    r = (0.5 * (b - a) * gx + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * gw).ravel()
    mu, su, dmu = pair.u0.interp(r, curvature(ch, V), derivative=True)
    ref = np.max(su)
    e = np.exp(su - ref)
    u, du = mu * e, dmu * e
    chi, c1, c2 = smooth_cutoff(r / d1)
    c1, c2 = c1 / d1, c2 / d1**2
    v = chi * r * r * (ch.z - V(r)) / (h * h) * u - r * r * (2.0 * c1 * du + c2 * u)
    g = r ** (-tm - 1.0) * v
    return complex(np.sum(w * g)), float(np.sum(w * np.abs(g)))


def manufactured(m: float, h: float, c_minus=1.0, c_plus=0.7, x_min=-60.0, x_max=60.0, count=2**14):
    """Test pair ``(u, v = r^2 Q_m u)`` on a log grid, both in closed form.

    ``u = b + (c_- r^{t_-} + c_+ r^{t_+}) chi`` with a Gaussian bump ``b`` in
    ``x = log r`` and the smooth step ``chi = erfc((x - 1)/0.7)/2``. Since
    ``r^{t_+-}`` solve ``Q_m w = 0``, ``v`` only involves ``b`` and ``chi'``,
    ``chi''``. At ``m = -h^2/4`` the second homogeneous solution is
    ``r^{1/2} log r``.
    """
    from scipy import special

    tm, tp = t_pm(m, h)
    M = m / (h * h)
    x = x_min + (x_max - x_min) / count * np.arange(count)
    chi = 0.5 * special.erfc((x - 1.0) / 0.7)
    c1 = -np.exp(-(((x - 1.0) / 0.7) ** 2)) / (0.7 * math.sqrt(math.pi))
    c2 = c1 * (-2.0 * (x - 1.0) / 0.49)
    b = np.exp(-((x - 0.3) ** 2) / 2.0)
    bx = -(x - 0.3) * b
    bxx = ((x - 0.3) ** 2 - 1.0) * b
    u = b.astype(complex)
    v = (-(bxx - bx) + M * b).astype(complex)
    if _is_degenerate(m, h):
        # w = e^{x/2}(c_- + c_+ x): -(w_xx - w_x) + w/4 = 0
        w = np.exp(0.5 * x) * (c_minus + c_plus * x)
        wx = 0.5 * w + np.exp(0.5 * x) * c_plus
        u += w * chi
        v += -(2.0 * wx * c1 + w * c2) + w * c1
        return LogGrid(x_min, x_max, count, u), LogGrid(x_min, x_max, count, v)
    for t, c in ((tm, c_minus), (tp, c_plus)):
        e = np.exp(t * x)
        u += c * e * chi
        v += c * e * (-(2.0 * t - 1.0) * c1 - c2)
    return LogGrid(x_min, x_max, count, u), LogGrid(x_min, x_max, count, v)


def reconstruction_relerr(u: LogGrid, dec: Decomposition, t0: float) -> float:
    """``max |r^{-t0}(Pi + E - u)| / max |r^{-t0} u|`` on the grid."""
    w = np.exp(-t0 * u.x)
    rec = dec.e_part.samples + dec.pi_part(u.r)
    return float(np.max(np.abs((rec - u.samples) * w)) / np.max(np.abs(u.samples * w)))
