"""
Bessel and Airy functions for the radial solver.

Values that can leave the double range (``J_nu`` and ``Y_nu`` for large order
and small argument, ``Bi`` on the positive axis, Hankel functions with a
large imaginary argument) are returned in scaled form: a mantissa of order
one together with a real logarithmic scale, ``value = mantissa * exp(scale)``.

Two routes produce ``J_nu`` and ``Y_nu``:

* ``|x| >= nu`` or ``nu < 1``: the AMOS routines in :mod:`scipy.special`
  (exponentially scaled variants, so complex arguments do not overflow).
* ``|x| < nu``: ``Y`` by forward recurrence from the fractional order (the
  stable direction for the dominant solution), ``J_{nu+1}/J_nu`` by a
  continued fraction, and ``J`` from the Wronskian.

The uniform (Airy-type) large-order forms are implemented separately in
:func:`uniform_jy` so that they can be checked against the direct route.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "PrecisionWarning",
    "Scaled",
    "BesselEval",
    "AiryEval",
    "TurningPointMap",
    "bessel_jy",
    "airy",
    "turning_map",
    "uniform_jy",
    "hankel_outgoing",
    "combine_scaled",
    "EnvelopeRatios",
    "envelope_ratios",
]

_TINY = 1e-300
_CF_EPS = 1e-16


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class PrecisionWarning(RuntimeWarning):
    """Cancellation detected beyond the working tolerance."""


@dataclass(frozen=True)
class Scaled:
    """Array ``mantissa * exp(log_scale)``, optionally with a derivative.

    The derivative shares the scale: ``d/dr value = d_mantissa * exp(log_scale)``.
    """

    mantissa: np.ndarray
    log_scale: np.ndarray
    d_mantissa: np.ndarray | None = None

    def value(self) -> np.ndarray:
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            return self.mantissa * np.exp(self.log_scale)

    def derivative(self) -> np.ndarray:
        if self.d_mantissa is None:
            raise ValueError("no derivative stored")
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            return self.d_mantissa * np.exp(self.log_scale)

    def log_abs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mantissa)) + self.log_scale


def combine_scaled(a, sa, b, sb):
    """Return ``(m, s)`` with ``m*exp(s) = a*exp(sa) + b*exp(sb)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    sa = np.asarray(sa, dtype=float)
    sb = np.asarray(sb, dtype=float)
    s = np.maximum(sa, sb)
    with np.errstate(under="ignore"):
        m = a * np.exp(sa - s) + b * np.exp(sb - s)
    return m, s


@dataclass(frozen=True)
class BesselEval:
    """``J_nu(x)``, ``Y_nu(x)`` and derivatives in scaled form.

    ``J_nu(x) = j * exp(j_log_scale)`` and ``J_nu'(x) = j_prime * exp(j_log_scale)``;
    likewise for ``Y`` with ``y_log_scale``.
    """

    order: float
    argument: np.ndarray
    j: np.ndarray
    y: np.ndarray
    j_prime: np.ndarray
    y_prime: np.ndarray
    j_log_scale: np.ndarray
    y_log_scale: np.ndarray
    precision_loss: np.ndarray = field(default=None)

    def values(self):
        """Unscaled ``(J, Y, J', Y')``; entries may under/overflow."""
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            ej = np.exp(self.j_log_scale)
            ey = np.exp(self.y_log_scale)
            return self.j * ej, self.y * ey, self.j_prime * ej, self.y_prime * ey

    def wronskian_relerr(self) -> np.ndarray:
        """Relative deviation of ``J Y' - Y J'`` from ``2/(pi x)``."""
        x = self.argument
        w = self.j * self.y_prime - self.y * self.j_prime
        w = w * np.exp(self.j_log_scale + self.y_log_scale)
        return np.abs(w * (np.pi * x / 2.0) - 1.0)


def _as_argument(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return x.astype(complex)
    return x.astype(float)


def _jy_scipy(nu, x):
    # exponentially scaled AMOS values share the factor exp(|Im x|)
    jn = special.jve(nu, x)
    jn1 = special.jve(nu + 1.0, x)
    yn = special.yve(nu, x)
    yn1 = special.yve(nu + 1.0, x)
    jp = (nu / x) * jn - jn1
    yp = (nu / x) * yn - yn1
    scale = np.abs(np.imag(x)) * np.ones(np.shape(x))
    return jn, yn, jp, yp, scale, scale.copy(), np.zeros(np.shape(x), dtype=bool)


def _ratio_cf1(nu, x, max_iter=None):
    """``J_{nu+1}(x)/J_nu(x)`` by modified Lentz on the backward-recurrence fraction."""
    x = np.asarray(x)
    if max_iter is None:
        max_iter = 20000 + int(4 * np.max(np.abs(x)))
    f = np.full(x.shape, _TINY, dtype=x.dtype)
    c = f.copy()
    d = np.zeros_like(f)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, max_iter + 1):
        a = 1.0 if k == 1 else -1.0
        b = 2.0 * (nu + k) / x
        d_new = b + a * d
        d_new = np.where(d_new == 0, _TINY, d_new)
        c_new = b + a / c
        c_new = np.where(c_new == 0, _TINY, c_new)
        d_new = 1.0 / d_new
        delta = c_new * d_new
        f = np.where(active, f * delta, f)
        c = np.where(active, c_new, c)
        d = np.where(active, d_new, d)
        active &= np.abs(delta - 1.0) > _CF_EPS
        if not active.any():
            return f
    raise ArithmeticError(f"continued fraction for J ratio did not converge (nu={nu})")


def _jy_recurrence(nu, x):
    mu = nu - math.floor(nu)
    nsteps = int(math.floor(nu))
    prev = special.yve(mu, x)
    cur = special.yve(mu + 1.0, x)
    scale = np.abs(np.imag(x)).astype(float) * np.ones(np.shape(x))
    norm = np.abs(cur)
    prev, cur = prev / norm, cur / norm
    scale = scale + np.log(norm)
    order = mu + 1.0
    for _ in range(nsteps - 1):
        nxt = (2.0 * order / x) * cur - prev
        norm = np.abs(nxt)
        prev, cur = cur / norm, nxt / norm
        scale = scale + np.log(norm)
        order += 1.0
    # cur = Y_nu, prev = Y_{nu-1} (common scale)
    y_next = (2.0 * nu / x) * cur - prev
    yp = prev - (nu / x) * cur
    rho = _ratio_cf1(nu, x)
    den = rho * cur - y_next
    loss = np.abs(den) < 1e-8 * (np.abs(rho * cur) + np.abs(y_next))
    jn = (2.0 / (np.pi * x)) / den
    jp = (nu / x - rho) * jn
    return jn, cur, jp, yp, -scale, scale, loss


def bessel_jy(nu: float, x, need_derivatives: bool = True) -> BesselEval:
    """Bessel functions of the first and second kind of real order ``nu >= 0``.

    Parameters
    ----------
    nu : float
        Order, ``nu >= 0``.
    x : array_like
        Argument(s), nonzero, with ``Im x >= 0``. Real input gives real output.
    need_derivatives : bool
        Kept for interface symmetry; derivatives come for free from the
        recurrences and are always filled in.

    Returns
    -------
    BesselEval
    """
    nu = float(nu)
    if not np.isfinite(nu) or nu < 0:
        raise DomainError(f"order must be finite and >= 0, got {nu}")
    if nu < 1e-300:
        nu = 0.0  # AMOS returns nan for subnormal orders; the difference is below rounding
    xa = _as_argument(x)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    if np.any(xa == 0):
        raise DomainError("argument must be nonzero")
    if np.iscomplexobj(xa) and np.any(xa.imag < 0):
        raise DomainError("complex argument must satisfy Im x >= 0")
    if not np.iscomplexobj(xa) and np.any(xa < 0):
        raise DomainError("real argument must be positive")

    out = [np.empty(xa.shape, dtype=xa.dtype) for _ in range(4)]
    js = np.empty(xa.shape)
    ys = np.empty(xa.shape)
    loss = np.zeros(xa.shape, dtype=bool)
    small = (np.abs(xa) < nu) & (nu >= 1.0)
    for mask, route in ((~small, _jy_scipy), (small, _jy_recurrence)):
        if not mask.any():
            continue
        jn, yn, jp, yp, sj, sy, lo = route(nu, xa[mask])
        for arr, val in zip(out, (jn, yn, jp, yp)):
            arr[mask] = val
        js[mask] = sj
        ys[mask] = sy
        loss[mask] = lo
    if loss.any():
        warnings.warn(f"cancellation in Bessel evaluation at order {nu}", PrecisionWarning, stacklevel=2)
    if scalar:
        out = [o[0] for o in out]
        xa, js, ys, loss = xa[0], js[0], ys[0], loss[0]
    return BesselEval(nu, xa, out[0], out[1], out[2], out[3], js, ys, loss)


@dataclass(frozen=True)
class AiryEval:
    """Airy functions; ``Ai = ai*exp(ai_log_scale)``, ``Bi = bi*exp(bi_log_scale)``.

    The derivatives share the scale of their function.
    """

    x: np.ndarray
    ai: np.ndarray
    bi: np.ndarray
    ai_prime: np.ndarray
    bi_prime: np.ndarray
    ai_log_scale: np.ndarray
    bi_log_scale: np.ndarray
    overflow: np.ndarray

    def values(self):
        with np.errstate(over="ignore", under="ignore"):
            ea = np.exp(self.ai_log_scale)
            eb = np.exp(self.bi_log_scale)
            return self.ai * ea, self.bi * eb, self.ai_prime * ea, self.bi_prime * eb


def airy(x) -> AiryEval:
    """Airy functions ``Ai, Bi`` and derivatives for real ``x``.

    For ``x > 0`` the exponential factor ``exp(-/+ 2/3 x^{3/2})`` is split off
    into the log scales; ``overflow`` marks points where the unscaled ``Bi``
    or ``Bi'`` is not representable.
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("Airy argument must be finite")
    pos = xa > 0
    ai, aip, bi, bip = special.airy(np.where(pos, 0.0, xa))
    eai, eaip, ebi, ebip = special.airye(np.where(pos, xa, 0.0))
    zeta = np.where(pos, 2.0 / 3.0 * np.abs(xa) ** 1.5, 0.0)
    ai = np.where(pos, eai, ai)
    aip = np.where(pos, eaip, aip)
    bi = np.where(pos, ebi, bi)
    bip = np.where(pos, ebip, bip)
    with np.errstate(divide="ignore"):
        big = zeta + np.log(np.maximum(np.abs(bi), np.abs(bip)) + _TINY)
    overflow = big > 709.0
    return AiryEval(xa, ai, bi, aip, bip, -zeta, zeta, overflow)


@dataclass(frozen=True)
class TurningPointMap:
    """Olver variable ``zeta(z)`` and the exponent integral ``xi(z)`` (nan for ``z > 1``)."""

    z: np.ndarray
    zeta: np.ndarray
    xi: np.ndarray


def _xi_below(s):
    # xi = atanh(s) - s with s = sqrt(1 - z^2); series for small s
    out = np.arctanh(np.minimum(s, np.nextafter(1.0, 0.0))) - s
    small = s < 0.1
    if np.any(small):
        ss = s[small]
        acc = np.zeros_like(ss)
        term = ss**3
        for k in range(1, 12):
            acc += term / (2 * k + 1)
            term = term * ss * ss
        out[small] = acc
    return out


def _eta_above(q):
    # integral_1^z sqrt(t^2-1)/t dt = q - arctan(q) with q = sqrt(z^2 - 1)
    out = q - np.arctan(q)
    small = q < 0.1
    if np.any(small):
        qq = q[small]
        acc = np.zeros_like(qq)
        term = qq**3
        for k in range(1, 12):
            acc += (-1) ** (k + 1) * term / (2 * k + 1)
            term = term * qq * qq
        out[small] = acc
    return out


def turning_map(z) -> TurningPointMap:
    """Olver's turning-point variable for ``J_nu(nu z)``.

    ``zeta`` is positive for ``z < 1``, zero at ``z = 1`` and negative beyond;
    ``xi = (2/3) zeta^{3/2}`` on ``z <= 1``.
    """
    za = np.asarray(z, dtype=float)
    if np.any(za <= 0):
        raise DomainError("z must be positive")
    zf = np.atleast_1d(za)
    below = zf <= 1.0
    xi = np.full(zf.shape, np.nan)
    zeta = np.empty(zf.shape)
    s = np.sqrt(np.maximum(1.0 - zf[below] ** 2, 0.0))
    # ln((1+s)/z) - s, written as atanh(s) - s; for tiny z use the log form directly
    xb = _xi_below(s)
    tiny = zf[below] < 1e-8
    if np.any(tiny):
        zt = zf[below][tiny]
        xb[tiny] = np.log((1.0 + s[tiny]) / zt) - s[tiny]
    xi[below] = xb
    zeta[below] = (1.5 * xb) ** (2.0 / 3.0)
    q = np.sqrt(np.maximum(zf[~below] ** 2 - 1.0, 0.0))
    zeta[~below] = -((1.5 * _eta_above(q)) ** (2.0 / 3.0))
    if za.ndim == 0:
        return TurningPointMap(float(za), float(zeta[0]), float(xi[0]))
    return TurningPointMap(za, zeta.reshape(za.shape), xi.reshape(za.shape))


def _b0_c0_direct(z, zeta):
    with np.errstate(divide="ignore", invalid="ignore"):
        return _b0_c0_formula(z, zeta)


def _b0_c0_formula(z, zeta):
    w = 1.0 - z * z
    b0 = np.empty_like(z)
    c0 = np.empty_like(z)
    lo = z < 1.0
    zl, wl, tl = z[lo], w[lo], zeta[lo]
    b0[lo] = -5.0 / (48.0 * tl**2) + tl**-0.5 * (5.0 / (24.0 * wl**1.5) - 1.0 / (8.0 * wl**0.5))
    c0[lo] = 7.0 / (48.0 * tl) + tl**0.5 * (-7.0 / (24.0 * wl**1.5) + 3.0 / (8.0 * wl**0.5))
    hi = ~lo
    wh, th = -w[hi], zeta[hi]
    b0[hi] = -5.0 / (48.0 * th**2) + (-th) ** -0.5 * (5.0 / (24.0 * wh**1.5) + 1.0 / (8.0 * wh**0.5))
    c0[hi] = 7.0 / (48.0 * th) + (-th) ** 0.5 * (7.0 / (24.0 * wh**1.5) + 3.0 / (8.0 * wh**0.5))
    return b0, c0


_GAP = 0.1
_FIT_NODES = np.array([-0.3, -0.24, -0.18, -0.13, 0.13, 0.18, 0.24, 0.3, -0.1, 0.1])


def _b0_c0(z):
    """First Olver correction coefficients; interpolated across ``z = 1`` where the formula cancels."""
    z = np.asarray(z, dtype=float)
    zeta = turning_map(z).zeta
    b0, c0 = _b0_c0_direct(z, np.asarray(zeta))
    near = np.abs(z - 1.0) < _GAP
    if np.any(near):
        nodes = 1.0 + _FIT_NODES
        tn = np.asarray(turning_map(nodes).zeta)
        bn, cn = _b0_c0_direct(nodes, tn)
        pb = np.polynomial.Polynomial.fit(_FIT_NODES, bn, len(nodes) - 1)
        pc = np.polynomial.Polynomial.fit(_FIT_NODES, cn, len(nodes) - 1)
        b0[near] = pb(z[near] - 1.0)
        c0[near] = pc(z[near] - 1.0)
    return b0, c0


def _prefactor(z, zeta):
    # (4 zeta / (1 - z^2))^{1/4}, continuous through z = 1 where it tends to 2^{1/3}
    out = np.empty_like(z)
    near = np.abs(z - 1.0) < 1e-6
    zz, tt = z[~near], zeta[~near]
    out[~near] = (4.0 * tt / (1.0 - zz * zz)) ** 0.25
    out[near] = 2.0 ** (1.0 / 3.0)
    return out


def uniform_jy(nu: float, z) -> BesselEval:
    """``J_nu(nu z)``, ``Y_nu(nu z)`` and derivatives from the Airy-type uniform forms.

    Only the leading terms and the first corrections ``B0`` (function) and
    ``C0`` (derivative) are kept, so the relative error decays like
    ``nu**-2`` away from the turning point. Derivatives are with respect to
    the Bessel argument ``x = nu z``.
    """
    nu = float(nu)
    if nu < 20:
        raise DomainError("uniform forms are used for nu >= 20")
    za = np.asarray(z, dtype=float)
    scalar = za.ndim == 0
    zf = np.atleast_1d(za)
    if np.any(zf <= 0):
        raise DomainError("z must be positive")
    zeta = np.atleast_1d(turning_map(zf).zeta)
    b0, c0 = _b0_c0(zf)
    pre = _prefactor(zf, zeta)
    arg = nu ** (2.0 / 3.0) * zeta
    a = airy(arg)
    n13, n23, n43, n53 = nu ** (1 / 3), nu ** (2 / 3), nu ** (4 / 3), nu ** (5 / 3)
    j = pre * (a.ai / n13 + b0 * a.ai_prime / n53)
    y = -pre * (a.bi / n13 + b0 * a.bi_prime / n53)
    jp = -(2.0 / zf) / pre * (c0 * a.ai / n43 + a.ai_prime / n23)
    yp = (2.0 / zf) / pre * (c0 * a.bi / n43 + a.bi_prime / n23)
    loss = np.zeros(zf.shape, dtype=bool)
    js, ys = a.ai_log_scale, a.bi_log_scale
    if scalar:
        return BesselEval(nu, nu * float(za), j[0], y[0], jp[0], yp[0], js[0], ys[0], loss[0])
    return BesselEval(nu, nu * za, j, y, jp, yp, js, ys, loss)


def _hankel_asymptotic(nu, x, kmax=60):
    """``H^(1)_nu(x)`` and ``H^(1)_{nu+1}(x)`` by the large-argument expansion (scaled by ``e^{-i x}``)."""
    out = []
    for order in (nu, nu + 1.0):
        mu4 = 4.0 * order * order
        total = np.ones_like(x, dtype=complex)
        term = np.ones_like(x, dtype=complex)
        last = np.full(x.shape, np.inf)
        for k in range(1, kmax):
            term = term * (mu4 - (2 * k - 1) ** 2) / (k * 8.0) * (1j / x)
            mag = np.abs(term)
            grow = mag > last
            term = np.where(grow, 0.0, term)
            total = total + term
            last = np.where(grow, 0.0, mag)
            if np.all(mag < 1e-17 * np.abs(total)) or not np.any(last):
                break
        phase = np.exp(1j * (-order * np.pi / 2 - np.pi / 4))
        out.append(np.sqrt(2.0 / (np.pi * x)) * phase * total)
    return out


def hankel_outgoing(nu: float, lam: complex, r) -> Scaled:
    """Outgoing solution ``r^{1/2} H^(1)_nu(lam r)`` and its ``r``-derivative, scaled.

    For ``|lam r| >= max(100, 10 nu^2)`` the large-argument expansion is used,
    for ``|lam r| >= nu`` the AMOS Hankel routine, and below the turning
    point the value is composed from :func:`bessel_jy`, where ``Y`` dominates.
    """
    lam = complex(lam)
    if lam.imag < 0:
        raise DomainError("Im lambda must be >= 0")
    ra = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(ra <= 0):
        raise DomainError("r must be positive")
    x = lam * ra
    mant = np.empty(ra.shape, dtype=complex)
    dmant = np.empty(ra.shape, dtype=complex)
    scale = np.empty(ra.shape)
    far = np.abs(x) >= max(100.0, 10.0 * nu * nu)
    if far.any():
        xf = x[far]
        h0, h1 = _hankel_asymptotic(nu, xf)
        eix = np.exp(1j * xf.real)
        hp = (nu / xf) * h0 - h1
        rf = ra[far]
        mant[far] = np.sqrt(rf) * h0 * eix
        dmant[far] = (0.5 / np.sqrt(rf) * h0 + np.sqrt(rf) * lam * hp) * eix
        scale[far] = -xf.imag
    direct = ~far & ((np.abs(x) >= nu) | (nu < 1.0))
    if direct.any():
        # AMOS H^(1) scaled by exp(-i x): no J + iY cancellation for Im x > 0
        xd = x[direct]
        h0 = special.hankel1e(nu, xd)
        h1 = special.hankel1e(nu + 1.0, xd)
        hp = (nu / xd) * h0 - h1
        eix = np.exp(1j * xd.real)
        rd = ra[direct]
        mant[direct] = np.sqrt(rd) * h0 * eix
        dmant[direct] = (0.5 / np.sqrt(rd) * h0 + np.sqrt(rd) * lam * hp) * eix
        scale[direct] = -xd.imag
    near = ~far & ~direct
    if near.any():
        xn = x[near] if lam.imag != 0 else x[near].real
        ev = bessel_jy(nu, xn)
        h, s = combine_scaled(ev.j, ev.j_log_scale, 1j * ev.y, ev.y_log_scale)
        hp, _ = combine_scaled(ev.j_prime, ev.j_log_scale, 1j * ev.y_prime, ev.y_log_scale)
        rn = ra[near]
        mant[near] = np.sqrt(rn) * h
        dmant[near] = 0.5 / np.sqrt(rn) * h + np.sqrt(rn) * lam * hp
        scale[near] = s
    return Scaled(mant, scale, dmant)


@dataclass(frozen=True)
class EnvelopeRatios:
    """Bessel values divided by their large-order envelopes.

    ``ratio_j = J_nu(nu z) nu^{1/2} e^{nu xi}`` and
    ``ratio_y = -Y_nu(nu z) nu^{1/2} e^{-nu xi}`` (nan for ``z > 1``);
    ``bound_j = |J_nu(nu z)| nu^{1/2} <z>^{1/2} e^{nu xi_+}`` with
    ``xi_+ = max(xi, 0)``.
    """

    nu: float
    z: np.ndarray
    j: np.ndarray
    y: np.ndarray
    ratio_j: np.ndarray
    ratio_y: np.ndarray
    bound_j: np.ndarray


def envelope_ratios(nu: float, z) -> EnvelopeRatios:
    """Envelope ratios at ``x = nu z``, formed in log space so huge/tiny values stay finite."""
    za = np.atleast_1d(np.asarray(z, dtype=float))
    ev = bessel_jy(nu, nu * za)
    xi = turning_map(za).xi
    xi = np.atleast_1d(xi)
    xi_p = np.where(np.isnan(xi), 0.0, xi)
    half = 0.5 * math.log(nu)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        j, y = ev.j.real, ev.y.real
        rj = np.where(za <= 1, j * np.exp(ev.j_log_scale + half + nu * xi_p), np.nan)
        ry = np.where(za <= 1, -y * np.exp(ev.y_log_scale + half - nu * xi_p), np.nan)
        bj = np.abs(j) * np.exp(ev.j_log_scale + half + nu * xi_p + 0.25 * np.log1p(za * za))
        jv = j * np.exp(ev.j_log_scale)
        yv = y * np.exp(ev.y_log_scale)
    return EnvelopeRatios(float(nu), za, jv, yv, rj, ry, bj)
