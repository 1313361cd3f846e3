"""Fundamental solutions, Wronskian and resolvent kernel of a single angular channel.

For ``P_m = -h^2 d^2/dr^2 + V + m/r^2`` at energy ``z = E + i eps``:

* ``u0`` is the solution recessive at the origin, ``u0 ~ c r^{nu + 1/2}``,
  normalized like ``phi_J(r) = r^{1/2} J_nu(lam r)``;
* ``u1`` is outgoing, equal to ``r^{1/2} H^(1)_nu(lam r)`` beyond the support
  of ``V`` and continued inward by the ODE;
* ``K(r, r') = -u0(r<) u1(r>) / (h^2 W)`` with ``W = u0 u1' - u0' u1``.

Grid functions carry a per-node logarithmic scale, so ``u0`` (tiny near 0)
and ``u1`` (huge near 0) are multiplied in log space.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as leg
from scipy.special import gammaln

from .grid import GridFunction, GridSpec, make_grid
from .potential import RadialPotential, support_radius
from .specfun import bessel_jy, combine_scaled, hankel_outgoing
from ._propagate import propagate

__all__ = [
    "Channel",
    "SolutionPair",
    "MonotonicityReport",
    "SeriesDivergence",
    "StepSizeError",
    "NumericalQualityWarning",
    "build_u0_ode",
    "build_u0_series",
    "volterra_series",
    "build_u1",
    "wronskian",
    "solve_channel",
    "channel_grid",
    "kernel_eval",
    "curvature",
    "kernel_on_grid",
    "check_u0_monotone",
]

DRIFT_TOL = 1e-6


class SeriesDivergence(RuntimeError):
    """The Volterra series tail bound did not fall below tolerance within ``n_max`` terms."""


class StepSizeError(RuntimeError):
    """The ODE integrator could not meet its tolerance; refine the grid or relax ``rtol``."""


class NumericalQualityWarning(RuntimeWarning):
    """Wronskian drift or near linear dependence beyond tolerance."""


@dataclass(frozen=True)
class Channel:
    """One angular sector ``(n, h, E, eps, m)`` with derived ``nu`` and ``lam``."""

    n: int
    h: float
    E: float
    eps: float
    m: float
    nu: float = field(init=False)
    lam: complex = field(init=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be >= 2")
        if self.h <= 0 or self.E <= 0 or self.eps < 0:
            raise ValueError("need h > 0, E > 0, eps >= 0")
        disc = self.m + self.h * self.h / 4.0
        if disc < -1e-12 * self.h * self.h:
            raise ValueError(f"m = {self.m} below -h^2/4")
        object.__setattr__(self, "nu", math.sqrt(max(disc, 0.0)) / self.h)
        lam = np.sqrt(complex(self.E, self.eps)) / self.h
        if self.eps == 0:
            lam = complex(lam.real, 0.0)
        object.__setattr__(self, "lam", lam)

    @property
    def z(self) -> complex:
        return complex(self.E, self.eps)

    @classmethod
    def from_degree(cls, n: int, h: float, E: float, eps: float, k: int) -> Channel:
        sigma = k * k + (n - 2) * k
        return cls(n, h, E, eps, h * h * (sigma + (n - 1) * (n - 3) / 4.0))


@dataclass(frozen=True)
class SolutionPair:
    """``(u0, u1)`` on a common grid and their Wronskian ``W = w_mantissa * exp(w_log_scale)``."""

    channel: Channel
    u0: GridFunction
    u1: GridFunction
    w_mantissa: complex
    w_log_scale: float
    wronskian_drift: float
    near_dependent: bool = False

    @property
    def grid(self) -> np.ndarray:
        return self.u0.grid

    @property
    def wronskian(self) -> complex:
        return self.w_mantissa * math.exp(self.w_log_scale)


@dataclass(frozen=True)
class MonotonicityReport:
    """Grid points in ``(0, R0]`` where ``u0 < -tol`` or ``u0' < -tol`` (relative to the local scale)."""

    r_negative_u: np.ndarray
    r_negative_du: np.ndarray
    checked: int

    @property
    def ok(self) -> bool:
        return self.r_negative_u.size == 0 and self.r_negative_du.size == 0


def channel_grid(
    ch: Channel, V: RadialPotential, r_max: float, points_per_wavelength: float = 24.0, extra_nodes=()
) -> np.ndarray:
    """Default grid for ``ch``: resolves the shortest local wavelength, nodes on every breakpoint.

    ``extra_nodes`` (for example a weight cutoff) are inserted like breakpoints.
    """
    v_min = min(V.values, default=0.0)
    spec = GridSpec(r_max=r_max, points_per_wavelength=points_per_wavelength)
    return make_grid(spec, ch.h, ch.E, v_min, tuple(V.breakpoints) + tuple(extra_nodes))


def _u0_initial(ch: Channel, v0: float, r: float):
    """Exact ``u0``, ``u0'`` at small ``r`` from the 0F1 series on the first (constant) piece.

    ``u0 = (lam/2)^nu / Gamma(nu+1) r^{nu+1/2} 0F1(; nu+1; -mu^2 r^2 / 4)``,
    ``mu^2 = (z - v0) / h^2``; returns ``(mantissa, d_mantissa, log_scale)``.
    """
    nu = ch.nu
    t = -(ch.z - v0) * r * r / (4.0 * ch.h * ch.h)
    s = 0.0 + 0.0j
    ds = 0.0 + 0.0j  # r d/dr of the series
    term = 1.0 + 0.0j
    k = 0
    while True:
        s += term
        ds += 2 * k * term
        k += 1
        term = term * t / (k * (nu + k))
        if abs(term) < 1e-18 * abs(s) or k > 200:
            break
    lam = ch.lam
    log_scale = nu * math.log(abs(lam) / 2.0) - gammaln(nu + 1.0) + (nu + 0.5) * math.log(r)
    phase = np.exp(1j * nu * np.angle(lam))
    mant = phase * s
    dmant = phase * ((nu + 0.5) * s + ds) / r
    return mant, dmant, log_scale


def _integrate(ch: Channel, V: RadialPotential, start: float, state, targets, rtol: float):
    """Propagate ``state = (u, u', scale)`` from ``start`` through ``targets``, restarting at breakpoints."""
    targets = np.asarray(targets, dtype=float)
    n = targets.size
    out_u = np.empty(n, dtype=complex)
    out_du = np.empty(n, dtype=complex)
    out_s = np.empty(n)
    if n == 0:
        return out_u, out_du, out_s
    outward = targets[-1] > start
    bps = np.asarray(V.breakpoints, dtype=float)
    r_c = start
    u, du, s = state
    done = 0
    while done < n:
        if outward:
            ahead = bps[bps > r_c]
            b = ahead[0] if ahead.size else math.inf
            stop = np.searchsorted(targets, b, side="right")
            mid = r_c + (min(b, targets[-1]) - r_c) / 2.0
        else:
            ahead = bps[bps < r_c]
            b = ahead[-1] if ahead.size else 0.0
            # targets are decreasing; include those >= b
            stop = done + int(np.sum(targets[done:] >= b))
            mid = r_c - (r_c - max(b, targets[-1])) / 2.0
        seg = targets[done:stop]
        extra = stop < n and (seg.size == 0 or seg[-1] != b)
        nodes = np.concatenate([[r_c], seg, [b] if extra else []])
        v = float(V(mid))
        uu, dd, ss, status = propagate(nodes, u, du, s, v, ch.m, ch.z, ch.h, rtol)
        if status:
            raise StepSizeError(f"integration failed on [{nodes[0]}, {nodes[-1]}] (status {status})")
        k = seg.size
        out_u[done:stop] = uu[1 : 1 + k]
        out_du[done:stop] = dd[1 : 1 + k]
        out_s[done:stop] = ss[1 : 1 + k]
        done = stop
        r_c = nodes[-1]
        u, du, s = uu[-1], dd[-1], ss[-1]
    return out_u, out_du, out_s


def _free_pair(ch: Channel, r):
    """``phi_J``, ``phi_Y`` and derivatives as scaled mantissas: ``(jm, jd, js, ym, yd, ys)``."""
    x = ch.lam * r if ch.eps > 0 else (ch.lam.real * r)
    ev = bessel_jy(ch.nu, x)
    sr = np.sqrt(r)
    jm = sr * ev.j
    jd = 0.5 / sr * ev.j + sr * ch.lam * ev.j_prime
    ym = sr * ev.y
    yd = 0.5 / sr * ev.y + sr * ch.lam * ev.y_prime
    return jm, jd, np.asarray(ev.j_log_scale, float), ym, yd, np.asarray(ev.y_log_scale, float)


def _free_values(ch: Channel, r):
    jm, jd, js, ym, yd, ys = _free_pair(ch, r)
    with np.errstate(over="ignore", under="ignore"):
        ej, ey = np.exp(js), np.exp(ys)
    return jm * ej, jd * ej, ym * ey, yd * ey


def build_u0_ode(ch: Channel, V: RadialPotential, grid, r_ode: float | None = None, rtol: float = 1e-12) -> GridFunction:
    """Recessive solution by outward DOP853 integration, exact free continuation beyond the support.

    Parameters
    ----------
    ch : Channel
    V : RadialPotential
    grid : array_like
        Increasing radial nodes; ``grid[0]`` should lie in the first piece of ``V``.
    r_ode : float, optional
        Integrate numerically up to ``max(R0, r_ode)``; beyond that ``u0`` is
        written as ``A phi_J + B phi_Y`` with coefficients matched at the last
        integrated node. Defaults to ``R0``.
    rtol : float
        Local tolerance of the integrator on the normalized state.
    """
    r = np.asarray(grid, dtype=float)
    R0 = support_radius(V)
    r_end = max(R0, r_ode if r_ode is not None else R0)
    m0, d0, s0 = _u0_initial(ch, float(V(r[0])), r[0])
    n_ode = max(int(np.searchsorted(r, r_end, side="right")), 1)
    mant = np.empty(r.size, dtype=complex)
    dmant = np.empty(r.size, dtype=complex)
    scale = np.empty(r.size)
    mant[0], dmant[0], scale[0] = m0, d0, s0
    if n_ode > 1:
        uu, dd, ss = _integrate(ch, V, r[0], (m0, d0, s0), r[1:n_ode], rtol)
        mant[1:n_ode], dmant[1:n_ode], scale[1:n_ode] = uu, dd, ss
    if n_ode < r.size:
        ie = n_ode - 1
        idx = np.arange(ie, r.size)
        jm, jd, js, ym, yd, ys = _free_pair(ch, r[idx])
        mu, mdu, le = mant[ie], dmant[ie], scale[ie]
        # W(phi_J, phi_Y) = 2/pi
        a = (math.pi / 2.0) * (mu * yd[0] - mdu * ym[0])
        b = (math.pi / 2.0) * (jm[0] * mdu - jd[0] * mu)
        sa = le + ys[0] + js
        sb = le + js[0] + ys
        mm, ms = combine_scaled(a * jm, sa, b * ym, sb)
        dm, _ = combine_scaled(a * jd, sa, b * yd, sb)
        mant[ie + 1 :], dmant[ie + 1 :], scale[ie + 1 :] = mm[1:], dm[1:], ms[1:]
    return GridFunction(r, mant, dmant, scale)


def build_u1(ch: Channel, V: RadialPotential, grid, rtol: float = 1e-12) -> GridFunction:
    """Outgoing solution: Hankel form on ``r >= R0``, inward integration below."""
    r = np.asarray(grid, dtype=float)
    R0 = support_radius(V)
    if r[-1] <= R0:
        raise ValueError("grid must extend beyond the support radius")
    outer = r >= R0
    mant = np.empty(r.size, dtype=complex)
    dmant = np.empty(r.size, dtype=complex)
    scale = np.empty(r.size)
    hk = hankel_outgoing(ch.nu, ch.lam, r[outer])
    mant[outer], dmant[outer], scale[outer] = hk.mantissa, hk.d_mantissa, hk.log_scale
    inner = np.nonzero(~outer)[0]
    if inner.size:
        h0 = hankel_outgoing(ch.nu, ch.lam, np.array([R0]))
        state = (h0.mantissa[0], h0.d_mantissa[0], h0.log_scale[0])
        targets = r[inner][::-1]
        uu, dd, ss = _integrate(ch, V, R0, state, targets, rtol)
        mant[inner[::-1]], dmant[inner[::-1]], scale[inner[::-1]] = uu, dd, ss
    return GridFunction(r, mant, dmant, scale)


@dataclass(frozen=True)
class WronskianResult:
    mantissa: complex
    log_scale: float
    drift: float
    near_dependent: bool

    @property
    def value(self) -> complex:
        return self.mantissa * math.exp(self.log_scale)


def wronskian(u0: GridFunction, u1: GridFunction) -> WronskianResult:
    """Median of ``u0 u1' - u0' u1`` over the grid with its maximal relative deviation."""
    w = u0.mantissa * u1.d_mantissa - u0.d_mantissa * u1.mantissa
    size = np.abs(u0.mantissa * u1.d_mantissa) + np.abs(u0.d_mantissa * u1.mantissa)
    s = u0.log_scale + u1.log_scale
    ok = np.abs(w) > 0
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(w)) + s
    ref = float(np.median(logs[ok])) if ok.any() else 0.0
    rel = w * np.exp(s - ref)
    W = complex(np.median(rel.real), np.median(rel.imag))
    drift = float(np.max(np.abs(rel - W)) / abs(W)) if W != 0 else math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        near = bool(np.median(np.abs(w) / size) < 1e-12) if size.any() else True
    return WronskianResult(W, ref, drift, near)


def solve_channel(
    ch: Channel,
    V: RadialPotential,
    grid,
    r_ode: float | None = None,
    rtol: float = 1e-12,
    drift_tol: float = DRIFT_TOL,
) -> SolutionPair:
    """Build ``(u0, u1, W)``; warns when the Wronskian drift exceeds ``drift_tol``."""
    u0 = build_u0_ode(ch, V, grid, r_ode=r_ode, rtol=rtol)
    u1 = build_u1(ch, V, grid, rtol=rtol)
    wr = wronskian(u0, u1)
    if wr.drift > drift_tol:
        warnings.warn(f"Wronskian drift {wr.drift:.2e} exceeds {drift_tol:.0e}", NumericalQualityWarning, stacklevel=2)
    if wr.near_dependent:
        warnings.warn("u0 and u1 nearly dependent", NumericalQualityWarning, stacklevel=2)
    return SolutionPair(ch, u0, u1, wr.mantissa, wr.log_scale, wr.drift, wr.near_dependent)


def curvature(ch: Channel, V: RadialPotential):
    """``u''/u = (V + m/r^2 - z)/h^2`` with ``V`` taken on the piece containing ``r_mid``."""

    def q(r, r_mid):
        return (V(r_mid) + ch.m / (r * r) - ch.z) / ch.h**2

    return q


def kernel_eval(pair: SolutionPair, r, rp, V: RadialPotential | None = None) -> np.ndarray:
    """``K(r, r') = -u0(min) u1(max) / (h^2 W)``, interpolating off-grid points.

    Interpolation is cubic Hermite, or quintic Hermite when ``V`` is given
    (the equation then supplies ``u''`` at the nodes).
    """
    r, rp = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(rp, dtype=float))
    lo = np.minimum(r, rp).ravel()
    hi = np.maximum(r, rp).ravel()
    q = None if V is None else curvature(pair.channel, V)
    m0, s0 = pair.u0.interp(lo, q)
    m1, s1 = pair.u1.interp(hi, q)
    h2 = pair.channel.h ** 2
    with np.errstate(over="ignore", under="ignore"):
        k = -(m0 * m1) / (h2 * pair.w_mantissa) * np.exp(s0 + s1 - pair.w_log_scale)
    return k.reshape(r.shape)


def kernel_on_grid(pair: SolutionPair, i, j) -> np.ndarray:
    """Kernel at grid indices, no interpolation."""
    i, j = np.broadcast_arrays(np.asarray(i), np.asarray(j))
    lo = np.minimum(i, j)
    hi = np.maximum(i, j)
    u0, u1 = pair.u0, pair.u1
    h2 = pair.channel.h ** 2
    with np.errstate(over="ignore", under="ignore"):
        return -(u0.mantissa[lo] * u1.mantissa[hi]) / (h2 * pair.w_mantissa) * np.exp(
            u0.log_scale[lo] + u1.log_scale[hi] - pair.w_log_scale
        )


def check_u0_monotone(pair: SolutionPair, R0: float, tol: float = 1e-10) -> MonotonicityReport:
    """List nodes of ``(0, R0]`` where ``u0`` or ``u0'`` is negative beyond ``tol`` times the local scale.

    The mantissas are rotated by the phase of ``u0`` at the first node, which
    is the (constant) phase of the normalization when ``eps = 0``.
    """
    u0 = pair.u0
    sel = u0.grid <= R0 * (1 + 1e-14)
    ph = u0.phase[0]
    m = (u0.mantissa[sel] / ph).real
    dm = (u0.d_mantissa[sel] / ph).real
    h = pair.channel.h
    local = np.hypot(np.abs(u0.mantissa[sel]), h * np.abs(u0.d_mantissa[sel]))
    r = u0.grid[sel]
    return MonotonicityReport(r[m < -tol * local], r[h * dm < -tol * local], int(sel.sum()))


# Volterra series -----------------------------------------------------------


@dataclass(frozen=True)
class VolterraSeries:
    """Truncated series ``u0 = sum_n phi_n`` with its a-priori tail bound."""

    u0: GridFunction
    terms: int
    tail_bound: float
    c_j: float
    c_y: float


def _panel_breaks(r_stop: float, r_lo: float, V: RadialPotential, width: float, log_ratio: float):
    """Panel right ends from ``r_lo`` to ``r_stop``: width ``min(width, r * log_ratio)``, breakpoints kept."""
    edges = sorted({b for b in V.breakpoints if r_lo < b < r_stop} | {r_stop})
    out = []
    right_edges = edges[::-1]
    cur = r_stop
    for j, edge in enumerate(right_edges):
        nxt = right_edges[j + 1] if j + 1 < len(right_edges) else r_lo
        cur = edge
        while cur > nxt * (1 + 1e-12):
            out.append(cur)
            step = min(width, cur * (1.0 - math.exp(-log_ratio)))
            cur = max(cur - step, nxt)
    return np.array(out[::-1])


def volterra_series(
    ch: Channel,
    V: RadialPotential,
    r_stop: float,
    tol: float = 1e-12,
    r_out=None,
    delta: float = 0.5,
    n_max: int = 200,
    order: int = 16,
    n_terms: int | None = None,
) -> VolterraSeries:
    """Sum the iterates ``phi_{n+1} = (pi/2h^2)[phi_Y int phi_J V phi_n - phi_J int phi_Y V phi_n]``.

    Integrals run over composite Gauss-Legendre panels aligned with the
    breakpoints of ``V`` and graded geometrically toward the origin. The sum
    stops once the bound ``sum_{k>n} C_J C_1...C_k r_stop^{nu + k(2-delta) + 1/2}``
    falls below ``tol`` times the sup of the partial sum, where ``C_J``,
    ``C_Y`` are the measured constants of ``|phi_J| <= C_J r^{nu+1/2}`` and
    ``|phi_Y| <= C_Y r^{1/2-nu-delta}`` on ``(0, r_stop]``. ``n_terms`` forces
    a fixed number of iterates instead.
    """
    nu, h = ch.nu, ch.h
    two_d = 2.0 - delta
    r_out = None if r_out is None else np.asarray(r_out, dtype=float)
    # measure C_J, C_Y on a log sample of (0, r_stop]
    probe = r_stop * np.logspace(-12, 0, 400)
    jm, _, js, ym, _, ys = _free_pair(ch, probe)
    with np.errstate(divide="ignore"):
        c_j = float(np.exp(np.max(np.log(np.abs(jm)) + js - (nu + 0.5) * np.log(probe))))
        c_y = float(np.exp(np.max(np.log(np.abs(ym)) + ys + (nu + delta - 0.5) * np.log(probe))))
    sup_v = V.sup_norm

    def log_c(k):
        num = 2 * nu + (2 * k - 1) * two_d + 2
        den = 2 * h * h * two_d * k * (2 * nu + (k - 1) * two_d + 2)
        return math.log(c_j * c_y * math.pi * sup_v * num / den) if sup_v > 0 else -math.inf

    # expected number of terms sets the largest power r^p the panels must resolve
    logs, lp = [], 0.0
    for k in range(1, n_max + 400):
        lp += log_c(k)
        logs.append(lp + k * two_d * math.log(r_stop))
    logs = np.array(logs)
    if np.isfinite(logs).any():
        peak = int(np.argmax(logs))
        below = np.nonzero(logs[peak:] < logs[peak] - 40.0)[0]
        n_est = peak + (int(below[0]) if below.size else n_max)
    else:
        n_est = 0
    if n_terms is not None:
        n_est = max(n_est, n_terms)
    p_max = 2.0 * nu + 2.0 + 2.0 * min(n_est, n_max)
    # phi_Y V phi_n ~ r^{1 + 2n}: the omitted (0, r_lo] carries ~r_lo^2 of the integral
    r_lo = r_stop * 1e-9
    if r_out is not None and r_out.size:
        r_lo = min(r_lo, 0.5 * float(r_out.min()))
    wavelength = 2.0 * math.pi / abs(ch.lam)
    breaks = _panel_breaks(r_stop, r_lo, V, 0.25 * wavelength, min(math.log(2.0), 3.0 / p_max))
    lefts = np.concatenate([[r_lo], breaks[:-1]])
    t, w = leg.leggauss(order)
    vand = leg.legvander(t, order - 1)
    vinv = np.linalg.inv(vand)
    anti = np.zeros((order + 1, order))
    for k in range(order):
        e = np.zeros(order)
        e[k] = 1.0
        anti[:, k] = leg.legint(e, lbnd=-1)
    cum_mat = leg.legvander(t, order) @ anti @ vinv  # integral from -1 to t_i
    half = (breaks - lefts) / 2.0
    nodes = (lefts[:, None] + half[:, None] * (t[None, :] + 1.0)).ravel()
    npan = breaks.size

    r_out = nodes if r_out is None else r_out
    if np.any(r_out > r_stop * (1 + 1e-14)) or np.any(r_out < lefts[0]):
        raise ValueError("output points must lie in the panel range")
    pan = np.clip(np.searchsorted(breaks, r_out, side="left"), 0, npan - 1)
    tloc = (r_out - lefts[pan]) / half[pan] - 1.0
    out_rows = (leg.legvander(tloc, order) @ anti @ vinv) * half[pan][:, None]

    pj, _, py, _ = _free_values(ch, nodes)
    oj, ojd, oy, oyd = _free_values(ch, r_out)
    vn = V(nodes)

    def cumulative(f):
        fp = f.reshape(npan, order)
        inner = (fp @ cum_mat.T) * half[:, None]
        totals = (fp * w[None, :]).sum(axis=1) * half
        offset = np.concatenate([[0.0], np.cumsum(totals)[:-1]])
        at_nodes = (inner + offset[:, None]).ravel()
        at_out = offset[pan] + np.einsum("ij,ij->i", out_rows, fp[pan])
        return at_nodes, at_out

    log_rs = math.log(r_stop)
    phi_n = pj.copy()
    s_nodes = pj.copy()
    s_out, ds_out = oj.copy(), ojd.copy()
    log_prod = math.log(c_j) if c_j > 0 else -math.inf
    coef = math.pi / (2.0 * h * h)
    n = 0
    tail = math.inf
    while True:
        # a-priori tail beyond the current partial sum
        lp = log_prod
        terms = []
        for k in range(n + 1, n + 400):
            lp += log_c(k)
            terms.append(lp + (nu + k * two_d + 0.5) * log_rs)
        terms = np.array(terms)
        tail = float(np.exp(terms).sum()) if np.isfinite(terms).any() else 0.0
        if n_terms is not None:
            if n >= n_terms:
                break
        elif tail <= tol * float(np.max(np.abs(s_nodes))):
            break
        if n >= n_max:
            raise SeriesDivergence(f"tail bound {tail:.3e} after {n} terms")
        gj = pj * vn * phi_n
        gy = py * vn * phi_n
        ij_n, ij_o = cumulative(gj)
        iy_n, iy_o = cumulative(gy)
        phi_n = coef * (py * ij_n - pj * iy_n)
        s_nodes = s_nodes + phi_n
        s_out = s_out + coef * (oy * ij_o - oj * iy_o)
        ds_out = ds_out + coef * (oyd * ij_o - ojd * iy_o)
        n += 1
        log_prod += log_c(n)
    zero = np.zeros(r_out.size)
    return VolterraSeries(GridFunction(r_out, s_out.astype(complex), ds_out.astype(complex), zero), n, tail, c_j, c_y)


def build_u0_series(ch: Channel, V: RadialPotential, r_stop: float, tol: float = 1e-12, r_out=None, **kw) -> GridFunction:
    """``u0`` from the Volterra series (oracle near the origin); see :func:`volterra_series`."""
    return volterra_series(ch, V, r_stop, tol, r_out=r_out, **kw).u0
