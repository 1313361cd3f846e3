"""Channel resolvents, weighted operator norms and angular-momentum assembly.

The channel kernel ``K(r, r') = -u0(r<) u1(r>) / (h^2 W)`` is semiseparable,
so ``sum_j K(r_i, r_j) g_j`` costs ``O(N)`` through one forward and one
backward running sum. Both sums are kept relative to the local scale of
``u0`` and ``u1``, which removes the under/overflow of the two factors.

Norms are computed on the Nystrom matrix
``B_ij = sqrt(w_i) d_i K_ij d_j sqrt(w_j) + c_i d_i^2 delta_ij`` with
trapezoid weights ``w``, weights ``d = <r>^{-s}`` (times ``1_{r >= R}``) and
the Euler-Maclaurin correction ``c_i = -dr_- dr_+ / (12 h^2)`` for the jump of
``d/dr' K`` across the diagonal, which makes the rule fourth order. ``B`` is
complex symmetric, so ``B^H x = conj(B conj(x))``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numba
import numpy as np
from scipy import integrate

from .grid import GridFunction
from .potential import RadialPotential, m_plus, m_zero, r_one, support_radius
from .radial_solver import Channel, SolutionPair, channel_grid, solve_channel

__all__ = [
    "AngularDecomposition",
    "NormEstimate",
    "WeightedNormRequest",
    "NdNormResult",
    "GridSupportError",
    "angular_channels",
    "harmonic_dimension",
    "apply_resolvent_1d",
    "apply_resolvent_nd_radial",
    "resolvent_residual",
    "weighted_norm_1d",
    "channel_norm",
    "full_norm_nd",
    "nystrom_matrix",
]


class GridSupportError(ValueError):
    """Input function not contained in the grid."""


# angular decomposition -------------------------------------------------------


def harmonic_dimension(n: int, k: int) -> int:
    """Dimension of the degree-``k`` spherical harmonics on ``S^{n-1}``."""
    if n == 2:
        return 1 if k == 0 else 2
    lower = math.comb(k + n - 3, n - 1) if k >= 2 else 0
    return math.comb(k + n - 1, n - 1) - lower


@dataclass(frozen=True)
class AngularDecomposition:
    """Degrees ``k``, eigenvalues ``sigma_k = k^2 + (n-2)k``, multiplicities and ``m_k``."""

    n: int
    h: float
    degrees: np.ndarray
    sigma: np.ndarray
    multiplicity: np.ndarray
    m: np.ndarray


def angular_channels(n: int, h: float, k_max: int) -> AngularDecomposition:
    """``m_k = h^2 (sigma_k + (n-1)(n-3)/4)`` for ``k = 0..k_max``."""
    if n < 2 or k_max < 0:
        raise ValueError("need n >= 2 and k_max >= 0")
    k = np.arange(k_max + 1)
    sigma = k * k + (n - 2) * k
    mult = np.array([harmonic_dimension(n, int(j)) for j in k])
    m = h * h * (sigma + (n - 1) * (n - 3) / 4.0)
    return AngularDecomposition(n, h, k, sigma, mult, m)


# requests and results --------------------------------------------------------


@dataclass(frozen=True)
class WeightedNormRequest:
    """Norm of ``1_{>=R} <r>^{-s} R(E + i eps) <r>^{-s} 1_{>=R}`` truncated to ``(0, r_max]``.

    Attributes
    ----------
    s : float
        Weight exponent, ``1/2 < s <= 1``.
    exterior_R : float or None
        Cutoff radius; ``None`` for the interior (unrestricted) norm.
    r_max : float
        Truncation radius of the grid.
    points_per_wavelength : float
        Uniform grid resolution.
    method : str
        ``"power-iteration"`` or ``"hilbert-schmidt"``.
    """

    s: float = 1.0
    exterior_R: float | None = None
    r_max: float = 40.0
    points_per_wavelength: float = 24.0
    method: str = "power-iteration"
    rtol: float = 1e-4
    max_iter: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0.5 < self.s <= 1.0:
            raise ValueError("weight exponent must satisfy 1/2 < s <= 1")
        if self.exterior_R is not None and self.exterior_R >= self.r_max:
            raise ValueError("exterior radius must lie below r_max")
        if self.method not in ("power-iteration", "hilbert-schmidt"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.points_per_wavelength < 10:
            raise ValueError("need at least 10 points per wavelength")


@dataclass(frozen=True)
class NormEstimate:
    """Weighted operator norm with grid metadata and a truncation bound."""

    value: float
    method: str
    r_max: float
    points: int
    tail_bound: float
    channel: Channel | None = None
    converged: bool = True
    iterations: int = 0


# compiled kernels ------------------------------------------------------------


@numba.njit(cache=True)
def _semisep_apply(m0, s0, m1, s1, g, out_scale):
    """``sum_j -u0(r_min) u1(r_max) g_j`` (without the ``1/(h^2 W)``), scaled by ``exp(-out_scale)``."""
    n = g.size
    fwd = np.empty(n, dtype=np.complex128)
    acc = 0.0 + 0.0j
    for i in range(n):
        if i > 0:
            acc *= math.exp(s0[i - 1] - s0[i])
        acc += m0[i] * g[i]
        fwd[i] = acc
    out = np.empty(n, dtype=np.complex128)
    acc = 0.0 + 0.0j
    for i in range(n - 1, -1, -1):
        e = math.exp(s0[i] + s1[i] - out_scale[i])
        out[i] = -(m1[i] * fwd[i] + m0[i] * acc) * e
        acc = (acc + m1[i] * g[i]) * (math.exp(s1[i] - s1[i - 1]) if i > 0 else 1.0)
    return out


@numba.njit(cache=True)
def _hs_square(a_m, a_s, b_m, b_s, diag):
    """``2 sum_{j<i} a_i b_j + sum_i diag_i`` for ``a = a_m e^{a_s}``, ``b = b_m e^{b_s}`` (all >= 0), log form."""
    n = a_m.size
    run = 0.0
    run_s = -np.inf
    tot = 0.0
    tot_s = 0.0
    for i in range(n):
        if i > 0 and run > 0:
            ts = a_s[i] + run_s
            term = 2.0 * a_m[i] * run
            if term > 0:
                if tot == 0.0:
                    tot, tot_s = term, ts
                elif ts > tot_s:
                    tot = tot * math.exp(tot_s - ts) + term
                    tot_s = ts
                else:
                    tot += term * math.exp(ts - tot_s)
        if b_m[i] > 0:
            if run == 0.0:
                run, run_s = b_m[i], b_s[i]
            elif b_s[i] > run_s:
                run = run * math.exp(run_s - b_s[i]) + b_m[i]
                run_s = b_s[i]
            else:
                run += b_m[i] * math.exp(b_s[i] - run_s)
    # diagonal terms, already scaled to exp(0)
    d = 0.0
    for i in range(n):
        d += diag[i]
    if tot == 0.0:
        return d
    return tot * math.exp(tot_s) + d


# Nystrom operator ------------------------------------------------------------


@dataclass
class _Operator:
    """Weighted, restricted Nystrom operator of one channel."""

    pair: SolutionPair
    idx: np.ndarray
    sw_d: np.ndarray  # sqrt(w) * d
    corr: np.ndarray  # c_i d_i^2
    m0: np.ndarray
    s0: np.ndarray
    m1: np.ndarray
    s1: np.ndarray
    out_scale: np.ndarray
    inv: complex

    def apply(self, x):
        g = self.sw_d * x
        y = _semisep_apply(self.m0, self.s0, self.m1, self.s1, np.ascontiguousarray(g, dtype=np.complex128), self.out_scale)
        return self.sw_d * y * self.inv + self.corr * x

    def apply_adjoint(self, x):
        return np.conj(self.apply(np.conj(x)))


def _trapezoid(r):
    w = np.zeros_like(r)
    d = np.diff(r)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def _build_operator(pair: SolutionPair, req: WeightedNormRequest) -> _Operator:
    r = pair.grid
    sel = r <= req.r_max * (1 + 1e-12)
    if req.exterior_R is not None:
        sel &= r >= req.exterior_R * (1 - 1e-12)
    idx = np.nonzero(sel)[0]
    rr = r[idx]
    if rr.size < 3:
        raise GridSupportError("too few grid points in the weighted region")
    w = _trapezoid(rr)
    d = (1.0 + rr * rr) ** (-req.s / 2.0)
    dl = np.diff(rr, prepend=np.nan)
    dr = np.diff(rr, append=np.nan)
    h = pair.channel.h
    c = -(dl * dr) / (12.0 * h * h)
    c[0] = c[-1] = 0.0
    u0, u1 = pair.u0, pair.u1
    inv = 1.0 / (h * h * pair.w_mantissa)
    op = _Operator(
        pair,
        idx,
        np.sqrt(w) * d,
        c * d * d,
        np.ascontiguousarray(u0.mantissa[idx]),
        np.ascontiguousarray(u0.log_scale[idx]),
        np.ascontiguousarray(u1.mantissa[idx]),
        np.ascontiguousarray(u1.log_scale[idx]),
        np.full(idx.size, pair.w_log_scale),
        inv,
    )
    return op


def nystrom_matrix(pair: SolutionPair, req: WeightedNormRequest) -> np.ndarray:
    """Dense ``B`` (small grids only; used for checks)."""
    op = _build_operator(pair, req)
    n = op.idx.size
    rows = np.empty((n, n), dtype=complex)
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        rows[:, j] = op.apply(e)
    return rows


def _hs_norm(op: _Operator) -> float:
    w_sd2 = op.sw_d**2
    a_m = w_sd2 * np.abs(op.m1 * op.inv) ** 2
    a_s = 2.0 * (op.s1 - op.out_scale)
    b_m = w_sd2 * np.abs(op.m0) ** 2
    b_s = 2.0 * op.s0
    diag_b = -w_sd2 * op.m0 * op.m1 * np.exp(op.s0 + op.s1 - op.out_scale) * op.inv + op.corr
    tot = _hs_square(a_m, a_s, b_m, b_s, np.abs(diag_b) ** 2)
    return math.sqrt(max(tot, 0.0))


def _power_iteration(op: _Operator, rtol: float, max_iter: int, seed: int):
    rng = np.random.default_rng(seed)
    n = op.idx.size
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    theta = 0.0
    for it in range(1, max_iter + 1):
        y = op.apply(x)
        z = op.apply_adjoint(y)
        theta = float(np.vdot(x, z).real)
        res = np.linalg.norm(z - theta * x)
        nz = np.linalg.norm(z)
        if nz == 0:
            return 0.0, True, it
        if res <= rtol * theta:
            return math.sqrt(max(theta, 0.0)), True, it
        x = z / nz
    return math.sqrt(max(theta, 0.0)), False, max_iter


def _weight_integral(s: float, a: float, b: float) -> float:
    return integrate.quad(lambda t: (1.0 + t * t) ** (-s), a, b, limit=200)[0]


def _tail_bound(pair: SolutionPair, req: WeightedNormRequest) -> float:
    """``sup|K| (T + sqrt(2 T I))`` with ``T`` the weight mass beyond ``r_max``, ``I`` the mass inside."""
    r = pair.grid
    ch = pair.channel
    lam = abs(ch.lam)
    u0, u1 = pair.u0, pair.u1
    env0 = np.log(np.hypot(np.abs(u0.mantissa), np.abs(u0.d_mantissa) / lam)) + u0.log_scale
    k = min(np.searchsorted(r, req.r_max), r.size - 1)
    env1 = np.log(np.hypot(np.abs(u1.mantissa[k]), np.abs(u1.d_mantissa[k]) / lam)) + u1.log_scale[k]
    env1 = max(env1, 0.5 * math.log(2.0 / (math.pi * lam)))
    lo = req.exterior_R if req.exterior_R is not None else 0.0
    sel = r >= lo
    sup_k = math.exp(float(np.max(env0[sel])) + env1 - pair.w_log_scale) / (ch.h**2 * abs(pair.w_mantissa))
    T = _weight_integral(req.s, req.r_max, np.inf)
    I = _weight_integral(req.s, lo, req.r_max)
    return sup_k * (T + math.sqrt(2.0 * T * I))


def weighted_norm_1d(pair: SolutionPair, req: WeightedNormRequest) -> NormEstimate:
    """Norm of the weighted channel resolvent on the pair's grid.

    Power iteration on ``B^H B`` stops when ``||B^H B x - theta x|| <= rtol theta``
    (then ``theta`` is within ``rtol theta`` of an eigenvalue); after ``max_iter``
    steps the current value is returned as a lower bound with ``converged=False``.
    """
    if pair.grid[-1] < req.r_max * (1 - 1e-12):
        raise GridSupportError("grid does not reach r_max")
    op = _build_operator(pair, req)
    tail = _tail_bound(pair, req)
    if req.method == "hilbert-schmidt":
        return NormEstimate(_hs_norm(op), req.method, req.r_max, op.idx.size, tail, pair.channel)
    val, ok, it = _power_iteration(op, req.rtol, req.max_iter, req.seed)
    return NormEstimate(val, req.method, req.r_max, op.idx.size, tail, pair.channel, ok, it)


def _check_exterior(V: RadialPotential, E: float, req: WeightedNormRequest) -> None:
    if req.exterior_R is not None and req.exterior_R <= r_one(V, E):
        raise ValueError("exterior radius must exceed r_one(V, E)")


def _request_grid(ch: Channel, V: RadialPotential, req: WeightedNormRequest) -> np.ndarray:
    _check_exterior(V, ch.E, req)
    extra = () if req.exterior_R is None else (req.exterior_R,)
    return channel_grid(ch, V, req.r_max, req.points_per_wavelength, extra)


def channel_norm(ch: Channel, V: RadialPotential, req: WeightedNormRequest, grid=None) -> NormEstimate:
    """Build the channel solution on a default grid (or ``grid``) and estimate its weighted norm."""
    if grid is None:
        grid = _request_grid(ch, V, req)
    pair = solve_channel(ch, V, grid)
    return weighted_norm_1d(pair, req)


# resolvent application -------------------------------------------------------


def _interval_weights(r, order=6):
    """Weights ``W[i, :]`` on nodes ``start[i] + (0..order-1)`` integrating over ``[r_i, r_{i+1}]``."""
    n = r.size
    half = order // 2
    start = np.clip(np.arange(n - 1) - (half - 1), 0, max(n - order, 0))
    k = min(order, n)
    cols = start[:, None] + np.arange(k)[None, :]
    left = r[:-1]
    d = np.diff(r)
    x = (r[cols] - left[:, None]) / d[:, None]
    vand = x[:, None, :] ** np.arange(k)[None, :, None]  # (i, power, node)
    mom = 1.0 / (np.arange(k) + 1.0)
    wts = np.linalg.solve(vand, np.broadcast_to(mom, (n - 1, k))[..., None])[..., 0]
    return cols, wts * d[:, None]


@numba.njit(cache=True)
def _cumulative(cols, wts, m, s, f):
    """Running integrals of ``m e^s f`` from the left, in the scale ``e^{s_i}`` of each node."""
    n = s.size
    out = np.empty(n, dtype=np.complex128)
    acc = 0.0 + 0.0j
    out[0] = acc
    for i in range(n - 1):
        ref = s[i + 1]
        c = 0.0 + 0.0j
        for k in range(cols.shape[1]):
            j = cols[i, k]
            c += wts[i, k] * m[j] * f[j] * math.exp(s[j] - ref)
        acc = acc * math.exp(s[i] - ref) + c
        out[i + 1] = acc
    return out


@numba.njit(cache=True)
def _cumulative_right(cols, wts, m, s, f):
    """Running integrals of ``m e^s f`` from the right end, in the scale ``e^{s_i}``."""
    n = s.size
    out = np.empty(n, dtype=np.complex128)
    acc = 0.0 + 0.0j
    out[n - 1] = acc
    for i in range(n - 2, -1, -1):
        ref = s[i]
        c = 0.0 + 0.0j
        for k in range(cols.shape[1]):
            j = cols[i, k]
            c += wts[i, k] * m[j] * f[j] * math.exp(s[j] - ref)
        acc = acc * math.exp(s[i + 1] - ref) + c
        out[i] = acc
    return out


def apply_resolvent_1d(pair: SolutionPair, f) -> GridFunction:
    """``R f = -(1/h^2 W) [u1(r) int_0^r u0 f + u0(r) int_r^inf u1 f]`` on the pair's grid.

    Parameters
    ----------
    pair : SolutionPair
    f : array_like or GridFunction
        Values on ``pair.grid``; must vanish at the last node.

    Returns
    -------
    GridFunction
        ``Rf`` and its derivative ``-(1/h^2 W)[u1' int u0 f + u0' int u1 f]``.
    """
    r = pair.grid
    fv = f.values() if isinstance(f, GridFunction) else np.asarray(f)
    fv = np.ascontiguousarray(fv, dtype=np.complex128)
    if fv.shape != r.shape:
        raise GridSupportError("f must be sampled on the pair's grid")
    scale_f = np.max(np.abs(fv))
    if scale_f > 0 and abs(fv[-1]) > 1e-10 * scale_f:
        raise GridSupportError("f is not supported within the grid")
    u0, u1 = pair.u0, pair.u1
    cols, wts = _interval_weights(r)
    F = _cumulative(cols, wts, u0.mantissa, u0.log_scale, fv)
    G = _cumulative_right(cols, wts, u1.mantissa, u1.log_scale, fv)
    h2w = pair.channel.h ** 2 * pair.w_mantissa
    mant = -(u1.mantissa * F + u0.mantissa * G) / h2w
    dmant = -(u1.d_mantissa * F + u0.d_mantissa * G) / h2w
    scale = u0.log_scale + u1.log_scale - pair.w_log_scale
    return GridFunction(r, mant, dmant, scale)


def apply_resolvent_nd_radial(pair: SolutionPair, F) -> GridFunction:
    """Radial profile ``U`` of ``R(z)(F(|x|) Y_k)`` in ``n`` dimensions.

    The conjugation ``U = r^{-(n-1)/2} w`` turns the ``n``-dimensional radial
    operator into the channel operator with ``m_k``, so
    ``w = R_1d (r^{(n-1)/2} F)``.
    """
    r = pair.grid
    a = (pair.channel.n - 1) / 2.0
    w = apply_resolvent_1d(pair, np.asarray(F) * r**a)
    mant = w.mantissa * r ** (-a)
    dmant = w.d_mantissa * r ** (-a) - a * w.mantissa * r ** (-a - 1)
    return GridFunction(r, mant, dmant, w.log_scale)


def resolvent_residual(pair: SolutionPair, V: RadialPotential, f, u: GridFunction, r_lo: float | None = None) -> float:
    """``max |(P_m - z) u - f| / max |f|`` by the Numerov stencil on uniform stretches of the grid.

    Stencils touching a breakpoint of ``V`` (where ``u''`` jumps) or lying
    below ``r_lo`` are skipped.
    """
    r = pair.grid
    ch = pair.channel
    fv = np.asarray(f.values() if isinstance(f, GridFunction) else f, dtype=complex)
    y = u.values()
    q = V(r) + ch.m / r**2 - ch.z
    g = (q * y - fv) / ch.h**2  # y'' implied by the equation
    dl = np.diff(r)[:-1]
    dr = np.diff(r)[1:]
    uniform = np.abs(dl - dr) <= 1e-9 * dr
    mid = np.arange(1, r.size - 1)
    ok = uniform.copy()
    for b in V.breakpoints:
        near = (r[mid - 1] <= b * (1 + 1e-14)) & (r[mid + 1] >= b * (1 - 1e-14))
        ok &= ~near
    if r_lo is not None:
        ok &= r[mid - 1] >= r_lo
    i = mid[ok]
    d2 = dr[ok] ** 2
    lhs = (y[i + 1] - 2 * y[i] + y[i - 1]) / d2
    rhs = (g[i + 1] + 10 * g[i] + g[i - 1]) / 12.0
    res = ch.h**2 * np.abs(lhs - rhs)
    return float(np.max(res) / np.max(np.abs(fv)))


# n-dimensional assembly ------------------------------------------------------


@dataclass(frozen=True)
class NdNormResult:
    """Channel-wise norms and their maximum."""

    estimate: NormEstimate
    degrees: np.ndarray
    m: np.ndarray
    multiplicity: np.ndarray
    norms: np.ndarray
    tails: np.ndarray
    argmax: int
    k_max: int
    stop_reason: str


def _stop_rule(norms, m_vals, m_stop, window=5, ratio=1e-3):
    """Stop after ``window`` channels past ``m_stop`` that are small or monotonically decaying."""
    if len(norms) < window + 1 or m_vals[-window] < m_stop:
        return None
    run_max = max(norms)
    tail = norms[-window:]
    if all(v < ratio * run_max for v in tail):
        return "below-threshold"
    if all(v < run_max for v in tail) and all(b <= a for a, b in zip(norms[-window - 1 : -1], tail)):
        return "monotone-decay"
    return None


def full_norm_nd(
    V: RadialPotential,
    E: float,
    h: float,
    req: WeightedNormRequest,
    n: int,
    k_max: int | None = None,
    eps: float = 0.0,
    threads: int = 1,
    k_cap: int = 2000,
) -> NdNormResult:
    """Maximum of the channel norms over degrees ``k = 0, 1, ...``.

    With a radial weight the weighted resolvent is block diagonal in the
    spherical-harmonic decomposition, so its norm is the largest block norm.
    If ``k_max`` is ``None`` channels are added (in batches of ``threads``)
    until five consecutive channels beyond ``m_+`` (``m_0`` for the interior
    norm) are below ``1e-3`` of the running maximum or decay monotonically
    below it; ``k_cap`` bounds the search.
    """
    R = req.exterior_R if req.exterior_R is not None else r_one(V, E)
    m_stop = m_plus(V, E, max(R, r_one(V, E)))
    ch0 = Channel(n, h, E, eps, -h * h / 4.0 if n == 2 else h * h * (n - 1) * (n - 3) / 4.0)
    grid = _request_grid(ch0, V, req)

    def one(k):
        ch = Channel.from_degree(n, h, E, eps, k)
        return weighted_norm_1d(solve_channel(ch, V, grid), req)

    results: list[NormEstimate] = []
    reason = "k_max"
    limit = k_max if k_max is not None else k_cap
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        k = 0
        while k <= limit:
            batch = list(range(k, min(k + max(threads, 1), limit + 1)))
            results.extend(pool.map(one, batch))
            k = batch[-1] + 1
            if k_max is None:
                norms = [e.value for e in results]
                ms = [e.channel.m for e in results]
                why = _stop_rule(norms, ms, m_stop)
                if why:
                    reason = why
                    break
        else:
            if k_max is None:
                reason = "k_cap"
    norms = np.array([e.value for e in results])
    tails = np.array([e.tail_bound for e in results])
    best = int(np.argmax(norms))
    top = results[best]
    dec = angular_channels(n, h, len(results) - 1)
    est = replace(top, tail_bound=float(np.max(tails)), converged=all(e.converged for e in results))
    return NdNormResult(est, dec.degrees, dec.m, dec.multiplicity, norms, tails, best, len(results) - 1, reason)
