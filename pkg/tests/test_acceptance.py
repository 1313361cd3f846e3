"""Acceptance criteria, each at its stated tolerance and runtime budget."""

import math
import time

import numpy as np
from scipy import integrate
from scipy.special import jv

from radres.fitting import fit_exponential_rate, fit_power_law, upper_envelope
from radres.mellin import (
    LogGrid,
    decompose,
    lambda_bound,
    manufactured,
    mellin_forward,
    mellin_inverse,
    multiplier_sup,
    parseval_relerr,
    reconstruction_relerr,
    t0_choice,
    t_pm,
)
from radres.potential import RadialPotential, m_zero
from radres.radial_solver import (
    Channel,
    channel_grid,
    check_u0_monotone,
    kernel_eval,
    solve_channel,
    wronskian,
)
from radres.resolvent import (
    WeightedNormRequest,
    apply_resolvent_1d,
    channel_norm,
    full_norm_nd,
    resolvent_residual,
)
from radres.specfun import bessel_jy, envelope_ratios

ZERO = RadialPotential.zero()
WELL = RadialPotential.step(-1.0, 1.0)
STEP = RadialPotential.step(1.0, 1.0)
H_SWEEP = np.geomspace(0.01, 0.1, 8)
# desk-scale truncation shared by the norm sweeps
R_MAX, PPW, DIM = 8.0, 24.0, 3


def test_c1_wronskian_conformance(acceptance_report):
    t = time.perf_counter()
    x = np.geomspace(0.1, 100, 50)
    worst = max(float(np.max(bessel_jy(nu, x).wronskian_relerr())) for nu in (0, 0.5, 1, 5, 20, 100, 500))
    dt = time.perf_counter() - t
    ok = worst <= 1e-10 and dt < 5
    acceptance_report("C1 Wronskian conformance", ok, f"max relerr {worst:.2e} (<= 1e-10), {dt:.2f} s (< 5 s)")
    assert ok


def test_c2_envelope_conformance(acceptance_report):
    t = time.perf_counter()
    nus = np.geomspace(20, 500, 25)
    z_small = np.linspace(0.05, 0.8, 40)
    z_all = np.geomspace(0.01, 50, 200)
    lo, hi, bound = math.inf, 0.0, 0.0
    for nu in nus:
        e = envelope_ratios(nu, z_small)
        lo = min(lo, e.ratio_j.min(), e.ratio_y.min())
        hi = max(hi, e.ratio_j.max(), e.ratio_y.max())
        bound = max(bound, float(envelope_ratios(nu, z_all).bound_j.max()))
    dt = time.perf_counter() - t
    C = 3.0
    ok = lo > 0 and hi / lo <= 10 and bound <= C and dt < 30
    acceptance_report(
        "C2 envelope conformance",
        ok,
        f"band factor {hi / lo:.2f} (<= 10), uniform bound max {bound:.3f} (<= C = {C:g}), {dt:.2f} s (< 30 s)",
    )
    assert ok


def test_c3_free_field_oracle(acceptance_report):
    t = time.perf_counter()
    worst_u0, worst_res = 0.0, 0.0
    for h in (0.1, 0.05, 0.02):
        for m in (0.0, h * h, 10 * h * h):
            ch = Channel(3, h, 1.0, 0.0, m)
            grid = channel_grid(ch, ZERO, R_MAX, 48.0)
            # numerical integration over most of the grid, so the oracle is not trivial
            pair = solve_channel(ch, ZERO, grid, r_ode=5.0)
            r = pair.grid
            exact = np.sqrt(r) * jv(ch.nu, ch.lam.real * r)
            err = np.max(np.abs(pair.u0.values() - exact)) / np.max(np.abs(exact))
            worst_u0 = max(worst_u0, err)
            f = np.exp(-(((r - 3.0) / 0.5) ** 2)) * (1 + 0.5 * np.sin(2 * r))
            u = apply_resolvent_1d(pair, f)
            worst_res = max(worst_res, resolvent_residual(pair, ZERO, f, u))
    dt = time.perf_counter() - t
    ok = worst_u0 <= 1e-8 and worst_res <= 1e-6 and dt < 60
    acceptance_report(
        "C3 free-field oracle",
        ok,
        f"u0 vs r^1/2 J_nu max relerr {worst_u0:.2e} (<= 1e-8), residual {worst_res:.2e} (<= 1e-6), {dt:.1f} s (< 60 s)",
    )
    assert ok


def test_c4_exterior_scaling(acceptance_report):
    t = time.perf_counter()
    req = WeightedNormRequest(s=1.0, exterior_R=2.0, r_max=R_MAX, points_per_wavelength=PPW)
    pts = []
    for h in H_SWEEP:
        pts.append((h, full_norm_nd(STEP, 1.0, float(h), req, n=DIM).estimate.value))
    fit = fit_power_law(pts)
    dt = time.perf_counter() - t
    ok = 0.9 <= fit.exponent <= 1.1 and fit.r_squared >= 0.98 and dt < 600
    acceptance_report(
        "C4 exterior scaling",
        ok,
        f"exponent {fit.exponent:.3f} (in [0.9, 1.1]), r^2 {fit.r_squared:.4f} (>= 0.98), {dt:.0f} s (< 600 s)",
    )
    assert ok


def test_c5_trapping_growth(acceptance_report):
    t = time.perf_counter()
    req = WeightedNormRequest(s=1.0, r_max=R_MAX, points_per_wavelength=PPW)
    pts = []
    for h in H_SWEEP:
        pts.append((h, full_norm_nd(WELL, 0.5, float(h), req, n=DIM).estimate.value))
    growth = max(h * math.log(v) for h, v in pts)
    fit = fit_exponential_rate(upper_envelope(pts))
    dt = time.perf_counter() - t
    ok = growth >= 0.05 and fit.r_squared >= 0.9 and dt < 900
    acceptance_report(
        "C5 trapping growth",
        ok,
        f"max h log(norm) {growth:.3f} (>= 0.05), envelope fit C {fit.exponent:.3f} r^2 {fit.r_squared:.3f} (>= 0.9), "
        f"{dt:.0f} s (< 900 s)",
    )
    assert ok


def test_c6_monotonicity(acceptance_report):
    t = time.perf_counter()
    E = 0.5
    M0 = m_zero(WELL, E)
    bad = 0
    checked = 0
    for h in (0.1, 0.05):
        for factor in (1.0, 2.0, 5.0):
            ch = Channel(3, h, E, 0.0, factor * M0)
            pair = solve_channel(ch, WELL, channel_grid(ch, WELL, 3.0))
            rep = check_u0_monotone(pair, 1.0)
            bad += rep.r_negative_u.size + rep.r_negative_du.size
            checked += rep.checked
    dt = time.perf_counter() - t
    ok = bad == 0 and checked > 0 and dt < 10
    acceptance_report("C6 monotonicity", ok, f"{bad} violations over {checked} nodes, {dt:.2f} s (< 10 s)")
    assert ok


def test_c7_mellin_suite(acceptance_report):
    t = time.perf_counter()
    h = 0.05

    def bump(r):
        return r**1.5 * np.exp(-(np.log(r) ** 2) / 0.5)

    u = LogGrid.from_function(bump, -20, 20, 4096)
    pars = 0.0
    for tt in (-1.0, -0.5, 0.0, 0.5, 1.0):
        ref = integrate.quad(lambda r: r ** (-2 * tt - 1) * bump(r) ** 2, 0, np.inf, limit=400, epsabs=0, epsrel=1e-13)[0]
        pars = max(pars, parseval_relerr(u, mellin_forward(u, tt), reference=math.sqrt(ref)))
    g = LogGrid.from_function(lambda x: np.exp(-(x**2) / 2) * (1 + 0.3j * x), -25, 25, 2048, in_x=True)
    trip = 0.0
    for tt in (-1.0, 0.0, 1.0):
        back = mellin_inverse(mellin_forward(g, tt))
        w = np.exp(-tt * g.x)
        trip = max(trip, float(np.max(np.abs((back.samples - g.samples) * w)) / np.max(np.abs(g.samples * w))))
    # contour below, inside and above (t_-, t_+) = (-1, 2)
    m = 2 * h * h
    uu, vv = manufactured(m, h)
    rec = {}
    for t0 in (-1.5, 1.0, 2.5):
        dec = decompose(vv, t0, m, h)
        rec[dec.pi_part.case] = reconstruction_relerr(uu, dec, t0)
    C = 1.0
    ratios = []
    for mm in (-h * h / 4 + 1e-6, 0.0, h * h, 10 * h * h, 100 * h * h):
        t0 = t0_choice(mm, h)
        ratios.append(multiplier_sup(t0, mm, h, tau=np.linspace(-60, 60, 4001)) / lambda_bound(t0, mm, h))
    dt = time.perf_counter() - t
    ok = (
        pars <= 1e-8
        and trip <= 1e-10
        and len(rec) == 3
        and max(rec.values()) <= 1e-6
        and max(ratios) <= C * (1 + 1e-12)
        and dt < 60
    )
    cases = ", ".join(f"{k} {v:.1e}" for k, v in rec.items())
    acceptance_report(
        "C7 Mellin suite",
        ok,
        f"Parseval {pars:.1e} (<= 1e-8), round trip {trip:.1e} (<= 1e-10), reconstruction [{cases}] (<= 1e-6), "
        f"sup/Lambda max {max(ratios):.3f} (<= C = {C:g}), {dt:.1f} s (< 60 s)",
    )
    assert ok


def test_c8_envelope_probe(acceptance_report):
    t = time.perf_counter()
    h, E = 0.05, 0.5
    req = WeightedNormRequest(s=1.0, r_max=R_MAX, points_per_wavelength=PPW)
    C = 1.0
    q = []
    for m in np.linspace(-h * h / 4, 50.0, 12):
        est = channel_norm(Channel(DIM, h, E, 0.0, float(m)), WELL, req)
        q.append(h * math.log(est.value) / (1 + math.sqrt(abs(m))))
    dt = time.perf_counter() - t
    ok = max(q) <= C and dt < 600
    acceptance_report(
        "C8 m-sweep envelope", ok, f"max h log(norm)/(1+sqrt|m|) {max(q):.3f} (<= C = {C:g}), {dt:.1f} s (< 600 s)"
    )
    assert ok


def test_c9_kernel_structure(acceptance_report):
    t = time.perf_counter()
    rng = np.random.default_rng(2024)
    sym = inv = drift = 0.0
    cauchy_ok = True
    for _ in range(5):
        V = [WELL, STEP, ZERO][rng.integers(3)]
        h = float(rng.uniform(0.05, 0.2))
        E = float(rng.uniform(0.3, 1.5))
        m = float(rng.uniform(-h * h / 4, 3.0))
        r, rp = rng.uniform(0.05, 4.0, (2, 100))
        ks = []
        for eps in (1e-2, 1e-4, 1e-6, 0.0):
            ch = Channel(3, h, E, eps, m)
            pair = solve_channel(ch, V, channel_grid(ch, V, 5.0))
            drift = max(drift, pair.wronskian_drift)
            ks.append(kernel_eval(pair, r, rp))
        k = ks[-1]
        sym = max(sym, float(np.max(np.abs(k - kernel_eval(pair, rp, r)))))
        c0, c1 = rng.uniform(0.1, 10.0, 2)
        u0, u1 = pair.u0.scaled(c0), pair.u1.scaled(c1)
        w = wronskian(u0, u1)
        other = type(pair)(pair.channel, u0, u1, w.mantissa, w.log_scale, w.drift)
        inv = max(inv, float(np.max(np.abs(kernel_eval(other, r, rp) - k) / np.abs(k))))
        diffs = [np.max(np.abs(ks[i + 1] - ks[i])) for i in range(3)]
        cauchy_ok &= diffs[0] > diffs[1] > diffs[2]
    dt = time.perf_counter() - t
    ok = sym == 0.0 and inv <= 1e-12 and drift <= 1e-6 and cauchy_ok and dt < 120
    acceptance_report(
        "C9 kernel structure",
        ok,
        f"symmetry defect {sym:.1e}, rescaling {inv:.1e} (<= 1e-12), drift {drift:.1e} (<= 1e-6), "
        f"eps-Cauchy decreasing {cauchy_ok}, {dt:.1f} s (< 120 s)",
    )
    assert ok
