import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from radres.specfun import (
    DomainError,
    airy,
    bessel_jy,
    combine_scaled,
    envelope_ratios,
    hankel_outgoing,
    turning_map,
    uniform_jy,
)

# (nu, x): J, Y, J', Y' from mpmath at 40 digits
MPMATH_JY = [
    ((0.0, 1.0), (0.76519768655796655145, 0.088256964215676957983, -0.44005058574493351596, 0.78121282130028871655)),
    ((0.5, 2.0), (0.51301613656182775167, 0.23478571040624846917, -0.36303974454670540709, 0.45431970896026563437)),
    ((2.5, 0.1), (0.00016808871900334129365, -758.20447152837420829, 0.0041998163264166114907, 18929.754621579443063)),
    ((5.0, 10.0), (-0.23406152818679364044, 0.1354030476893623032, -0.1025719220086117149, -0.21265103571277493483)),
    ((20.0, 15.0), (0.0073602340792234852583, -3.3087330924737644738, 0.0067598609886162726624, 2.7274597775291937859)),
    ((100.0, 50.0), (1.115927369083809278e-21, -3293800188202666614.2, 1.9365032092464706434e-21, 5693865916647605026.7)),
    ((100.0, 150.0), (-0.015359526118405390629, 0.073876071245019868315, -0.054976798213053876615, -0.011892421209163594467)),
    ((500.0, 400.0), (1.3647281100289630658e-22, -7774931417092993160.1, 1.0265469183456678509e-22, 5813731221858851881.8)),
    ((500.0, 600.0), (0.041398528403868443834, 0.01433717254713005207, -0.008038412345679294866, 0.022845856739502037925)),
    ((1000.0, 1200.0), (0.0035826674378828883711, 0.030771640879157485387, -0.017014745137080901427, 0.001938457890594412947)),
]


@pytest.mark.parametrize("args,expected", MPMATH_JY)
def test_bessel_jy_matches_mpmath(args, expected):
    ev = bessel_jy(*args)
    got = [np.real(v) for v in ev.values()]
    assert_allclose(got, expected, rtol=1e-11)


def test_bessel_wronskian_grid():
    x = np.geomspace(0.1, 100, 50)
    for nu in (0, 0.5, 1, 5, 20, 100, 500):
        assert np.max(bessel_jy(nu, x).wronskian_relerr()) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 800), st.floats(1e-3, 2e3))
def test_bessel_wronskian_property(nu, x):
    assert bessel_jy(nu, x).wronskian_relerr() <= 1e-10


def test_bessel_real_for_real_argument():
    ev = bessel_jy(3.3, np.array([0.5, 5.0, 50.0]))
    for v in ev.values():
        assert np.all(np.abs(np.imag(v)) <= 1e-14 * np.abs(v))


def test_bessel_huge_values_stay_finite():
    ev = bessel_jy(2000.0, 10.0)
    assert np.isfinite(ev.j_log_scale) and np.isfinite(ev.y_log_scale)
    assert ev.j_log_scale < -5000 and ev.y_log_scale > 5000
    assert ev.wronskian_relerr() <= 1e-10


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_jy(-1.0, 1.0)
    with pytest.raises(DomainError):
        bessel_jy(1.0, 0.0)


def test_airy_at_zero():
    a = airy(0.0)
    ai, bi, aip, bip = a.values()
    assert_allclose(ai, 3 ** (-2 / 3) / math.gamma(2 / 3), rtol=1e-14)
    assert_allclose(ai * bip - aip * bi, 1 / math.pi, rtol=1e-12)


@pytest.mark.parametrize(
    "x,expected",
    [
        (-5.0, (0.35076100902411431979, -0.13836913490160057685, 0.32719281855444313679, 0.77841177300189924609)),
        (3.0, (0.0065911393574607191443, 14.037328963730232032, -0.011912976705951318474, 22.922214966382170185)),
        (10.0, (1.1047532552898685934e-10, 455641153.548225141, -3.5206336767389236366e-10, 1429236134.4828657761)),
    ],
)
def test_airy_matches_mpmath(x, expected):
    ai, bi, aip, bip = airy(x).values()
    assert_allclose([ai, bi, aip, bip], expected, rtol=1e-12)


def test_airy_wronskian_and_positivity():
    x = np.linspace(-30, 100, 400)
    a = airy(x)
    w = (a.ai * a.bi_prime - a.ai_prime * a.bi) * np.exp(a.ai_log_scale + a.bi_log_scale)
    assert_allclose(w, 1 / math.pi, rtol=1e-10)
    pos = x > 0
    assert np.all(a.ai[pos] > 0) and np.all(a.bi[pos] > 0)


def test_airy_envelope_at_ten():
    a = airy(10.0)
    # Ai(10) exp(2/3 10^{3/2}) against 1/(2 sqrt(pi)) 10^{-1/4}
    env = 0.5 / math.sqrt(math.pi) * 10 ** -0.25
    ratio = float(a.ai) / env
    assert 0.95 <= ratio <= 1.05


def test_airy_overflow_flag():
    a = airy(500.0)
    assert a.overflow
    assert np.isfinite(a.bi) and a.bi_log_scale > 700


def test_turning_map_values():
    t = turning_map(1.0)
    assert t.zeta == 0.0 and t.xi == 0.0
    assert_allclose(turning_map(0.5).xi, 0.45093249314037806186, rtol=1e-14)
    assert_allclose(turning_map(0.5).xi, math.log((1 + math.sqrt(0.75)) / 0.5) - math.sqrt(0.75), rtol=1e-14)
    assert_allclose(turning_map(2.0).zeta, -1.0181048885671160201, rtol=1e-13)


def test_turning_map_monotone_and_consistent():
    z = np.geomspace(1e-6, 50, 2000)
    t = turning_map(z)
    assert np.all(np.diff(t.zeta) < 0)
    below = z <= 1
    assert_allclose(2 / 3 * t.zeta[below] ** 1.5, t.xi[below], rtol=1e-12, atol=1e-300)
    assert np.all(np.isnan(t.xi[~below]))
    assert np.isfinite(turning_map(1e-300).zeta)


def test_uniform_jy_cross_validation():
    # one correction term: relative error ~5e-3/nu^2 (values), ~1e-2/nu^2 (derivatives)
    ref = bessel_jy(200.0, 600.0)
    u = uniform_jy(200.0, 3.0)
    for a, b in zip(u.values(), ref.values()):
        assert_allclose(a, b, rtol=1e-6)
    for nu in (20.0, 50.0, 100.0, 300.0):
        z = np.concatenate([np.linspace(0.1, 0.8, 8), np.linspace(1.3, 4.0, 8)])
        u = uniform_jy(nu, z)
        ref = bessel_jy(nu, nu * z)
        for k, (a, b) in enumerate(zip(u.values(), ref.values())):
            tol = (6e-3 if k < 2 else 1.2e-2) / nu**2
            assert np.max(np.abs(a / b - 1)) <= tol
            if nu >= 100:
                assert np.max(np.abs(a / b - 1)) <= 1.2e-6


def test_uniform_jy_turning_point():
    nu = 100.0
    z = 1 + np.linspace(-1, 1, 7) * nu ** (-2 / 3)
    u = uniform_jy(nu, z)
    ref = bessel_jy(nu, nu * z)
    assert np.max(np.abs(u.values()[0] / ref.values()[0] - 1)) <= 1e-3


def test_uniform_jy_domain():
    with pytest.raises(DomainError):
        uniform_jy(10.0, 0.5)


def test_envelope_band_and_uniform_bound():
    lo, hi, bound = np.inf, 0.0, 0.0
    for nu in np.geomspace(20, 500, 10):
        e = envelope_ratios(nu, np.linspace(0.05, 0.8, 30))
        lo = min(lo, e.ratio_j.min(), e.ratio_y.min())
        hi = max(hi, e.ratio_j.max(), e.ratio_y.max())
        bound = max(bound, envelope_ratios(nu, np.geomspace(0.01, 30, 100)).bound_j.max())
    assert lo > 0 and hi / lo <= 10
    assert bound <= 3.0


def test_envelope_examples():
    e = envelope_ratios(100.0, 0.5)
    assert 0.1 < e.ratio_j[0] < 10
    e = envelope_ratios(50.0, 1.0)
    assert e.bound_j[0] <= 3.0


def test_hankel_half_integer_closed_form():
    lam = 1.7
    r = np.array([0.3, 1.0, 5.0, 40.0, 300.0])
    s = hankel_outgoing(0.5, lam, r)
    # r^{1/2} H_{1/2}(lam r) = -i sqrt(2/(pi lam)) e^{i lam r}
    exact = -1j * math.sqrt(2 / (math.pi * lam)) * np.exp(1j * lam * r)
    assert_allclose(s.value(), exact, rtol=1e-12)
    assert_allclose(s.derivative(), 1j * lam * exact, rtol=1e-11)


def test_hankel_outgoing_condition():
    nu, lam = 7.3, 2.0
    r = np.array([1e2, 1e3, 1e4])
    s = hankel_outgoing(nu, lam, r)
    defect = np.abs(s.derivative() - 1j * lam * s.value()) / np.abs(lam * s.value())
    assert np.all(np.diff(defect) < 0) and defect[-1] < 1e-3


def test_hankel_decay_complex():
    s = hankel_outgoing(0.0, 1j, 10.0)
    assert np.abs(s.value()[0]) <= 2.0 * math.exp(-10.0)


def test_hankel_matches_composition_across_branches():
    nu, lam = 12.0, 3.0 + 0.01j
    r = np.geomspace(0.5, 200, 60)
    s = hankel_outgoing(nu, lam, r)
    ev = bessel_jy(nu, lam * r)
    j, y, _, _ = ev.values()
    assert_allclose(s.value(), np.sqrt(r) * (j + 1j * y), rtol=1e-10)


def test_combine_scaled():
    m, s = combine_scaled(2.0, 800.0, 3.0, 799.0)
    assert_allclose(m * math.exp(s - 800.0), 2.0 + 3.0 * math.exp(-1.0))
