import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from radres.mellin import (
    LogGrid,
    MellinDomainError,
    MultiplierSpec,
    NearPoleWarning,
    PoleError,
    SupportLeakageWarning,
    decompose,
    lambda_bound,
    manufactured,
    mellin_at,
    mellin_forward,
    mellin_inverse,
    multiplier,
    multiplier_sup,
    parseval_relerr,
    r2_qm,
    reconstruction_relerr,
    smooth_cutoff,
    t0_choice,
    t_pm,
    vanishing_residue,
)
from radres.potential import RadialPotential
from radres.radial_solver import Channel, channel_grid, solve_channel

H = 0.05


def _bump(a=1.5):
    return lambda r: r**a * np.exp(-(np.log(r) ** 2) / 0.5)


def test_t_pm_examples():
    assert t_pm(0.0, H) == (0.0, 1.0)
    assert_allclose(t_pm(-H * H / 4, H), (0.5, 0.5), atol=1e-7)
    assert_allclose(t_pm(2 * H * H, H), (-1.0, 2.0), rtol=1e-14)
    with pytest.raises(MellinDomainError):
        t_pm(-H * H, H)


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.25, 1e3))
def test_t_pm_identities(M):
    tm, tp = t_pm(M * H * H, H)
    assert_allclose(tm + tp, 1.0, atol=1e-12)
    assert_allclose(tm * tp, -M, atol=1e-9 * max(1.0, M))


def test_lambda_bound_examples():
    assert_allclose(lambda_bound(-0.5, -H * H / 4, H), 1.0, rtol=1e-14)
    assert_allclose(lambda_bound(1.0, 4 * H * H, H), 0.25, rtol=1e-14)
    with pytest.raises(PoleError):
        lambda_bound(2.0, 2 * H * H, H)
    spec = MultiplierSpec(2 * H * H, H, 1.0)
    assert_allclose((spec.t_minus, spec.t_plus, spec.lambda_bound), (-1.0, 2.0, 0.5), rtol=1e-14)


def test_lambda_sweep_bounded_by_bracket():
    ms = np.geomspace(H * H / 4, 100 * H * H, 40)
    vals = [lambda_bound(1.0, m, H) * (1 + (m / H**2) ** 2) ** 0.5 for m in ms]
    assert max(vals) <= 5.0
    assert t0_choice(0.0, H) == -0.5 and t0_choice(H * H, H) == 1.0


@pytest.mark.parametrize("m_over_h2", [-0.25 + 1e-6 / H**2, 0.0, 1.0, 10.0, 100.0])
def test_multiplier_sup_against_dense_sampling(m_over_h2):
    m = m_over_h2 * H * H
    t0 = t0_choice(m, H)
    tau = np.linspace(-50, 50, 200001)
    dense = np.max(np.abs(multiplier(tau, t0, m, H)))
    sup = multiplier_sup(t0, m, H)
    assert dense <= sup * (1 + 1e-12)
    assert_allclose(sup, dense, rtol=1e-6)
    assert sup <= 1.0 * lambda_bound(t0, m, H) * (1 + 1e-12)


@pytest.mark.parametrize("t", [-1.0, -0.5, 0.0, 0.7, 1.0])
def test_parseval_against_quadrature(t):
    f = _bump()
    u = LogGrid.from_function(f, -20, 20, 4096)
    line = mellin_forward(u, t)
    ref2, _ = integrate.quad(lambda r: r ** (-2 * t - 1) * abs(f(r)) ** 2, 0, np.inf, limit=400, epsabs=0, epsrel=1e-13)
    assert parseval_relerr(u, line, reference=math.sqrt(ref2)) <= 1e-8
    assert parseval_relerr(u, line) <= 1e-12


def test_forward_matches_direct_sum():
    u = LogGrid.from_function(_bump(), -20, 20, 1024)
    line = mellin_forward(u, 0.3)
    for k in (0, 5, 17, -9):
        assert_allclose(line.values[k], mellin_at(u, line.tau[k] + 0.3j), rtol=1e-10, atol=1e-14)


def test_mellin_at_against_closed_form():
    # M(r^a e^{-r}) (sigma) = Gamma(a + i sigma)
    from scipy.special import gamma

    u = LogGrid.from_function(lambda r: r**2 * np.exp(-r), -40, 6, 8192)
    assert_allclose(mellin_at(u, 0.4 - 0.5j), gamma(2 + 1j * (0.4 - 0.5j)), rtol=1e-10)


@pytest.mark.parametrize("t", [-1.0, 0.0, 1.0])
def test_round_trip(t):
    u = LogGrid.from_function(lambda x: np.exp(-(x**2) / 2) * (1 + 0.3j * x), -25, 25, 2048, in_x=True)
    back = mellin_inverse(mellin_forward(u, t))
    w = np.exp(-t * u.x)
    err = np.max(np.abs((back.samples - u.samples) * w)) / np.max(np.abs(u.samples * w))
    assert err <= 1e-10


def test_zero_line_and_inverse_t():
    u = LogGrid(-5, 5, 64, np.zeros(64, dtype=complex))
    line = mellin_forward(u, 0.5)
    assert np.all(line.values == 0) and parseval_relerr(u, line) == 0
    with pytest.raises(ValueError):
        mellin_inverse(line, 0.7)


def test_leakage_warning_and_grid_validation():
    with pytest.warns(SupportLeakageWarning):
        mellin_forward(LogGrid.from_function(lambda r: np.ones_like(r), -5, 5, 64), 0.0)
    with pytest.raises(ValueError):
        LogGrid(0, 1, 100, np.zeros(100))
    with pytest.raises(ValueError):
        LogGrid(0, 1, 32, np.zeros(32))


def test_r2_qm_on_power():
    # r^2 Q_m applied to a bump in x, against the x-derivatives in closed form
    m = 3 * H * H
    u = LogGrid.from_function(lambda x: np.exp(-(x**2)), -15, 15, 1024, in_x=True)
    x = u.x
    b = np.exp(-(x**2))
    expected = -((4 * x * x - 2) * b + 2 * x * b) + 3.0 * b
    assert_allclose(r2_qm(u, m, H).samples, expected, atol=1e-11)


# roundoff of the spectral derivative at the grid ends, amplified by the contour weight
@pytest.mark.filterwarnings("ignore::radres.mellin.SupportLeakageWarning")
def test_bump_below_t_minus_is_all_e_part():
    u = LogGrid.from_function(lambda x: np.exp(-((x - 0.3) ** 2) / 2), -20, 20, 2048, in_x=True)
    v = r2_qm(u, 0.0, H)
    dec = decompose(v, -0.5, 0.0, H)
    assert dec.pi_part.case == "zero"
    assert reconstruction_relerr(u, dec, -0.5) <= 1e-10


def test_one_residue_term_formula():
    m = 2 * H * H
    u, v = manufactured(m, H)
    dec = decompose(v, 1.0, m, H)
    assert dec.pi_part.case == "one-residue"
    assert dec.pi_part.exponents == (-1.0,) or np.isclose(dec.pi_part.exponents[0], -1.0)
    assert_allclose(dec.pi_part.coefficients[0], mellin_at(v, -1j) / (-3.0), rtol=1e-12)
    # the residue recovers the r^{t_-} coefficient of u
    assert_allclose(dec.pi_part.coefficients[0], 1.0, rtol=1e-8)


@pytest.mark.parametrize(
    "m,t0,case",
    [
        (2 * H * H, -1.5, "zero"),
        (2 * H * H, 1.0, "one-residue"),
        (2 * H * H, 2.5, "two-residues"),
        (-H * H / 4, 1.0, "log-resonant"),
        (10 * H * H, 1.0, "one-residue"),
    ],
)
def test_reconstruction(m, t0, case):
    u, v = manufactured(m, H)
    dec = decompose(v, t0, m, H)
    assert dec.pi_part.case == case
    assert reconstruction_relerr(u, dec, t0) <= 1e-6


# roundoff of the spectral derivative at the grid ends, amplified by the contour weight
@pytest.mark.filterwarnings("ignore::radres.mellin.SupportLeakageWarning")
def test_e_part_operator_bound():
    ratios = []
    for M in (0.0, 1.0, 10.0, 100.0):
        m = M * H * H
        t0 = t0_choice(m, H) if M else -0.5
        u = LogGrid.from_function(lambda x: np.exp(-((x - 0.3) ** 2) / 2), -20, 20, 2048, in_x=True)
        v = r2_qm(u, m, H)
        dec = decompose(v, t0, m, H)
        ratios.append(dec.e_part.weighted_norm(t0) / (lambda_bound(t0, m, H) * v.weighted_norm(t0)))
    assert max(ratios) <= 1.0 + 1e-9


def test_pole_errors_and_warnings():
    u, v = manufactured(2 * H * H, H)
    with pytest.raises(PoleError):
        decompose(v, 2.0, 2 * H * H, H)
    with pytest.warns(NearPoleWarning):
        decompose(v, 2.0 + 5e-4, 2 * H * H, H)


def test_smooth_cutoff():
    s = np.linspace(0, 3, 3001)
    chi, c1, c2 = smooth_cutoff(s)
    assert np.all(chi[s <= 1] == 1) and np.all(chi[s >= 2] == 0)
    assert np.all(np.diff(chi) <= 0)
    ds = s[1] - s[0]
    assert_allclose(np.gradient(chi, ds)[5:-5], c1[5:-5], atol=2e-4)
    assert_allclose(np.gradient(c1, ds)[5:-5], c2[5:-5], atol=5e-3 * np.abs(c2).max())


@pytest.mark.parametrize("m", [0.0, 0.01, 0.5, 2.0])
def test_vanishing_residue(m):
    V = RadialPotential.step(-1.0, 1.0)
    h = 0.1
    ch = Channel(3, h, 0.5, 0.0, m)
    pair = solve_channel(ch, V, channel_grid(ch, V, 3.0))
    val, size = vanishing_residue(pair, V)
    assert abs(val) <= 1e-8 * size
