import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from radres.grid import GridFunction, GridRangeError, GridSpec, make_grid


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.2), st.floats(0.2, 3.0), st.lists(st.floats(0.05, 7.9), max_size=4))
def test_make_grid_properties(h, E, bps):
    spec = GridSpec(r_max=8.0)
    r = make_grid(spec, h, E, breakpoints=bps)
    assert np.all(np.diff(r) > 0)
    assert r[0] <= 1e-3 * h * (1 + 1e-12) and r[-1] == 8.0
    for b in bps:
        if b > r[0]:
            assert np.min(np.abs(r - b)) == 0.0
    # shortest wavelength resolved; a node dropped next to a breakpoint widens one gap by < 30%
    dr = 2 * math.pi * h / (math.sqrt(E) * spec.points_per_wavelength)
    assert np.max(np.diff(r)) <= 1.3001 * dr


def test_grid_uses_well_depth():
    coarse = make_grid(GridSpec(r_max=4.0), 0.1, 0.5)
    fine = make_grid(GridSpec(r_max=4.0), 0.1, 0.5, v_min=-1.0)
    assert fine.size > coarse.size
    with pytest.raises(ValueError):
        make_grid(GridSpec(r_max=1e-6), 0.1, 1.0)


def test_grid_function_scaled_values():
    r = np.array([1.0, 2.0, 3.0])
    f = GridFunction(r, np.array([1.0, -2.0, 0.5j]), np.zeros(3, complex), np.array([800.0, 0.0, -800.0]))
    assert_allclose(f.log_mag, [800.0, math.log(2.0), math.log(0.5) - 800.0])
    assert_allclose(f.phase, [1.0, -1.0, 1j])
    assert np.all(f.finite)
    assert f.values()[1] == -2.0
    assert f.scaled(2.0).mantissa[0] == 2.0
    assert f.restrict(np.array([True, False, True])).grid.tolist() == [1.0, 3.0]
    with pytest.raises(GridRangeError):
        f.interp(3.5)
    with pytest.raises(ValueError):
        GridFunction(r, np.zeros(2), np.zeros(3), np.zeros(3))


def test_interp_across_scales():
    # e^{50 r} stored with a varying scale
    r = np.linspace(1.0, 2.0, 201)
    s = 50.0 * r
    f = GridFunction(r, np.ones(r.size, complex), 50.0 * np.ones(r.size, complex), s)
    x = np.linspace(1.0, 2.0, 77)
    m, sc = f.interp(x)
    assert_allclose(np.log(np.abs(m)) + sc, 50.0 * x, atol=1e-4)
