"""Compiled DOP853 propagation of ``-h^2 u'' + (v + m/r^2 - z) u = 0`` between grid nodes."""

from __future__ import annotations

import math

import numba
import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _dop

_NS = _dop.N_STAGES
_A = np.ascontiguousarray(_dop.A[:_NS, :_NS])
_B = np.ascontiguousarray(_dop.B)
_C = np.ascontiguousarray(_dop.C[:_NS])
_E3 = np.ascontiguousarray(_dop.E3)
_E5 = np.ascontiguousarray(_dop.E5)


@numba.njit(cache=True)
def _rhs(r, y0, y1, v, m, z, h):
    # state (u, h u')
    q = v + m / (r * r) - z
    return y1 / h, q * y0 / h


@numba.njit(cache=True)
def _propagate(nodes, y0, y1, log_scale, v, m, z, h, rtol, A, B, C, E3, E5, max_steps):
    """Integrate through ``nodes`` (monotone); returns (u, u', scale, status) at every node.

    The state is renormalized after each accepted step and the norm is
    accumulated into the log scale, so growth never overflows.
    """
    n = nodes.size
    ns = B.size
    out_u = np.empty(n, dtype=np.complex128)
    out_du = np.empty(n, dtype=np.complex128)
    out_s = np.empty(n)
    nrm = math.sqrt(abs(y0) ** 2 + abs(y1) ** 2)
    y0 = y0 / nrm
    y1 = y1 / nrm
    log_scale += math.log(nrm)
    out_u[0] = y0
    out_du[0] = y1 / h
    out_s[0] = log_scale
    K0 = np.empty(ns + 1, dtype=np.complex128)
    K1 = np.empty(ns + 1, dtype=np.complex128)
    r = nodes[0]
    direction = 1.0 if nodes[n - 1] >= nodes[0] else -1.0
    rate = math.sqrt(abs(v - z) + abs(m) / (r * r)) / h + 1.0 / r
    step = min(0.1 / rate, abs(nodes[1] - nodes[0]) if n > 1 else 1.0)
    steps = 0
    for j in range(1, n):
        target = nodes[j]
        while direction * (target - r) > 0:
            last = False
            proposal = step
            if step >= abs(target - r) * (1.0 - 1e-12):
                step = abs(target - r)
                last = True
            hs = direction * step
            f0, f1 = _rhs(r, y0, y1, v, m, z, h)
            K0[0] = f0
            K1[0] = f1
            for s in range(1, ns):
                d0 = 0.0 + 0.0j
                d1 = 0.0 + 0.0j
                for k in range(s):
                    d0 += A[s, k] * K0[k]
                    d1 += A[s, k] * K1[k]
                f0, f1 = _rhs(r + C[s] * hs, y0 + hs * d0, y1 + hs * d1, v, m, z, h)
                K0[s] = f0
                K1[s] = f1
            b0 = 0.0 + 0.0j
            b1 = 0.0 + 0.0j
            for k in range(ns):
                b0 += B[k] * K0[k]
                b1 += B[k] * K1[k]
            n0 = y0 + hs * b0
            n1 = y1 + hs * b1
            f0, f1 = _rhs(r + hs, n0, n1, v, m, z, h)
            K0[ns] = f0
            K1[ns] = f1
            e50 = 0.0 + 0.0j
            e51 = 0.0 + 0.0j
            e30 = 0.0 + 0.0j
            e31 = 0.0 + 0.0j
            for k in range(ns + 1):
                e50 += E5[k] * K0[k]
                e51 += E5[k] * K1[k]
                e30 += E3[k] * K0[k]
                e31 += E3[k] * K1[k]
            sc = rtol * max(1.0, math.sqrt(abs(n0) ** 2 + abs(n1) ** 2))
            e5 = (abs(e50) ** 2 + abs(e51) ** 2) / (sc * sc)
            e3 = (abs(e30) ** 2 + abs(e31) ** 2) / (sc * sc)
            den = e5 + 0.01 * e3
            err = 0.0 if den == 0.0 else step * e5 / math.sqrt(2.0 * den)
            steps += 1
            if steps > max_steps:
                return out_u, out_du, out_s, 1
            if err <= 1.0:
                r = target if last else r + hs
                nn = math.sqrt(abs(n0) ** 2 + abs(n1) ** 2)
                y0 = n0 / nn
                y1 = n1 / nn
                log_scale += math.log(nn)
                fac = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** (-1.0 / 8.0))
                step = max(proposal, step * fac) if last else step * fac
            else:
                step *= max(0.2, 0.9 * err ** (-1.0 / 8.0))
                if step < 1e-15 * abs(r):
                    return out_u, out_du, out_s, 2
        out_u[j] = y0
        out_du[j] = y1 / h
        out_s[j] = log_scale
    return out_u, out_du, out_s, 0


def propagate(nodes, u, du, log_scale, v, m, z, h, rtol=1e-12, max_steps=5_000_000):
    """Python entry point for :func:`_propagate`; ``nodes[0]`` carries the initial data."""
    nodes = np.ascontiguousarray(nodes, dtype=float)
    return _propagate(
        nodes, complex(u), complex(h * du), float(log_scale), float(v), float(m), complex(z), float(h),
        float(rtol), _A, _B, _C, _E3, _E5, int(max_steps),
    )
