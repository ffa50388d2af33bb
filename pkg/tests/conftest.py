"""Shared fixtures and independent scipy oracles."""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from delay_sl.potential import random_potential
from delay_sl.spectrum import make_family

PI = math.pi
DELAYS = (PI / 3, 0.35 * PI, 0.39 * PI)


@pytest.fixture(scope="session")
def b1():
    return make_family("B1", 0.35 * PI)


@pytest.fixture(scope="session")
def b0_smooth():
    return make_family("B0-smooth", 0.35 * PI)


@pytest.fixture(scope="session")
def control():
    return make_family("negative-control", 0.35 * PI)


@pytest.fixture(scope="session")
def random_potentials():
    """Five admissible mixed-sign potentials, ``sup|q| <= 3``."""
    rng = np.random.default_rng(20240611)
    out = []
    for k in range(5):
        a = (PI / 3, 0.35 * PI, 0.37 * PI, 0.39 * PI, 0.395 * PI)[k]
        out.append(random_potential(a, rng))
    return out


def quad_pieces(f, lo, hi, points=(), limit=400):
    """``int_lo^hi f`` with scipy, split at the given break points."""
    if hi <= lo:
        return 0.0
    pts = [p for p in points if lo < p < hi]
    return quad(f, lo, hi, points=pts or None, limit=limit, epsabs=1e-14, epsrel=1e-13)[0]


def steps_oracle(q, a, lam, nu, breaks=()):
    """``(y(pi), y'(pi))`` of ``-y'' + q(x) y(x - a) = lam y`` via solve_ivp.

    Layer 1 on ``(0, 2a)`` uses the free solution as history and layer 2 on
    ``(2a, pi)`` uses the dense output of layer 1; real ``lam`` only.
    """
    lam = float(lam)
    y0 = (1.0, 0.0) if nu == 1 else (0.0, 1.0)
    rho = np.sqrt(complex(lam))

    def free(x):
        s = np.sin(rho * x) / rho if abs(rho) > 0 else x
        return float(np.real(y0[0] * np.cos(rho * x) + y0[1] * s))

    first = []

    def hist(x):
        return free(x) if (x < a or not first) else first[0].sol(x)[0]

    def rhs(x, y):
        yd = hist(x - a) if x >= a else 0.0
        return [y[1], -lam * y[0] + float(np.real(q(np.array([x]))[0])) * yd]

    opts = dict(rtol=1e-12, atol=1e-13, max_step=0.005, method="DOP853")
    stops = sorted({0.0, 2 * a, PI, *[b for b in breaks if 0 < b < PI]})
    y = np.array(y0, dtype=float)
    dense = []
    for lo, hi in zip(stops[:-1], stops[1:]):
        if lo >= 2 * a and not first:
            first.append(_Joined(dense))
        s = solve_ivp(rhs, (lo, hi), y, dense_output=True, **opts)
        dense.append((lo, hi, s.sol))
        y = s.y[:, -1]
    return y


class _Joined:
    def __init__(self, parts):
        self.parts = list(parts)

    def sol(self, x):
        for lo, hi, s in self.parts:
            if lo <= x <= hi:
                return s(x)
        raise ValueError(x)
