"""The quadratic transform of a potential that drives the characteristic functions.

For ``q`` vanishing on ``(0, a)`` and ``x`` in ``(3a/2, pi - a/2)``::

    Q_nu(x) = F(x - a/2) G(x + a/2) - (-1)^nu int_a^{pi - x + a/2} q(t) G(x + t - a/2) dt,
    F(s) = int_a^s q,   G(s) = int_s^pi q,

and ``w_nu = q + Q_nu`` there, ``w_nu = q`` on the rest of ``(a, pi)``.
When ``q`` also vanishes on ``(a, 3a/2)`` the same function can be written
through the delay operator built from the tail of ``q``; that form is
implemented separately as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import PanelFn
from .numerics.quadrature import (QuadratureRule, clean_breaks, make_composite_gauss,
                                  refine_breaks, row_panel_nodes)
from .operator import DomainError, KernelOperator, apply_M, kernel_K
from .potential import PiecewisePotential, omega

PI = math.pi
POINTS = 16


@dataclass(frozen=True, eq=False)
class WFunction:
    """Samples of ``w_nu`` on a composite Gauss grid over ``(a, pi)``."""

    nu: int
    rule: QuadratureRule
    values: np.ndarray
    source: PiecewisePotential | None = None

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    @property
    def interpolant(self) -> PanelFn:
        return PanelFn(self.rule.breaks, self.values)

    def __call__(self, x):
        return self.interpolant(x)

    def integral(self) -> complex:
        return complex(self.rule.integrate(self.values))

    def sup_distance(self, other: "WFunction") -> float:
        if len(other.values) != len(self.values) or not np.allclose(other.nodes, self.nodes,
                                                                    rtol=0, atol=1e-14):
            return float(np.max(np.abs(self.values - other(self.nodes))))
        return float(np.max(np.abs(self.values - other.values)))

    def table(self):
        v = np.asarray(self.values, dtype=complex)
        return self.nodes, v.real, v.imag


def _kink_points(q: PiecewisePotential) -> list[float]:
    """Abscissae in ``(3a/2, pi - a/2)`` where ``Q_nu`` may lose smoothness."""
    a = q.a
    S = np.asarray(q.panel_breaks(a, PI))
    pts = list(S) + list(S + a / 2) + list(S - a / 2) + list(PI + a / 2 - S)
    pts += list((S[None, :] - S[:, None] + a / 2).ravel())
    return pts


def w_grid(q: PiecewisePotential, points: int = POINTS, max_width: float = 0.2) -> QuadratureRule:
    """Composite Gauss grid on ``(a, pi)`` aligned to every kink of ``w``."""
    a = q.a
    pts = _kink_points(q) + [1.5 * a, PI - a / 2]
    br = clean_breaks(pts, a, PI, tol=1e-12)
    return make_composite_gauss(refine_breaks(br, max_width), points)


def _check_x(q: PiecewisePotential, x: np.ndarray):
    a = q.a
    tol = 1e-12
    if np.any(x < 1.5 * a - tol) or np.any(x > PI - a / 2 + tol):
        raise DomainError("Q_nu is defined on (3a/2, pi - a/2)")


def _Q(nu: int, q: PiecewisePotential, x: np.ndarray, points: int = 20) -> np.ndarray:
    a = q.a
    P = q.proxy()
    top = P.antideriv(PI)
    base = P.antideriv(a)
    F = lambda s: P.antideriv(s) - base
    G = lambda s: top - P.antideriv(s)
    first = F(x - a / 2) * G(x + a / 2)
    upper = PI - x + a / 2
    S = refine_breaks(q.panel_breaks(a, PI), 0.2)
    cols = [np.full_like(x, b) for b in S]
    cols += [b - x + a / 2 for b in q.panel_breaks(a, PI)]
    cols += [upper]
    B = np.clip(np.stack(cols, axis=1), a, np.maximum(upper, a)[:, None])
    B.sort(axis=1)
    t, w = row_panel_nodes(B, points)
    second = np.sum(w * q(t) * G(x[:, None] + t - a / 2), axis=1)
    return first - (-1) ** nu * second


def compute_Q(nu: int, q: PiecewisePotential, x):
    """The quadratic correction ``Q_nu(x)`` (vectorised over ``x``)."""
    if nu not in (0, 1):
        raise ValueError("nu must be 0 or 1")
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    _check_x(q, xa)
    val = _Q(nu, q, np.clip(xa, 1.5 * q.a, PI - q.a / 2))
    return complex(val[0]) if scalar else val


def w_values(nu: int, q: PiecewisePotential, x) -> np.ndarray:
    """``w_nu`` at arbitrary points of ``(a, pi)``."""
    x = np.asarray(x, dtype=float)
    a = q.a
    out = np.asarray(q(x), dtype=complex)
    inside = (x > 1.5 * a) & (x < PI - a / 2)
    if np.any(inside):
        out[inside] += _Q(nu, q, x[inside])
    return out


def compute_w(nu: int, q: PiecewisePotential, points: int = POINTS) -> WFunction:
    """``w_nu`` sampled on the aligned grid of :func:`w_grid`."""
    if nu not in (0, 1):
        raise ValueError("nu must be 0 or 1")
    rule = w_grid(q, points)
    return WFunction(nu, rule, w_values(nu, q, rule.nodes), q)


def tail_operator(q: PiecewisePotential) -> KernelOperator:
    """Delay operator whose kernel tail is ``q`` restricted to ``(5a/2, pi)``."""
    h = q.tail_fn()
    if not h.is_real:
        raise DomainError("the tail of q must be real to define a delay operator")
    return KernelOperator(q.a, h)


def compute_w_specialized(nu: int, q: PiecewisePotential,
                          op: KernelOperator | None = None,
                          points: int = POINTS) -> WFunction:
    """``w_nu`` through the delay operator, for ``q`` vanishing on ``(0, 3a/2)``.

    On ``(3a/2, pi - a)`` the value is ``q - (-1)^nu M_h q``; on
    ``(2a, pi - a/2)`` it is ``q + K_h(x + a/2) int_{3a/2}^{x - a/2} q``;
    elsewhere it equals ``q`` (and ``h`` on the tail).
    """
    if nu not in (0, 1):
        raise ValueError("nu must be 0 or 1")
    a = q.a
    probe = np.linspace(a, 1.5 * a, 66)[1:-1]
    if np.any(np.abs(q(probe)) > 0):
        raise DomainError("potential must vanish on (a, 3a/2)")
    op = tail_operator(q) if op is None else op
    tail = np.linspace(2.5 * a, PI, 66)[1:-1]
    ref = np.abs(q(tail))
    if np.max(np.abs(op.h_value(tail) - q(tail))) > 1e-12 * (1 + np.max(ref)):
        raise DomainError("operator kernel does not match the tail of q")
    rule = w_grid(q, points)
    x = rule.nodes
    vals = np.asarray(q(x), dtype=complex)
    b2 = (x > 1.5 * a) & (x < PI - a)
    if np.any(b2):
        vals[b2] -= (-1) ** nu * apply_M(op, q, x[b2])
    b4 = (x > 2 * a) & (x < PI - a / 2)
    if np.any(b4):
        inner = q.integral(1.5 * a, x[b4] - a / 2)
        vals[b4] += kernel_K(op, x[b4] + a / 2) * inner
    vals[x < 1.5 * a] = 0.0
    b6 = x > 2.5 * a
    vals[b6] = op.h_value(x[b6])
    return WFunction(nu, rule, vals, q)


def check_omega_identity(q: PiecewisePotential, w0: WFunction | None = None) -> dict:
    """Compare ``omega = int_a^pi q`` with ``int_a^pi w_0``."""
    w0 = compute_w(0, q) if w0 is None else w0
    om = omega(q)
    iw = w0.integral()
    return {"omega": om, "integral_w0": iw, "gap": float(abs(om - iw))}
