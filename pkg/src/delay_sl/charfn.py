"""Characteristic functions of the delay boundary value problems.

Problem ``(nu, j)`` imposes ``y^(nu)(0) = 0`` and ``y^(j)(pi) = 0`` on
``-y'' + q(x) y(x - a) = lambda y``.  Its characteristic function is the
``j``-th derivative at ``pi`` of the solution started with
``y^(nu)(0) = 0`` and the other initial value equal to 1.

Two independent evaluations are provided:

* ``ode``: method of steps.  The solution is a finite sum of layers
  ``y = y^0 + y^1 + ...`` with ``y^0`` the free solution and
  ``y^k(x) = int_{ka}^x S(x - t) q(t) y^{k-1}(t - a) dt``, where
  ``S(z) = sin(rho z) / rho``.  Since ``q`` vanishes on ``(0, a)``, a delay
  ``a >= pi/3`` needs at most three layers.
* ``repr``: closed-form representation through ``w_nu`` and
  ``omega = int_a^pi q``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .numerics.quadrature import clean_breaks, clipped_panel_nodes, refine_breaks
from .potential import PiecewisePotential, omega as omega_of
from .wtransform import WFunction, compute_w

PI = math.pi
POINTS = 16
SERIES_RHO = 1e-3      # below this |rho| the sine kernel uses its Taylor series
SERIES_LAMBDA = 1e-2   # below this |lambda| the nu = j = 0 line uses moments
MAX_PHASE = 4.0        # panels are split when |rho| * width exceeds this


class CancellationWarning(RuntimeWarning):
    """The singular part of the small-lambda expansion failed to cancel."""


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Boundary indices ``nu`` (at 0) and ``j`` (at pi), delay ``a`` and potential."""

    nu: int
    j: int
    a: float
    q: PiecewisePotential | None = None

    def __post_init__(self):
        if self.nu not in (0, 1) or self.j not in (0, 1):
            raise ValueError("boundary indices must be 0 or 1")
        if not 0 < self.a < PI:
            raise ValueError("delay must lie in (0, pi)")
        if self.q is not None and abs(self.q.a - self.a) > 1e-12:
            raise ValueError("potential was built for a different delay")

    def with_j(self, j: int) -> "ProblemSpec":
        return ProblemSpec(self.nu, j, self.a, self.q)

    @property
    def is_real(self) -> bool:
        return self.q is None or self.q.is_real

    @cached_property
    def steps(self) -> "_Steps":
        return _Steps(self.q, self.a)

    @cached_property
    def w(self) -> WFunction | None:
        return None if self.q is None else compute_w(self.nu, self.q)

    @cached_property
    def omega(self) -> complex:
        return 0j if self.q is None else omega_of(self.q)


@dataclass(frozen=True)
class CharFnSample:
    lam: complex
    value: complex
    normalization: float
    method: str
    discrepancy: float | None = None

    @property
    def normalized(self) -> complex:
        return self.value / self.normalization

    def row(self) -> tuple:
        return (self.lam.real, self.lam.imag, self.value.real, self.value.imag,
                self.normalization, self.method)


# -- elementary kernels --------------------------------------------------------

def rho_of(lam) -> np.ndarray:
    """Square root of ``lam`` on the branch ``Im rho >= 0``."""
    r = np.sqrt(np.asarray(lam, dtype=complex))
    return np.where(r.imag < 0, -r, r)


def normalization(lam) -> np.ndarray:
    return np.cosh(np.abs(rho_of(lam).imag) * PI)


def sinc_kernel(lam, rho, z):
    """``sin(rho z) / rho``, with a 6-term Taylor series for small ``|rho|``."""
    lam, rho, z = np.broadcast_arrays(np.asarray(lam, complex), np.asarray(rho, complex),
                                      np.asarray(z, float))
    small = np.abs(rho) < SERIES_RHO
    out = np.empty(lam.shape, dtype=complex)
    big = ~small
    out[big] = np.sin(rho[big] * z[big]) / rho[big]
    if np.any(small):
        ls, zs = lam[small], z[small]
        term = zs.astype(complex)
        acc = term.copy()
        for k in range(1, 6):
            term = term * (-ls) * zs * zs / ((2 * k) * (2 * k + 1))
            acc += term
        out[small] = acc
    return out


def cos_kernel(rho, z):
    return np.cos(np.asarray(rho, complex) * np.asarray(z, float))


# -- method of steps -----------------------------------------------------------

class _Steps:
    """Layered variation-of-parameters solver, vectorised over lambda."""

    def __init__(self, q: PiecewisePotential | None, a: float,
                 points: int = POINTS, max_width: float = 0.25):
        self.q, self.a, self.points = q, float(a), points
        # layer k contributes only if k a < pi
        self.layers = int(math.ceil(PI / self.a - 1e-12))
        self.breaks = [np.array([0.0, PI])]
        qb = [] if q is None else list(q.breaks)
        prev: list[float] = []
        for k in range(1, self.layers):
            pts = qb + [b + self.a for b in prev] + [k * self.a]
            br = clean_breaks(pts, k * self.a, PI)
            self.breaks.append(refine_breaks(br, max_width))
            prev = list(br[1:-1]) + [k * self.a]

    def _subdivide(self, k: int, rho_max: float):
        widths = np.diff(self.breaks[k])
        return np.maximum(1, np.ceil(rho_max * widths / MAX_PHASE)).astype(int)

    def layer(self, k, s, lam, rho, init, deriv=False):
        """``y^k`` (or its derivative) at points ``s``; shape ``(len(lam), len(s))``."""
        s = np.asarray(s, dtype=float)
        L = lam[:, None]
        R = rho[:, None]
        if k == 0:
            c0, c1 = init
            if deriv:
                return c0 * (-L) * sinc_kernel(L, R, s) + c1 * cos_kernel(R, s)
            return c0 * cos_kernel(R, s) + c1 * sinc_kernel(L, R, s)
        rho_max = float(np.max(np.abs(rho))) if rho.size else 0.0
        sub = self._subdivide(k, rho_max)
        lo = np.full_like(s, k * self.a)
        t, w = clipped_panel_nodes(self.breaks[k], lo, np.maximum(s, lo), self.points, sub)
        M, N = t.shape
        prev = self.layer(k - 1, (t - self.a).ravel(), lam, rho, init).reshape(len(lam), M, N)
        z = s[:, None] - t
        if deriv:
            ker = cos_kernel(rho[:, None, None], z[None])
        else:
            ker = sinc_kernel(lam[:, None, None], rho[:, None, None], z[None])
        qt = self.q(t) * w
        return np.einsum("lmn,mn->lm", ker * prev, qt)

    def endpoint(self, lam, init, deriv: bool):
        lam = np.asarray(lam, dtype=complex).ravel()
        rho = rho_of(lam)
        s = np.array([PI])
        total = self.layer(0, s, lam, rho, init, deriv)
        if self.q is not None:
            for k in range(1, self.layers):
                total = total + self.layer(k, s, lam, rho, init, deriv)
        return total[:, 0]


def _as_array(lam):
    arr = np.asarray(lam, dtype=complex)
    return arr.ndim == 0, np.atleast_1d(arr)


def char_fn_ode(spec: ProblemSpec, lam, chunk: int = 32):
    """``Delta_{nu,j}(lambda)`` by the method of steps (vectorised over ``lam``)."""
    scalar, lam = _as_array(lam)
    init = (1.0, 0.0) if spec.nu == 1 else (0.0, 1.0)
    out = np.empty(lam.shape, dtype=complex)
    flat, res = lam.ravel(), out.reshape(-1)
    for i in range(0, flat.size, chunk):
        res[i:i + chunk] = spec.steps.endpoint(flat[i:i + chunk], init, spec.j == 1)
    return complex(out.ravel()[0]) if scalar else out


# -- closed-form representation -------------------------------------------------

def _w_nodes(w: WFunction, rho_max: float):
    """Quadrature nodes/weights/values for ``int w(x) f(rho (pi - 2x + a)) dx``."""
    br = np.asarray(w.rule.breaks)
    widths = np.diff(br)
    sub = np.maximum(1, np.ceil(2 * rho_max * widths / MAX_PHASE)).astype(int)
    if np.all(sub == 1):
        return w.nodes, w.rule.weights, np.asarray(w.values, dtype=complex)
    x, wt = clipped_panel_nodes(br, br[:1], br[-1:], w.rule.points_per_panel, sub)
    x, wt = x[0], wt[0]
    return x, wt, np.asarray(w(x), dtype=complex)


def char_fn_repr(spec: ProblemSpec, lam, w: WFunction | None = None,
                 omega: complex | None = None):
    """``Delta_{nu,j}(lambda)`` from ``w_nu`` and ``omega``."""
    scalar, lam = _as_array(lam)
    shape = lam.shape
    lam = lam.ravel()
    a, nu, j = spec.a, spec.nu, spec.j
    if w is None:
        w = spec.w
    om = spec.omega if omega is None else complex(omega)
    rho = rho_of(lam)
    L, R = lam[:, None], rho[:, None]
    if w is None:
        x = np.zeros(1)
        wt = np.zeros(1)
        wv = np.zeros(1, dtype=complex)
    else:
        x, wt, wv = _w_nodes(w, float(np.max(np.abs(rho))) if rho.size else 0.0)
    z = PI - 2 * x + a
    ww = wt * wv
    if nu != j:
        integ = sinc_kernel(L, R, z[None]) @ ww
        val = (np.cos(rho * PI) + om * sinc_kernel(lam, rho, PI - a) / 2
               + (-1) ** j * integ / 2)
    elif nu == 1:
        integ = cos_kernel(R, z[None]) @ ww
        val = -lam * sinc_kernel(lam, rho, PI) + (om * cos_kernel(rho, PI - a) + integ) / 2
    else:
        val = np.empty(lam.shape, dtype=complex)
        small = np.abs(lam) < SERIES_LAMBDA
        big = ~small
        if np.any(big):
            lb, rb = lam[big], rho[big]
            integ = cos_kernel(rb[:, None], z[None]) @ ww
            val[big] = (sinc_kernel(lb, rb, PI)
                        - (om * cos_kernel(rb, PI - a) - integ) / (2 * lb))
        if np.any(small):
            val[small] = _small_lambda_00(lam[small], rho[small], om, z, ww, a)
    val = val.reshape(shape)
    return complex(val.ravel()[0]) if scalar else val


def _small_lambda_00(lam, rho, om, z, ww, a, terms: int = 16):
    """Series of the ``nu = j = 0`` line; the ``1/lambda`` part cancels when
    ``omega`` equals ``int w_0``."""
    m0 = complex(np.sum(ww))
    gap = abs(om - m0)
    if gap > 1e-8 * (1 + abs(om)):
        warnings.warn(f"omega and int w_0 differ by {gap:.3e}; the small-lambda "
                      "expansion drops the resulting pole", CancellationWarning, stacklevel=3)
    acc = np.zeros(lam.shape, dtype=complex)
    lp = np.ones(lam.shape, dtype=complex)  # lambda^(k-1)
    fact = 1.0
    for k in range(1, terms):
        fact *= (2 * k - 1) * (2 * k)
        mk = complex(np.sum(ww * z ** (2 * k)))
        acc += (-1) ** k * lp * (om * (PI - a) ** (2 * k) - mk) / (2 * fact)
        lp = lp * lam
    return sinc_kernel(lam, rho, PI) - acc


# -- batch evaluation ----------------------------------------------------------

def char_fn_grid(spec: ProblemSpec, lambdas, method: str = "both") -> list[CharFnSample]:
    """Evaluate on a list of ``lambda`` values; ``both`` adds the discrepancy."""
    if method not in ("ode", "repr", "both"):
        raise ValueError("method must be ode, repr or both")
    lam = np.asarray(lambdas, dtype=complex).ravel()
    norm = normalization(lam)
    vals = {}
    if method in ("ode", "both"):
        vals["ode"] = char_fn_ode(spec, lam)
    if method in ("repr", "both"):
        vals["repr"] = char_fn_repr(spec, lam)
    disc = None
    if method == "both":
        disc = np.abs(vals["ode"] - vals["repr"]) / norm
    out = []
    for i in range(lam.size):
        for m, v in vals.items():
            out.append(CharFnSample(complex(lam[i]), complex(v[i]), float(norm[i]), m,
                                    None if disc is None else float(disc[i])))
    return out
