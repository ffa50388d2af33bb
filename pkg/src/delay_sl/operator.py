"""The integral operator with cumulative kernel and its eigenpairs.

For a real ``h`` on ``(5a/2, pi)`` the operator acts on ``L2(3a/2, pi - a)``::

    M_h f(x) = int_{3a/2}^{pi - x + a/2} K_h(x + t - a/2) f(t) dt,
    K_h(s)   = int_s^pi h(tau) dtau.

Extending ``K_h`` by zero past ``pi`` turns the triangular integration
domain into a full square with a kernel depending on ``x + t`` only.  The
kernel is continuous (``K_h(pi) = 0``) but has a kink along the
anti-diagonal; the discretisation treats the panel blocks that the kink
crosses by exact Galerkin integrals, which keeps eigenvalues and
eigenfunctions accurate to rounding level.

The unit-interval operator ``m_chi`` is the same construction on (0, 1)
with ``k(s) = int_s^1 chi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as L

from .functions import Affine, Builtin, Fn, PanelFn, Scaled
from .numerics.eigen import SymMatrix, sym_eig_arrays
from .numerics.piecewise import PanelPoly
from .numerics.quadrature import (QuadratureRule, clean_breaks, clipped_panel_nodes,
                                  gauss_legendre, make_composite_gauss, refine_breaks,
                                  row_panel_nodes)

PI = math.pi
A_MIN = PI / 3
A_MAX = 2 * PI / 5
DEFAULT_NODES = 256
DEFAULT_TOL = 1e-8


class DomainError(ValueError):
    """Argument outside the interval where the quantity is defined."""


class DegenerateOperatorError(ArithmeticError):
    """All discrete eigenvalues vanish to working precision."""


class InconsistentPairError(ArithmeticError):
    """A claimed eigen-relation fails its numerical verification."""


def check_delay(a: float, open_left: bool = False) -> float:
    """Validate ``a`` against ``[pi/3, 2pi/5)`` (or the open interval)."""
    a = float(a)
    eps = 1e-12
    if open_left:
        ok = A_MIN + eps < a < A_MAX
    else:
        ok = A_MIN - eps <= a < A_MAX
    if not ok:
        bracket = "(" if open_left else "["
        raise DomainError(f"delay a={a!r} outside {bracket}pi/3, 2pi/5)")
    return a


def grid_shape(n: int) -> tuple[int, int]:
    """Split ``n`` nodes into ``(panels, points_per_panel)``, at most 16 per panel."""
    if n < 1:
        raise ValueError("need at least one node")
    p = min(16, n)
    return max(1, round(n / p)), p


def _lagrange_coeffs(p: int) -> np.ndarray:
    """``C[m, i]``: Legendre coefficients of the i-th Gauss-node Lagrange basis."""
    g, w = gauss_legendre(p)
    V = L.legvander(g, p - 1)
    return (V * w[:, None]).T * ((2 * np.arange(p) + 1) / 2)[:, None]


class CutoffHankel:
    """Operator ``f -> int_lo^{lo + length - u} k(u + v) f(lo + v) dv``.

    Here ``u = x - lo`` and ``k`` (a function of the sum ``s = u + v``) is
    taken as zero for ``s >= length``.  ``kinks`` lists interior points of
    ``(0, length)`` where ``k`` is not smooth.
    """

    def __init__(self, lo: float, length: float, kernel, kinks=()):
        self.lo = float(lo)
        self.length = float(length)
        self._kernel = kernel
        self.kinks = tuple(sorted(c for c in kinks if 0 < c < length))

    def kernel(self, s):
        s = np.asarray(s, dtype=float)
        inside = s < self.length
        return np.where(inside, self._kernel(np.minimum(s, self.length)), 0.0)

    def grid(self, n: int) -> QuadratureRule:
        P, p = grid_shape(n)
        return make_composite_gauss(np.linspace(self.lo, self.lo + self.length, P + 1), p)

    # -- action --------------------------------------------------------------
    def apply(self, f, x, kernel=None, points: int = 24, subdivide: int = 2):
        """Evaluate the operator on callable ``f`` at points ``x``."""
        kernel = self.kernel if kernel is None else kernel
        x = np.atleast_1d(np.asarray(x, dtype=float))
        u = x - self.lo
        upper = self.lo + self.length - u
        fb = [b for b in getattr(f, "breaks", ()) if self.lo < b < self.lo + self.length]
        cols = [np.full_like(u, self.lo)]
        cols += [np.full_like(u, b) for b in fb]
        cols += [self.lo + c - u for c in self.kinks]
        cols.append(upper)
        B = np.clip(np.stack(cols, axis=1), self.lo, upper[:, None])
        B.sort(axis=1)
        t, w = row_panel_nodes(B, points, subdivide)
        vals = kernel(u[:, None] + (t - self.lo)) * f(t)
        return np.sum(w * vals, axis=1)

    # -- discretisation ------------------------------------------------------
    def matrix(self, n: int, corrected: bool = True) -> SymMatrix:
        rule = self.grid(n)
        x, w = rule.nodes, rule.weights
        u = x - self.lo
        sw = np.sqrt(w)
        A = sw[:, None] * self.kernel(u[:, None] + u[None, :]) * sw[None, :]
        if corrected:
            self._correct_blocks(A, rule)
        return SymMatrix(A, meta={"rule": rule, "corrected": corrected})

    def _correct_blocks(self, A: np.ndarray, rule: QuadratureRule, order: int = 32):
        p = rule.points_per_panel
        br = np.asarray(rule.breaks) - self.lo
        P = len(br) - 1
        C = _lagrange_coeffs(p)
        cuts = np.asarray(self.kinks + (self.length,))
        sw = np.sqrt(rule.weights)
        for i in range(P):
            u0, u1 = br[i], br[i + 1]
            for j in range(P):
                v0, v1 = br[j], br[j + 1]
                hit = cuts[(cuts > u0 + v0 + 1e-14) & (cuts < u1 + v1 - 1e-14)]
                if hit.size == 0:
                    continue
                ub = clean_breaks(np.concatenate([hit - v1, hit - v0]), u0, u1)
                uu, uw = clipped_panel_nodes(ub, u0, u1, order)
                uu, uw = uu[0], uw[0]
                cols = [np.full_like(uu, v0)] + [c - uu for c in hit] + [np.full_like(uu, v1)]
                B = np.clip(np.stack(cols, axis=1), v0, v1)
                B.sort(axis=1)
                vv, vw = row_panel_nodes(B, order)
                K = self.kernel(uu[:, None] + vv)
                Lu = L.legvander(2 * (uu - u0) / (u1 - u0) - 1, p - 1) @ C
                Lv = L.legvander(2 * (vv - v0) / (v1 - v0) - 1, p - 1) @ C
                inner = np.einsum("rs,rsb->rb", vw * K, Lv)
                G = (Lu * uw[:, None]).T @ inner
                si, sj = slice(i * p, (i + 1) * p), slice(j * p, (j + 1) * p)
                A[si, sj] = G / np.outer(sw[si], sw[sj])

    def eig(self, n: int, k: int):
        """Top-``k`` eigenvalues by magnitude with eigenfunctions as ``PanelFn``."""
        m = self.matrix(n)
        rule = m.meta["rule"]
        w, V = sym_eig_arrays(m)
        out = []
        for idx in range(min(k, len(w))):
            values = V[:, idx] / np.sqrt(rule.weights)
            out.append((float(w[idx]), PanelFn(rule.breaks, values)))
        return w, out, rule


def _sup_normalize(fn: PanelFn, rule: QuadratureRule) -> PanelFn:
    """Scale to sup-norm 1 with the largest-magnitude value positive."""
    br = np.asarray(rule.breaks)
    fine = make_composite_gauss(br, 2 * rule.points_per_panel).nodes
    pts = np.concatenate([fine, br])
    vals = fn(pts)
    k = int(np.argmax(np.abs(vals)))
    return PanelFn(rule.breaks, fn.values / vals[k])


@dataclass(frozen=True, eq=False)
class EigenPair:
    eta: float
    e: Fn
    a: float
    rule: QuadratureRule | None = None
    mean: float = 0.0
    residual: float = float("nan")
    tol: float = DEFAULT_TOL
    multiplicity: int = 1
    normalized: bool = True

    @property
    def samples(self) -> np.ndarray:
        return np.asarray(self.e(self.rule.nodes)) if self.rule is not None else np.empty(0)

    @property
    def verified(self) -> bool:
        return bool(self.residual <= self.tol * max(1.0, abs(self.eta)))


@dataclass(frozen=True, eq=False)
class UnitPair:
    chi: Fn
    epsilon: Fn
    nu: int
    residual: float


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """``M_h`` for delay ``a`` and real kernel tail ``h`` (times ``scale``)."""

    a: float
    h: Fn
    scale: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", check_delay(self.a))
        object.__setattr__(self, "scale", float(self.scale))
        if not self.h.is_real:
            raise DomainError("kernel tail h must be real-valued")
        xs = np.linspace(self.tail[0], self.tail[1], 257)
        if not np.all(np.isfinite(self.h(xs))):
            raise DomainError("kernel tail h must be finite")

    @property
    def lo(self) -> float:
        return 1.5 * self.a

    @property
    def hi(self) -> float:
        return PI - self.a

    @property
    def tail(self) -> tuple[float, float]:
        return 2.5 * self.a, PI

    @property
    def length(self) -> float:
        return PI - 2.5 * self.a

    def h_value(self, x):
        return self.scale * self.h(x)

    def scaled(self, c: float) -> "KernelOperator":
        return KernelOperator(self.a, self.h, self.scale * float(c))

    def h_normalized(self) -> Fn:
        """The kernel tail as a plain descriptor including ``scale``."""
        if self.scale == 1.0:
            return self.h
        if isinstance(self.h, Builtin):
            return self.h.scaled(self.scale)
        return Scaled(self.scale, self.h)

    def _tail_breaks(self, pieces: int = 2):
        lo, hi = self.tail
        return refine_breaks(clean_breaks(self.h.breaks, lo, hi), (hi - lo) / pieces)

    def K_proxy(self) -> PanelPoly:
        """Cached high-order fit of ``K_h`` on the tail interval."""
        if "K" not in self._cache:
            self._cache["K"] = PanelPoly.fit(lambda s: kernel_K(self, s), self._tail_breaks(4))
        return self._cache["K"]

    def core(self) -> CutoffHankel:
        if "core" not in self._cache:
            Kp = self.K_proxy()
            kinks = [b - 2.5 * self.a for b in self.h.breaks]
            self._cache["core"] = CutoffHankel(self.lo, self.length,
                                               lambda s: Kp(2.5 * self.a + s), kinks)
        return self._cache["core"]

    def norm_l2(self) -> float:
        lo, hi = self.tail
        r = make_composite_gauss(self._tail_breaks(4), 24)
        return float(np.sqrt(r.integrate(np.abs(self.h_value(r.nodes)) ** 2)))


class UnitOperator:
    """``m_chi f(xi) = int_0^{1-xi} f(eta) int_{xi+eta}^1 chi`` on (0, 1)."""

    def __init__(self, chi: Fn):
        self.chi = chi
        top = chi.antideriv(1.0)
        self._core = CutoffHankel(0.0, 1.0, lambda s: top - chi.antideriv(s), chi.breaks)

    def core(self) -> CutoffHankel:
        return self._core

    def apply(self, f, xi):
        return self._core.apply(f, xi)


# -- operations ---------------------------------------------------------------

def kernel_K(op: KernelOperator, x, points: int = 20):
    """``K_h(x) = int_x^pi h`` by composite Gauss quadrature; 0 for ``x >= pi``."""
    xa = np.asarray(x, dtype=float)
    shape = xa.shape
    xa = xa.ravel()
    tol = 1e-12
    if np.any(xa < op.a - tol) or np.any(xa > PI + tol):
        raise DomainError("K_h is evaluated on [a, pi]")
    lo = np.clip(xa, op.tail[0], PI)
    nodes, w = clipped_panel_nodes(op._tail_breaks(), lo, np.full_like(lo, PI), points)
    val = op.scale * np.sum(w * op.h(nodes), axis=1)
    return float(val[0]) if not shape else val.reshape(shape)


def apply_M(op: KernelOperator, f, x):
    """``M_h f`` at ``x`` in ``[3a/2, pi - a]``; ``f`` is any vectorised callable.

    Each row integral is split where ``x + t - a/2`` meets ``pi`` (the kernel
    cut) and the breaks of ``h``, so the quadrature sees only smooth pieces.
    """
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    tol = 1e-12
    if np.any(xa < op.lo - tol) or np.any(xa > op.hi + tol):
        raise DomainError("M_h f is defined on (3a/2, pi - a)")
    xa = np.clip(xa, op.lo, op.hi)
    kinks = [b - 2.5 * op.a for b in op.h.breaks]
    core = CutoffHankel(op.lo, op.length, None, kinks)
    kern = lambda s: np.where(s < op.length, kernel_K(op, 2.5 * op.a + np.minimum(s, op.length)), 0.0)
    val = core.apply(f, xa, kernel=kern)
    return val[0] if scalar else val


def nystrom(op: KernelOperator, n: int = DEFAULT_NODES, corrected: bool = True) -> SymMatrix:
    """Symmetric discretisation of ``M_h`` on an ``n``-node composite Gauss grid.

    Entries are ``sqrt(w_i w_j) * K(x_i + x_j - a/2)``; with ``corrected``
    the panel blocks crossed by the kernel kink are replaced by exact
    Galerkin integrals in the orthonormal nodal basis.
    """
    if n < 8:
        raise ValueError("nystrom needs n >= 8")
    return op.core().matrix(n, corrected)


def _finer_points(rule: QuadratureRule) -> np.ndarray:
    br = np.asarray(rule.breaks)
    mids = (br[:-1] + br[1:]) / 2
    fine = np.sort(np.concatenate([br, mids]))
    return make_composite_gauss(fine, rule.points_per_panel).nodes


def eigen_residual(op: KernelOperator, e, eta: float, points=None) -> float:
    """``max |M_h e - eta e| / max |e|`` on ``points`` (default: 128 Gauss nodes)."""
    if points is None:
        points = make_composite_gauss(np.linspace(op.lo, op.hi, 9), 16).nodes
    lhs = apply_M(op, e, points)
    rhs = eta * np.asarray(e(points))
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(e(points))))


def eigenpairs(op: KernelOperator, n: int = DEFAULT_NODES, k: int = 1,
               tol: float = DEFAULT_TOL, verify: bool = True) -> list[EigenPair]:
    """Top-``k`` eigenpairs of ``M_h`` by ``|eta|``.

    Eigenfunctions are sup-normalised with their largest value positive and
    re-verified by direct quadrature on a grid twice as fine.
    """
    if n < 8 or k < 1:
        raise ValueError("need n >= 8 and k >= 1")
    key = ("eig", n)
    if key not in op._cache:
        op._cache[key] = op.core().eig(n, n)
    w, pairs, rule = op._cache[key]
    scale = float(np.max(np.abs(op.K_proxy()(np.linspace(*op.tail, 65))))) * op.length
    if abs(w[0]) <= 1e-12 * max(scale, 1e-300):
        raise DegenerateOperatorError("all eigenvalues of M_h vanish")
    check = _finer_points(rule)
    out = []
    for eta, fn in pairs[:k]:
        fn = _sup_normalize(fn, rule)
        mult = int(np.sum(np.abs(w - eta) <= 1e-8 * abs(w[0])))
        res = eigen_residual(op, fn, eta, check) if verify else float("nan")
        out.append(EigenPair(eta, fn, op.a, rule, float(fn.poly.total), res, tol, mult, True))
    return out


def mean_value(p, a: float | None = None, rule: QuadratureRule | None = None) -> float:
    """``int_{3a/2}^{pi - a} e``: exact for panel polynomials, quadrature otherwise."""
    if isinstance(p, EigenPair):
        a, f = p.a, p.e
    else:
        f = p
    if isinstance(f, PanelFn):
        return float(f.poly.total)
    if rule is None:
        if a is None:
            raise ValueError("mean_value of a bare callable needs the delay a")
        rule = make_composite_gauss(np.linspace(1.5 * a, PI - a, 9), 24)
    return rule.integrate(f(rule.nodes))


def builtin_pairs(a: float):
    """Closed-form ``((h1, e1), (h0, e0))`` descriptors; ``h0`` equals ``h1``."""
    a = check_delay(a)
    h1 = Builtin("h1", a)
    return (h1, Builtin("e1", a)), (h1, Builtin("e0", a))


def builtin_operator(a: float) -> KernelOperator:
    return KernelOperator(a, Builtin("h1", a))


def builtin_eigenpair(a: float, nu: int, tol: float = DEFAULT_TOL,
                      verify: bool = True) -> tuple[KernelOperator, EigenPair]:
    """Operator and verified closed-form pair with eigenvalue ``(-1)**nu``.

    The eigenfunction is kept in its closed form (not sup-normalised).
    """
    (h1, e1), (_, e0) = builtin_pairs(a)
    op = KernelOperator(a, h1)
    e = e1 if nu == 1 else e0
    eta = -1.0 if nu == 1 else 1.0
    rule = op.core().grid(DEFAULT_NODES)
    res = eigen_residual(op, e, eta) if verify else float("nan")
    mean = float(e.integral(op.lo, op.hi))
    return op, EigenPair(eta, e, op.a, rule, mean, res, tol, 1, False)


def rescale_to_unit(op: KernelOperator, p: EigenPair, nu: int,
                    tol: float = DEFAULT_TOL, points: int = 100) -> UnitPair:
    """Map a verified pair to unit coordinates and re-verify there.

    ``eps(xi) = e(3a/2 + l xi)`` and ``chi(t) = l^2 h_nu(5a/2 + l t)`` with
    ``l = pi - 5a/2`` and ``h_nu = (-1)^nu h / eta``, so the relation to check
    is ``m_chi eps = (-1)^nu eps``.
    """
    if nu not in (0, 1):
        raise ValueError("nu must be 0 or 1")
    ell = op.length
    factor = (-1) ** nu * op.scale / p.eta
    eps = Affine(p.e, op.lo, ell)
    chi = Affine(op.h, op.tail[0], ell, scale=ell ** 2 * factor)
    xi = (np.arange(points) + 0.5) / points
    lhs = UnitOperator(chi).apply(eps, xi)
    rhs = (-1) ** nu * eps(xi)
    res = float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(eps(xi))))
    if not res <= tol:
        raise InconsistentPairError(f"unit-interval residual {res:.3e} exceeds {tol:.1e}")
    return UnitPair(chi, eps, nu, res)
