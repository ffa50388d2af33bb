"""Piecewise potentials and the parametric families built from eigenpairs.

A family member is assembled from a kernel tail ``h`` on ``(5a/2, pi)`` and
an eigenfunction ``e`` on ``(3a/2, pi - a)``::

    q = 0                                      on (0, 3a/2), (pi-a, 2a), (pi-a/2, 5a/2)
    q = alpha e(x)                             on (3a/2, pi - a)
    q = -alpha K_h(x + a/2) int_{3a/2}^{x-a/2} e on (2a, pi - a/2)
    q = h(x)                                   on (5a/2, pi)

The tail is normalised as ``(-1)^nu h / eta`` so that the pair satisfies
``M_h e = (-1)^nu e``.  The smooth variant (``nu = 0`` only) replaces the
zero piece on ``(pi - a/2, 5a/2)`` by a bridge joining 0 to ``h(5a/2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functions import (Affine, Builtin, Fn, LinearFn, PanelFn, ProductIntegral, Scaled,
                        fn_from_dict)
from .numerics.piecewise import PanelPoly
from .numerics.quadrature import clean_breaks, make_composite_gauss, refine_breaks
from .operator import (DomainError, EigenPair, InconsistentPairError,
                       KernelOperator, check_delay)

PI = math.pi
FAMILIES = ("B0", "B1", "B0-smooth", "custom")
ROLES = ("zero", "analytic-builtin", "scaled-eigenfunction", "product-integral",
         "bridge", "samples")


def structural_points(a: float) -> list[float]:
    """``a, 3a/2, pi - a, 2a, pi - a/2, 5a/2`` (ordered for admissible ``a``)."""
    return [a, 1.5 * a, PI - a, 2 * a, PI - a / 2, 2.5 * a]


@dataclass(frozen=True)
class Segment:
    lo: float
    hi: float
    role: str
    fn: Fn | None = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown segment role {self.role!r}")
        if not self.hi > self.lo:
            raise ValueError("segment must have positive length")
        if self.role != "zero" and self.fn is None:
            raise ValueError(f"segment role {self.role!r} needs a function")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.fn is None:
            return np.zeros(x.shape)
        return np.asarray(self.fn(x))

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "role": self.role,
                "fn": None if self.fn is None else self.fn.to_dict()}


class PiecewisePotential:
    """Complex-valued potential on ``[0, pi]`` vanishing on ``(0, a)``.

    Points not covered by any segment carry the value 0.  At a breakpoint the
    segment starting there is used (right-continuous evaluation, with the
    last segment closed at ``pi``).
    """

    def __init__(self, a: float, segments=(), alpha: complex = 0.0,
                 family: str = "custom", meta: dict | None = None):
        self.a = check_delay(a)
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
        segs = sorted(segments, key=lambda s: s.lo)
        tol = 1e-12
        for s in segs:
            if s.lo < self.a - tol and s.role != "zero":
                raise DomainError("potential must vanish on (0, a)")
            if s.hi > PI + tol:
                raise DomainError("segments must lie inside [0, pi]")
        for s0, s1 in zip(segs[:-1], segs[1:]):
            if s1.lo < s0.hi - tol:
                raise ValueError("segments overlap")
        self.segments = tuple(segs)
        self.alpha = complex(alpha)
        self.family = family
        self.meta = dict(meta or {})
        self._proxy = None

    # -- structure -----------------------------------------------------------
    @property
    def breakpoints(self) -> np.ndarray:
        pts = structural_points(self.a)
        for s in self.segments:
            pts += [s.lo, s.hi]
        return clean_breaks(pts, 0.0, PI)

    @property
    def breaks(self) -> tuple[float, ...]:
        """Interior points where ``q`` may fail to be smooth."""
        return tuple(self.panel_breaks(0.0, PI)[1:-1])

    def panel_breaks(self, lo: float, hi: float) -> np.ndarray:
        pts = list(self.breakpoints)
        for s in self.segments:
            if s.fn is not None:
                pts += [b for b in s.fn.breaks if s.lo < b < s.hi]
        return clean_breaks(pts, lo, hi)

    @property
    def is_real(self) -> bool:
        return all(s.fn is None or s.fn.is_real for s in self.segments)

    # -- evaluation ----------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=float if self.is_real else complex)
        last = len(self.segments) - 1
        for k, s in enumerate(self.segments):
            if s.fn is None:
                continue
            m = (x >= s.lo) & ((x < s.hi) | ((k == last) & (x <= s.hi)))
            if np.any(m):
                out[m] = s.fn(x[m])
        return out

    def one_sided(self, b: float) -> tuple[complex, complex]:
        """Left and right limits at ``b`` from the segment formulas."""
        tol = 1e-12
        left = right = 0.0

        def at(fn, x):
            return complex(np.asarray(fn(np.array([x])))[0])

        for s in self.segments:
            if s.fn is None:
                continue
            if s.lo + tol < b < s.hi - tol:
                d = 1e-13 * (1 + abs(b))
                left, right = at(s.fn, b - d), at(s.fn, b + d)
            elif abs(b - s.hi) <= tol:
                left = at(s.fn, b)
            elif abs(b - s.lo) <= tol:
                right = at(s.fn, b)
        return complex(left), complex(right)

    def proxy(self) -> PanelPoly:
        """Piecewise Legendre fit, aligned to every break, for cumulative integrals."""
        if self._proxy is None:
            br = refine_breaks(self.panel_breaks(0.0, PI), 0.25)
            self._proxy = PanelPoly.fit(self, br)
        return self._proxy

    def antideriv(self, x):
        """``int_0^x q``."""
        return self.proxy().antideriv(x)

    def integral(self, lo, hi):
        return self.proxy().integral(lo, hi)

    def rule(self, lo: float = 0.0, hi: float = PI, points: int = 24,
             max_width: float = 0.25):
        return make_composite_gauss(refine_breaks(self.panel_breaks(lo, hi), max_width), points)

    def sup_norm(self) -> float:
        r = self.rule(points=16)
        b = self.breakpoints
        pts = np.concatenate([r.nodes, b, np.clip(b - 1e-13, 0, PI)])
        return float(np.max(np.abs(self(pts))))

    def l1_norm(self) -> float:
        r = self.rule()
        return float(r.integrate(np.abs(self(r.nodes))))

    def tail_fn(self) -> Fn:
        """``q`` restricted to ``(5a/2, pi)`` as a descriptor.

        A single segment spanning the tail is returned as is; otherwise the
        restriction is wrapped.
        """
        lo = 2.5 * self.a
        for s in self.segments:
            if s.lo <= lo + 1e-12 and s.hi >= PI - 1e-12 and s.fn is not None:
                return s.fn
        return Restriction(self, lo, PI)

    # -- serialisation -------------------------------------------------------
    def to_dict(self) -> dict:
        return {"a": self.a, "alpha": [self.alpha.real, self.alpha.imag],
                "family": self.family,
                "segments": [s.to_dict() for s in self.segments]}

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewisePotential":
        segs = [Segment(float(s["lo"]), float(s["hi"]), s["role"],
                        None if s.get("fn") is None else fn_from_dict(s["fn"]))
                for s in d.get("segments", [])]
        alpha = d.get("alpha", [0.0, 0.0])
        return cls(float(d["a"]), segs, complex(alpha[0], alpha[1]), d.get("family", "custom"))

    def sample(self, density: int = 1001):
        """Uniform grid ``(x, Re q, Im q)`` for plotting/export."""
        x = np.linspace(0.0, PI, int(density))
        v = np.asarray(self(x), dtype=complex)
        return x, v.real, v.imag


class Restriction(Fn):
    """A potential restricted to ``[lo, hi]`` (zero outside)."""

    kind = "samples"

    def __init__(self, q: PiecewisePotential, lo: float, hi: float):
        self.q, self.lo, self.hi = q, float(lo), float(hi)
        self.breaks = tuple(q.panel_breaks(self.lo, self.hi)[1:-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), self.q(x), 0.0)

    def antideriv(self, x):
        return self.q.antideriv(np.clip(x, self.lo, self.hi)) - self.q.antideriv(self.lo)

    @property
    def is_real(self) -> bool:
        return self.q.is_real

    def to_dict(self) -> dict:
        br = refine_breaks(self.q.panel_breaks(self.lo, self.hi), 0.1)
        nodes = make_composite_gauss(br, 24).nodes
        return PanelFn(br, self.q(nodes)).to_dict()


def zero_potential(a: float) -> PiecewisePotential:
    return PiecewisePotential(a, (), 0.0, "custom")


# -- bridge -------------------------------------------------------------------

def _h1_at_junction(a: float) -> float:
    A = 2 * PI - 5 * a
    return 6 * PI ** 2 / A ** 2 * math.cos(PI * math.sqrt(10.0) / 2)


@dataclass(frozen=True, eq=False)
class BridgeFunction:
    """A W2^1 function on ``[pi - a/2, 5a/2]`` used by the smooth family."""

    fn: Fn
    lo: float
    hi: float

    @property
    def left_value(self) -> complex:
        return complex(np.asarray(self.fn(np.array([self.lo])))[0])

    @property
    def right_value(self) -> complex:
        return complex(np.asarray(self.fn(np.array([self.hi])))[0])

    def validate(self, target: complex, tol: float = 1e-12) -> None:
        """Raise ``InconsistentPairError`` unless ``g(lo) = 0`` and ``g(hi) = target``."""
        scale = max(1.0, abs(target))
        if abs(self.left_value) > tol * scale:
            raise InconsistentPairError(
                f"bridge must vanish at pi - a/2 (got {self.left_value:.3e})")
        if abs(self.right_value - target) > tol * scale:
            raise InconsistentPairError(
                f"bridge must reach {target:.15g} at 5a/2 (got {self.right_value:.15g})")

    @classmethod
    def from_samples(cls, x, y) -> "BridgeFunction":
        x = np.asarray(x, dtype=float)
        return cls(LinearFn(x, y), float(x[0]), float(x[-1]))


def default_bridge(a: float, target: float | None = None) -> BridgeFunction:
    """Linear bridge from 0 at ``pi - a/2`` to ``h(5a/2)`` (the explicit tail by default)."""
    a = check_delay(a, open_left=True)
    lo, hi = PI - a / 2, 2.5 * a
    right = _h1_at_junction(a) if target is None else target
    return BridgeFunction(LinearFn([lo, hi], [0.0, right]), lo, hi)


# -- families -----------------------------------------------------------------

def normalized_tail(op: KernelOperator, p: EigenPair, nu: int) -> Fn:
    """``(-1)^nu h / eta`` (including the operator's scale) as a descriptor."""
    factor = (-1) ** nu * op.scale / p.eta
    if abs(factor - 1.0) <= 1e-15:
        return op.h
    if isinstance(op.h, Builtin):
        return op.h.scaled(factor)
    return Scaled(factor, op.h)


def _family_segments(a, nu, alpha, h, e, nonzero_bridge=None):
    alpha = complex(alpha)
    c = alpha.real if alpha.imag == 0 else alpha
    P = structural_points(a)
    segs = []

    def add(lo, hi, role, fn):
        if hi - lo > 1e-13:
            segs.append(Segment(lo, hi, role, fn))

    add(P[1], P[2], "scaled-eigenfunction", Scaled(c, e))
    add(P[3], P[4], "product-integral", ProductIntegral(-c, h, e, a))
    if nonzero_bridge is not None:
        add(P[4], P[5], "bridge", nonzero_bridge.fn)
    role = "analytic-builtin" if isinstance(h, Builtin) else "samples"
    add(P[5], PI, role, h)
    return segs


def _require_verified(p: EigenPair):
    if not p.verified:
        raise InconsistentPairError(
            f"eigenpair not verified (residual {p.residual:.3e}, tol {p.tol:.1e})")


def build_family(nu: int, alpha: complex, op: KernelOperator, p: EigenPair) -> PiecewisePotential:
    """Member ``alpha`` of the family generated by the pair ``(h, e)``."""
    if nu not in (0, 1):
        raise ValueError("nu must be 0 or 1")
    a = check_delay(op.a)
    _require_verified(p)
    h = normalized_tail(op, p, nu)
    segs = _family_segments(a, nu, alpha, h, p.e)
    return PiecewisePotential(a, segs, alpha, "B1" if nu == 1 else "B0",
                              meta={"nu": nu, "h": h, "e": p.e})


def build_smooth_family(alpha: complex, g: BridgeFunction | None, op: KernelOperator,
                        p0: EigenPair) -> PiecewisePotential:
    """Continuous member of the ``nu = 0`` family with a bridge on ``[pi-a/2, 5a/2]``."""
    a = check_delay(op.a, open_left=True)
    _require_verified(p0)
    h = normalized_tail(op, p0, 0)
    target = float(np.asarray(h(np.array([2.5 * a])))[0])
    if g is None:
        g = default_bridge(a, target)
    if abs(g.lo - (PI - a / 2)) > 1e-12 or abs(g.hi - 2.5 * a) > 1e-12:
        raise DomainError("bridge must live on [pi - a/2, 5a/2]")
    g.validate(target)
    segs = _family_segments(a, 0, alpha, h, p0.e, nonzero_bridge=g)
    return PiecewisePotential(a, segs, alpha, "B0-smooth",
                              meta={"nu": 0, "h": h, "e": p0.e, "bridge": g})


def with_alpha(q: PiecewisePotential, alpha: complex) -> PiecewisePotential:
    """Same family, different parameter (requires the construction metadata)."""
    m = q.meta
    if "h" not in m or "e" not in m:
        raise ValueError("potential carries no family metadata")
    segs = _family_segments(q.a, m["nu"], alpha, m["h"], m["e"], m.get("bridge"))
    return PiecewisePotential(q.a, segs, alpha, q.family, meta=m)


# -- functionals --------------------------------------------------------------

def omega(q: PiecewisePotential) -> complex:
    """``int_a^pi q`` by composite Gauss quadrature aligned to all breaks."""
    r = q.rule(q.a, PI)
    return complex(r.integrate(q(r.nodes)))


def check_w21(q: PiecewisePotential) -> dict:
    """Continuity gaps at every junction and the L2 norm of ``q'``.

    A discontinuous function is not in W2^1, so its derivative norm is
    reported as infinity.
    """
    pts = list(q.panel_breaks(0.0, PI)[1:-1])
    sup = q.sup_norm()
    gaps = []
    for b in pts:
        left, right = q.one_sided(b)
        gaps.append({"x": float(b), "gap": float(abs(right - left))})
    continuous = all(g["gap"] < 1e-10 * (1 + sup) for g in gaps)
    if not continuous:
        return {"continuous": False, "junction_gaps": gaps, "derivative_l2": math.inf}
    total = 0.0
    for s in q.segments:
        if s.fn is None:
            continue
        inner = [b for b in s.fn.breaks if s.lo < b < s.hi]
        r = make_composite_gauss(refine_breaks(clean_breaks(inner, s.lo, s.hi),
                                               0.25), 24)
        total += float(r.integrate(np.abs(np.asarray(s.fn.deriv(r.nodes))) ** 2))
    return {"continuous": True, "junction_gaps": gaps, "derivative_l2": math.sqrt(total)}


# -- random admissible potentials ---------------------------------------------

def random_potential(a: float, rng: np.random.Generator, max_abs: float = 3.0,
                     start: float | None = None, degree: int = 4,
                     complex_values: bool = False) -> PiecewisePotential:
    """Random piecewise-smooth potential vanishing on ``(0, start)``.

    ``start`` defaults to ``3a/2``.  Every structural interval carries a
    short random cosine series (plus one extra random break), so the
    result has jumps at the junctions, takes both signs and satisfies
    ``|q| <= max_abs``.
    """
    a = check_delay(a)
    start = 1.5 * a if start is None else float(start)
    pts = [p for p in structural_points(a) if p > start + 1e-12] + [PI]
    knots = [start]
    for p in pts:
        if p - knots[-1] > 1e-9:
            mid = knots[-1] + (p - knots[-1]) * rng.uniform(0.3, 0.7)
            knots += [mid, p]
    raw = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        coeffs = rng.uniform(-1, 1, degree + 1) / (1 + np.arange(degree + 1))
        raw.append((lo, hi, coeffs))
    x = np.concatenate([np.linspace(lo, hi, 64) for lo, hi, _ in raw])
    probe = PiecewisePotential(a, [_cosine_segment(lo, hi, c) for lo, hi, c in raw])
    sup = float(np.max(np.abs(probe(x))))
    scale = max_abs * rng.uniform(0.5, 0.9) / max(sup, 1e-300)
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi)) if complex_values else 1.0
    segs = [_cosine_segment(lo, hi, c, scale, phase) for lo, hi, c in raw]
    return PiecewisePotential(a, segs, 0.0, "custom")


def _cosine_segment(lo, hi, coeffs, scale=1.0, phase=1.0) -> Segment:
    w = hi - lo
    fn: Fn = Affine(Builtin("cosine-unit", coeffs=coeffs, scale=scale), -lo / w, 1.0 / w)
    if phase != 1.0:
        fn = Scaled(complex(phase), fn)
    return Segment(lo, hi, "analytic-builtin", fn)
