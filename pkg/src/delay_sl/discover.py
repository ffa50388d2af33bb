"""Search for kernels whose operator has a zero-mean eigenfunction.

Everything is done in unit coordinates: the kernel is
``chi(t) = base(t) + sum_k c_k cos(k pi t)`` on ``(0, 1)`` and the operator
is ``m_chi f(xi) = int_0^{1-xi} f(eta) int_{xi+eta}^1 chi``.  The search
objective ``|int eps| / max|eps|`` is invariant under rescaling ``chi``.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .functions import Affine, Builtin, PanelFn
from .numerics.quadrature import make_composite_gauss
from .operator import (DEFAULT_TOL, EigenPair, KernelOperator, UnitOperator,
                       _sup_normalize, check_delay, eigen_residual)

PI = math.pi
DISCOVER_NODES = 128


class StagnationWarning(RuntimeWarning):
    """Polishing made no progress for the allowed number of steps."""


@dataclass
class Candidate:
    coefficients: tuple
    base: str | None
    eta: float
    mean: float            # int_0^1 eps with eps sup-normalised
    residual: float
    index: int = 0         # position in the |eta|-ordered spectrum
    epsilon: PanelFn | None = field(default=None, repr=False)
    log: list = field(default_factory=list, repr=False)
    status: str = "scanned"

    @property
    def objective(self) -> float:
        return abs(self.mean)

    @property
    def chi(self) -> Builtin:
        return unit_kernel(self.coefficients, self.base)

    def to_dict(self) -> dict:
        return {"coefficients": list(self.coefficients), "base": self.base,
                "eta": self.eta, "mean": self.mean, "objective": self.objective,
                "residual": self.residual, "index": self.index, "status": self.status,
                "steps": len(self.log)}


def unit_kernel(coeffs, base: str | None = None) -> Builtin:
    """``base + sum_k c_k cos(k pi t)`` as a descriptor (``base`` is ``None`` or ``"chi1"``)."""
    coeffs = tuple(float(c) for c in coeffs)
    if base is None and not any(coeffs):
        raise ValueError("kernel coefficients must not all vanish")
    if base not in (None, "chi1"):
        raise ValueError(f"unknown base kernel {base!r}")
    return Builtin("cosine-unit", coeffs=coeffs, base=base)


def _check_points(n: int = 96) -> np.ndarray:
    return make_composite_gauss(np.linspace(0.0, 1.0, 7), 16).nodes[:: max(1, 96 // n)]


def _pairs(coeffs, base, n: int, k: int):
    """Sup-normalised eigenpairs ``(eta, eps)`` of ``m_chi``, top ``k`` by ``|eta|``."""
    chi = unit_kernel(coeffs, base)
    unit = UnitOperator(chi)
    w, pairs, rule = unit.core().eig(n, k)
    return unit, [(eta, _sup_normalize(fn, rule)) for eta, fn in pairs]


def _unit_residual(unit: UnitOperator, eps, eta: float) -> float:
    xi = _check_points()
    lhs = unit.apply(eps, xi)
    return float(np.max(np.abs(lhs - eta * eps(xi))) / np.max(np.abs(eps(xi))))


def _scan_one(coeffs, base, n, k, eta_floor):
    unit, pairs = _pairs(coeffs, base, n, k)
    out = []
    for idx, (eta, eps) in enumerate(pairs):
        if abs(eta) <= eta_floor:
            continue
        out.append(Candidate(tuple(float(c) for c in coeffs), base, float(eta),
                             float(eps.poly.total), _unit_residual(unit, eps, eta),
                             idx, eps))
    return out


def scan_kernels(basis, n: int = DISCOVER_NODES, k: int = 4, base: str | None = None,
                 eta_floor: float = 1e-6) -> list[Candidate]:
    """Eigenpairs of ``m_chi`` for every coefficient vector, sorted by ``|mean|``."""
    from .spectrum import _pmap

    basis = [tuple(float(c) for c in v) for v in basis]
    for v in basis:
        unit_kernel(v, base)  # validates
    found = _pmap(lambda v: _scan_one(v, base, n, k, eta_floor), basis)
    out = [c for group in found for c in group]
    out.sort(key=lambda c: (c.objective, -abs(c.eta)))
    return out


def coefficient_grid(dim: int, levels: int = 3, lo: float = -2.0, hi: float = 2.0):
    """Exhaustive grid over ``[lo, hi]^dim`` (zero vector omitted)."""
    ticks = np.linspace(lo, hi, levels)
    return [v for v in itertools.product(ticks, repeat=dim) if any(v)]


def _tracked(coeffs, base, n, ref, k: int = 6):
    """Eigenpair of ``m_chi`` with maximal overlap with the reference function."""
    unit, pairs = _pairs(coeffs, base, n, k)
    xi = _check_points()
    r = ref(xi)
    best, score = 0, -1.0
    for i, (eta, eps) in enumerate(pairs):
        v = eps(xi)
        s = abs(np.dot(v, r)) / (np.linalg.norm(v) * np.linalg.norm(r) + 1e-300)
        if s > score:
            best, score = i, s
    eta, eps = pairs[best]
    return unit, best, float(eta), eps


def polish_candidate(candidate: Candidate, n: int = DISCOVER_NODES, max_steps: int = 100,
                     target: float = 1e-10, patience: int = 20, h: float = 1e-6) -> Candidate:
    """Drive ``int eps`` to zero by coordinate secant steps on the coefficients.

    Each step differences the mean along every coordinate, moves the most
    sensitive coordinate by a (damped) secant step and re-solves the
    eigenproblem, tracking the eigenpair by maximal overlap.  Twenty
    consecutive steps without improvement end the run with status
    ``"stagnated"``.
    """
    if not candidate.residual <= 1e-6:
        raise ValueError("candidate residual must be below 1e-6 before polishing")
    base = candidate.base
    c = np.asarray(candidate.coefficients, dtype=float)
    ref = candidate.epsilon if candidate.epsilon is not None else \
        _pairs(c, base, n, candidate.index + 1)[1][candidate.index][1]
    unit, idx, eta, eps = _tracked(c, base, n, ref)
    val = float(eps.poly.total)
    log = [{"step": 0, "coefficients": c.tolist(), "eta": eta, "mean": val}]
    status = "converged" if abs(val) < target else "max-steps"
    stall = 0
    for step in range(1, max_steps + 1):
        if abs(val) < target:
            status = "converged"
            break
        grads = np.zeros(len(c))
        for i in range(len(c)):
            cp, cm = c.copy(), c.copy()
            cp[i] += h
            cm[i] -= h
            mp = _tracked(cp, base, n, eps)[3].poly.total
            mm = _tracked(cm, base, n, eps)[3].poly.total
            grads[i] = (mp - mm) / (2 * h)
        i = int(np.argmax(np.abs(grads)))
        improved = False
        if grads[i] != 0:
            delta = -val / grads[i]
            delta = float(np.clip(delta, -0.5, 0.5))
            for damp in (1.0, 0.5, 0.25, 0.125):
                trial = c.copy()
                trial[i] += damp * delta
                try:
                    t_unit, t_idx, t_eta, t_eps = _tracked(trial, base, n, eps)
                except ValueError:
                    continue
                t_val = float(t_eps.poly.total)
                if abs(t_val) < abs(val):
                    c, unit, idx, eta, eps, val = trial, t_unit, t_idx, t_eta, t_eps, t_val
                    improved = True
                    break
        stall = 0 if improved else stall + 1
        log.append({"step": step, "coefficients": c.tolist(), "eta": eta, "mean": val,
                    "improved": improved})
        if stall >= patience:
            status = "stagnated"
            warnings.warn(f"no improvement in {patience} steps, |mean| = {abs(val):.3g}",
                          StagnationWarning, stacklevel=2)
            break
    else:
        if abs(val) < target:
            status = "converged"
    res = _unit_residual(unit, eps, eta)
    return Candidate(tuple(c.tolist()), base, eta, val, res, idx, eps, log, status)


def normalized_objective(coeffs, base=None, n: int = DISCOVER_NODES, index: int = 0) -> float:
    """``|int eps| / max|eps|`` for the ``index``-th eigenpair of ``m_chi``."""
    _, pairs = _pairs(coeffs, base, n, index + 1)
    return abs(float(pairs[index][1].poly.total))


def to_operator(candidate: Candidate, a: float, tol: float = 1e-6):
    """Map a candidate back to ``(KernelOperator, EigenPair)`` at delay ``a``.

    ``h(x) = chi((x - 5a/2) / l) / l^2`` and ``e(x) = eps((x - 3a/2) / l)``
    with ``l = pi - 5a/2``; the pair is re-verified by direct quadrature.
    """
    a = check_delay(a)
    ell = PI - 2.5 * a
    h = Affine(candidate.chi, -2.5 * a / ell, 1.0 / ell, scale=1.0 / ell ** 2)
    e = Affine(candidate.epsilon, -1.5 * a / ell, 1.0 / ell)
    op = KernelOperator(a, h)
    res = eigen_residual(op, e, candidate.eta)
    rule = op.core().grid(DISCOVER_NODES)
    mean = float(np.real(rule.integrate(e(rule.nodes))))
    return op, EigenPair(candidate.eta, e, a, rule, mean, res, tol, 1, True)
