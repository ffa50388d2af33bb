"""Eigenvalue location and alpha-invariance verdicts for potential families.

Eigenvalues are zeros of the characteristic function; they are located in
the ``rho``-plane (``lambda = rho^2``) by recursive argument-principle
counting followed by Newton polishing.  Invariance of a family is judged on
normalised characteristic-function values over a real ``lambda`` grid,
computed by both evaluation routes.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .charfn import ProblemSpec, char_fn_ode, char_fn_repr, normalization
from .functions import Builtin, Fn
from .numerics.quadrature import make_composite_gauss
from .numerics.zeros import (DivergenceError, Rectangle, ZeroOnBoundaryError,
                             count_zeros, refine_zero)
from .operator import (DEFAULT_NODES, DEFAULT_TOL, EigenPair, KernelOperator,
                       apply_M, builtin_eigenpair, eigenpairs, kernel_K)
from .potential import (BridgeFunction, PiecewisePotential, build_family,
                        build_smooth_family, normalized_tail, omega)
from .wtransform import compute_w

PI = math.pi
DEFAULT_GRID = (-4.0, -1.0, 0.3, 1.7, 5.0, 10.1, 25.6, 50.0, 100.0)
INVARIANCE_THRESHOLD = 1e-6
NON_INVARIANCE_FLAG = 1e-3
SPLIT_FRACTIONS = (0.4871, 0.5313, 0.4417, 0.6029)


def worker_count() -> int:
    """Thread pool size, capped by ``DELAY_SL_THREADS`` when set."""
    cap = os.environ.get("DELAY_SL_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, min(n, 8))


def _pmap(fn, items):
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- eigenvalue location -------------------------------------------------------

@dataclass
class SpectralReport:
    spec: ProblemSpec
    window: Rectangle
    method: str
    count: int
    rho_zeros: list = field(default_factory=list)     # (rho, multiplicity)
    eigenvalues: list = field(default_factory=list)   # (lambda, multiplicity, residual)

    @property
    def consistent(self) -> bool:
        return self.count == sum(m for _, m in self.rho_zeros)

    def to_dict(self) -> dict:
        w = self.window
        return {
            "problem": {"nu": self.spec.nu, "j": self.spec.j, "a": self.spec.a},
            "window": [w.lo_re, w.hi_re, w.lo_im, w.hi_im],
            "method": self.method,
            "count": self.count,
            "rho_zeros": [{"rho": [z.real, z.imag], "multiplicity": m}
                          for z, m in self.rho_zeros],
            "eigenvalues": [{"lambda": [z.real, z.imag], "multiplicity": m, "residual": r}
                            for z, m, r in self.eigenvalues],
        }

    def rows(self) -> list[tuple]:
        return [(z.real, z.imag, m, r) for z, m, r in self.eigenvalues]


def _delta_in_rho(spec: ProblemSpec, method: str):
    f = char_fn_ode if method == "ode" else char_fn_repr
    return lambda rho: f(spec, np.asarray(rho, dtype=complex) ** 2)


def _split_counts(f, rect: Rectangle, samples: int):
    for frac in SPLIT_FRACTIONS:
        try:
            halves = rect.split(frac)
            return [(r, count_zeros(f, r, samples)) for r in halves]
        except ZeroOnBoundaryError:
            continue
    raise ZeroOnBoundaryError("could not split the cell away from zeros")


def locate_spectrum(spec: ProblemSpec, window: Rectangle, method: str = "ode",
                    boundary_samples: int = 64, tol: float = 1e-13,
                    min_size: float = 1e-4) -> SpectralReport:
    """Zeros of ``Delta`` with ``rho`` in ``window``, reported as ``lambda = rho^2``.

    Cells are split until each holds at most one zero; a cell that still
    holds several zeros once smaller than ``min_size`` is treated as one
    multiple zero.
    """
    if method not in ("ode", "repr"):
        raise ValueError("method must be ode or repr")
    f = _delta_in_rho(spec, method)
    total = count_zeros(f, window, boundary_samples)
    stack = [(window, total)]
    found = []
    while stack:
        rect, n = stack.pop()
        if n == 0:
            continue
        size = max(rect.width, rect.height)
        if n == 1 or size < min_size:
            try:
                z = refine_zero(f, rect.center, tol, multiplicity=n)
                inside = rect.contains(z, margin=1e-9 * (1 + abs(z)))
            except DivergenceError:
                inside = False
            if inside or size < min_size:
                found.append((z if inside else rect.center, n))
                continue
        stack.extend(_split_counts(f, rect, boundary_samples))
    found.sort(key=lambda t: (round(t[0].real, 9), round(t[0].imag, 9)))
    report = SpectralReport(spec, window, method, total, found)
    report.eigenvalues = _to_lambda(spec, method, found)
    return report


def _to_lambda(spec, method, rho_zeros):
    """Merge ``rho`` and ``-rho`` (same ``lambda``); ``rho = 0`` halves the order."""
    groups: list[list] = []
    for z, m in rho_zeros:
        lam = z * z
        mult = m / 2 if abs(z) < 1e-6 else m
        for g in groups:
            if abs(g[0] - lam) <= 1e-8 * (1 + abs(lam)):
                g[1] = max(g[1], mult)
                break
        else:
            groups.append([lam, mult])
    f = char_fn_ode if method == "ode" else char_fn_repr
    out = []
    for lam, mult in sorted(groups, key=lambda g: (g[0].real, g[0].imag)):
        res = abs(f(spec, lam)) / float(normalization(lam))
        out.append((complex(lam), int(math.ceil(mult)), float(res)))
    return out


# -- families ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Family:
    """A named family: its operator, verified eigenpair and boundary index."""

    name: str
    nu: int
    op: KernelOperator
    pair: EigenPair
    bridge: BridgeFunction | None = None

    @property
    def a(self) -> float:
        return self.op.a

    def member(self, alpha: complex) -> PiecewisePotential:
        if self.name == "B0-smooth":
            return build_smooth_family(alpha, self.bridge, self.op, self.pair)
        q = build_family(self.nu, alpha, self.op, self.pair)
        if self.name in ("custom", "negative-control"):
            q.family = "custom"
        return q

    @property
    def h(self) -> Fn:
        return normalized_tail(self.op, self.pair, self.nu)


def make_family(name: str, a: float, nodes: int = DEFAULT_NODES, tol: float = DEFAULT_TOL,
                bridge: BridgeFunction | None = None, kernel: Fn | None = None,
                nu: int | None = None) -> Family:
    """Build one of ``B0``, ``B1``, ``B0-smooth``, ``negative-control``, ``custom``.

    ``custom`` takes the top Nystrom eigenpair of the user ``kernel``
    (``nu`` defaults to 1); ``negative-control`` does the same for the
    constant kernel.
    """
    if name in ("B1", "B0", "B0-smooth"):
        k = 1 if name == "B1" else 0
        op, p = builtin_eigenpair(a, k, tol)
        return Family(name, k, op, p, bridge if name == "B0-smooth" else None)
    if name in ("negative-control", "custom"):
        if name == "negative-control":
            kernel = Builtin("const", value=1.0)
        if kernel is None:
            raise ValueError("custom family needs a kernel")
        op = KernelOperator(a, kernel)
        p = eigenpairs(op, nodes, 1, tol)[0]
        return Family(name, 1 if nu is None else nu, op, p)
    raise ValueError(f"unknown family {name!r}")


# -- invariance ----------------------------------------------------------------

@dataclass
class InvarianceVerdict:
    family: str
    alphas: list
    grid: list
    threshold: float
    deviation: float
    per_point: dict          # (j, lambda) -> max deviation over alpha and method
    method_discrepancy: float
    samples: dict            # (method, j, alpha index) -> normalized values
    verdict: bool

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "alphas": [[complex(z).real, complex(z).imag] for z in self.alphas],
            "lambda_grid": [float(x) for x in self.grid],
            "threshold": self.threshold,
            "deviation": self.deviation,
            "method_discrepancy": self.method_discrepancy,
            "per_point": [{"j": j, "lambda": lam, "deviation": d}
                          for (j, lam), d in sorted(self.per_point.items())],
            "verdict": self.verdict,
        }

    def recompute(self) -> float:
        """Deviation from the stored samples (reproducibility check)."""
        dev = 0.0
        for (m, j, k), v in self.samples.items():
            ref = self.samples[(m, j, 0)]
            dev = max(dev, float(np.max(np.abs(v - ref) / (1 + np.abs(ref)))))
        return dev


def _normalized_values(q: PiecewisePotential, nu: int, lam: np.ndarray, methods):
    """``{(method, j): normalized Delta}`` for one family member."""
    norm = normalization(lam)
    out = {}
    w = compute_w(nu, q) if "repr" in methods else None
    om = omega(q)
    for j in (0, 1):
        spec = ProblemSpec(nu, j, q.a, q)
        if "ode" in methods:
            out[("ode", j)] = char_fn_ode(spec, lam) / norm
        if "repr" in methods:
            out[("repr", j)] = char_fn_repr(spec, lam, w, om) / norm
    return out


def isospec_check(family: Family, alphas, lambda_grid=DEFAULT_GRID,
                  threshold: float = INVARIANCE_THRESHOLD,
                  methods=("ode", "repr")) -> InvarianceVerdict:
    """Maximum normalised deviation of ``Delta_{nu,j}`` across ``alphas``.

    The first alpha is the reference.  Deviation is
    ``|D(alpha) - D(alpha_0)| / (1 + |D(alpha_0)|)`` on values divided by
    ``cosh(|Im rho| pi)``, maximised over ``j``, grid points, alphas and
    methods.
    """
    alphas = [complex(x) for x in alphas]
    if not alphas:
        raise ValueError("need at least one alpha")
    lam = np.asarray(lambda_grid, dtype=complex)
    members = [family.member(al) for al in alphas]
    vals = _pmap(lambda q: _normalized_values(q, family.nu, lam, methods), members)
    samples = {}
    per_point: dict = {}
    dev = 0.0
    disc = 0.0
    for k, v in enumerate(vals):
        for (m, j), arr in v.items():
            samples[(m, j, k)] = arr
            ref = vals[0][(m, j)]
            d = np.abs(arr - ref) / (1 + np.abs(ref))
            for i, x in enumerate(lambda_grid):
                key = (j, float(x))
                per_point[key] = max(per_point.get(key, 0.0), float(d[i]))
            dev = max(dev, float(np.max(d)))
        if "ode" in methods and "repr" in methods:
            for j in (0, 1):
                disc = max(disc, float(np.max(np.abs(v[("ode", j)] - v[("repr", j)]))))
    return InvarianceVerdict(family.name, alphas, list(lambda_grid), threshold, dev,
                             per_point, disc, samples, dev < threshold)


# -- negative control ----------------------------------------------------------

def _cross_integral(family: Family) -> float:
    """``int_{2a}^{pi-a/2} K_h(x + a/2) int_{3a/2}^{x-a/2} e`` with the normalised tail."""
    a = family.a
    op_n = KernelOperator(a, family.h)
    e = family.pair.e
    r = make_composite_gauss(np.linspace(2 * a, PI - a / 2, 9), 24)
    x = r.nodes
    inner = e.antideriv(x - a / 2) - e.antideriv(1.5 * a)
    return float(r.integrate(kernel_K(op_n, x + a / 2) * inner))


def _integral_of_Me(family: Family) -> float:
    op_n = KernelOperator(family.a, family.h)
    r = make_composite_gauss(np.linspace(op_n.lo, op_n.hi, 9), 24)
    return float(np.real(r.integrate(apply_M(op_n, family.pair.e, r.nodes))))


def negative_control(a: float, alphas=(0.0, 1.0), lambda_grid=DEFAULT_GRID,
                     nodes: int = DEFAULT_NODES, tol: float = DEFAULT_TOL,
                     threshold: float = INVARIANCE_THRESHOLD) -> dict:
    """Constant kernel, ``nu = 1``: ``w_1`` is alpha-invariant but ``omega`` is not.

    With ``M e = -e`` the alpha-coefficient of ``omega`` is
    ``int e - I`` where ``I = int M e = -int e``, so the predicted change is
    ``omega(alpha) - omega(alpha_0) = -2 (alpha - alpha_0) I``.
    """
    fam = make_family("negative-control", a, nodes, tol)
    alphas = [complex(x) for x in alphas]
    e = fam.pair
    length = fam.op.length
    members = [fam.member(al) for al in alphas]
    ws = [compute_w(1, q) for q in members]
    w_dev = max((ws[0].sup_distance(w) for w in ws[1:]), default=0.0)
    verdict = isospec_check(fam, alphas, lambda_grid, threshold)
    I = _cross_integral(fam)
    I_op = _integral_of_Me(fam)
    om = [omega(q) for q in members]
    diffs = [o - om[0] for o in om]
    predicted = [-2 * (al - alphas[0]) * I for al in alphas]
    gap = max((abs(d - p) for d, p in zip(diffs, predicted)), default=0.0)
    return {
        "a": fam.a,
        "eta": e.eta,
        "eigen_residual": e.residual,
        "mean_of_e": e.mean,
        "mean_ratio": abs(e.mean) / length,
        "w1_invariance": w_dev,
        "delta_deviation": verdict.deviation,
        "method_discrepancy": verdict.method_discrepancy,
        "cross_integral": I,
        "integral_of_Me": I_op,
        "omega": om,
        "omega_difference": diffs,
        "omega_predicted": predicted,
        "omega_gap": gap,
        "non_invariant": verdict.deviation > NON_INVARIANCE_FLAG,
        "verdict": verdict.verdict,
    }


# -- theorem chain -------------------------------------------------------------

def _link(status: str, value: float, threshold: float | None) -> dict:
    return {"status": status, "value": float(value), "threshold": threshold}


def verify_theorem_chain(family: Family, alpha: complex, lambda_grid=DEFAULT_GRID,
                         alpha0: complex = 0.0) -> dict:
    """Check each hypothesis of the invariance argument separately.

    Links: eigen-relation residual, zero mean (required for ``nu = 1``
    only), ``w`` invariance, ``omega`` invariance and invariance of the
    characteristic functions on the grid.
    """
    p = family.pair
    alpha = complex(alpha)
    links = {}
    links["eigen_relation"] = _link("pass" if p.verified else "fail", p.residual, p.tol)
    e_sup = float(np.max(np.abs(p.e(np.linspace(family.op.lo, family.op.hi, 257)))))
    mean_ratio = abs(p.mean) / (e_sup * family.op.length)
    if family.nu == 0:
        links["mean_value"] = _link("not-required", mean_ratio, None)
    else:
        links["mean_value"] = _link("pass" if mean_ratio <= 1e-8 else "fail", mean_ratio, 1e-8)
    q0, q1 = family.member(alpha0), family.member(alpha)
    w0, w1 = compute_w(family.nu, q0), compute_w(family.nu, q1)
    wd = w0.sup_distance(w1)
    wt = 1e-8 * (1 + abs(alpha) ** 2)
    links["w_invariance"] = _link("pass" if wd < wt else "fail", wd, wt)
    od = abs(omega(q1) - omega(q0))
    hl1 = KernelOperator(family.a, family.h)
    r = make_composite_gauss(np.linspace(*hl1.tail, 9), 24)
    h_l1 = float(r.integrate(np.abs(hl1.h_value(r.nodes))))
    ot = 1e-9 * (1 + abs(alpha)) * h_l1
    links["omega_invariance"] = _link("pass" if od <= ot else "fail", od, ot)
    v = isospec_check(family, [alpha0, alpha], lambda_grid)
    links["delta_invariance"] = _link("pass" if v.verdict else "fail", v.deviation, v.threshold)
    return {"family": family.name, "nu": family.nu, "a": family.a,
            "alpha": [alpha.real, alpha.imag], "links": links,
            "all_pass": all(l["status"] != "fail" for l in links.values())}
