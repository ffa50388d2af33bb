"""Composite Gauss-Legendre rules on panelled intervals."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class InvalidInputError(ValueError):
    """Raised when a quadrature request is malformed."""


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point rule on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]
    breaks: tuple[float, ...] = ()
    points_per_panel: int = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> complex | float:
        return np.dot(self.weights, values)

    def __call__(self, f):
        return np.dot(self.weights, f(self.nodes))


def make_composite_gauss(panel_breaks, points_per_panel: int) -> QuadratureRule:
    """Concatenate ``points_per_panel``-point Gauss rules over each panel.

    Exact for polynomials of degree ``2*points_per_panel - 1`` on every panel.
    """
    breaks = np.asarray(panel_breaks, dtype=float)
    if breaks.ndim != 1 or len(breaks) < 2:
        raise InvalidInputError("need at least two panel breaks")
    if not np.all(np.isfinite(breaks)):
        raise InvalidInputError("panel breaks must be finite")
    if np.any(np.diff(breaks) <= 0):
        raise InvalidInputError("panel breaks must be strictly increasing")
    if int(points_per_panel) != points_per_panel or points_per_panel < 1:
        raise InvalidInputError("points_per_panel must be a positive integer")
    p = int(points_per_panel)
    g, w = gauss_legendre(p)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = (hi - lo) / 2
    nodes = (lo + half * (g + 1)).ravel()
    weights = (half * w).ravel()
    return QuadratureRule(nodes, weights, (float(breaks[0]), float(breaks[-1])),
                          tuple(float(b) for b in breaks), p)


def refine_breaks(breaks, max_width: float) -> np.ndarray:
    """Subdivide panels uniformly so that none is wider than ``max_width``."""
    breaks = np.asarray(breaks, dtype=float)
    out = [breaks[:1]]
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        m = max(1, int(np.ceil((hi - lo) / max_width - 1e-12)))
        out.append(np.linspace(lo, hi, m + 1)[1:])
    return np.concatenate(out)


def clean_breaks(points, lo: float, hi: float, tol: float = 1e-13) -> np.ndarray:
    """Sorted unique break points inside [lo, hi], endpoints included.

    Points closer than ``tol * (1 + |hi - lo|)`` are merged; this keeps
    panels aligned to structural points without creating sliver panels.
    """
    pts = np.asarray(sorted(p for p in points if lo < p < hi), dtype=float)
    keep = [lo]
    eps = tol * (1.0 + abs(hi - lo))
    for p in pts:
        if p - keep[-1] > eps:
            keep.append(float(p))
    if hi - keep[-1] <= eps and len(keep) > 1:
        keep.pop()
    keep.append(hi)
    return np.asarray(keep)


def clipped_panel_nodes(breaks, lo, hi, points_per_panel: int = 16, subdivide=None):
    """Gauss nodes/weights on ``[lo_m, hi_m]`` for many intervals at once.

    ``breaks`` is a fixed sorted array of candidate panel boundaries; every
    panel is clipped into each requested interval, so panels outside become
    zero-width with zero weight.  The output shape is ``(len(lo), n_nodes)``
    which lets nested integrals stay fully vectorised.  ``subdivide`` gives a
    per-panel subdivision count applied before clipping.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    b = np.asarray(breaks, dtype=float)
    if subdivide is not None:
        b = np.concatenate([np.linspace(b0, b1, int(m) + 1)[:-1]
                            for b0, b1, m in zip(b[:-1], b[1:], subdivide)] + [b[-1:]])
    g, w = gauss_legendre(points_per_panel)
    left = np.clip(b[None, :-1], lo[:, None], hi[:, None])
    right = np.clip(b[None, 1:], lo[:, None], hi[:, None])
    half = (right - left) / 2
    nodes = left[:, :, None] + half[:, :, None] * (g + 1)
    weights = half[:, :, None] * w
    shape = (len(lo), -1)
    return nodes.reshape(shape), weights.reshape(shape)


def row_panel_nodes(row_breaks, points_per_panel: int = 16, subdivide: int = 1):
    """Gauss nodes for intervals whose panel breaks differ row by row.

    ``row_breaks`` has shape ``(rows, k)`` and must be sorted along each row;
    consecutive entries delimit panels (zero-width panels get zero weight).
    Each panel is split into ``subdivide`` equal pieces.
    """
    B = np.asarray(row_breaks, dtype=float)
    if subdivide > 1:
        frac = np.arange(subdivide) / subdivide
        left = B[:, :-1, None] + (B[:, 1:, None] - B[:, :-1, None]) * frac
        B = np.concatenate([left.reshape(B.shape[0], -1), B[:, -1:]], axis=1)
    g, w = gauss_legendre(points_per_panel)
    half = (B[:, 1:] - B[:, :-1]) / 2
    nodes = B[:, :-1, None] + half[:, :, None] * (g + 1)
    weights = half[:, :, None] * w
    return nodes.reshape(B.shape[0], -1), weights.reshape(B.shape[0], -1)
