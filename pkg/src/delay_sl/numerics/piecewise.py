"""Piecewise Legendre series: evaluation, derivative and antiderivative.

Used both as the representation of discrete eigenfunctions (nodal values on
a composite Gauss grid) and as a high-order proxy of piecewise-analytic
potentials, where it supplies cheap, accurate cumulative integrals.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre as L

from .quadrature import gauss_legendre


def _nodal_to_legendre(values: np.ndarray) -> np.ndarray:
    """Rows of Gauss-nodal values -> rows of Legendre coefficients."""
    p = values.shape[-1]
    g, w = gauss_legendre(p)
    V = L.legvander(g, p - 1)  # V[k, m] = P_m(g_k)
    scale = (2 * np.arange(p) + 1) / 2
    return (values * w) @ V * scale


class PanelPoly:
    """A function given by one Legendre series per panel.

    Outside ``[breaks[0], breaks[-1]]`` the function is taken to be zero.
    """

    def __init__(self, breaks, coeffs):
        self.breaks = np.asarray(breaks, dtype=float)
        self.coeffs = np.asarray(coeffs)
        if self.coeffs.shape[0] != len(self.breaks) - 1:
            raise ValueError("one coefficient row per panel required")
        width = np.diff(self.breaks)
        # antiderivative coefficients, constant chosen so each panel starts at 0
        icoef = L.legint(self.coeffs, m=1, lbnd=-1, axis=1) * (width[:, None] / 2)
        self._icoeffs = icoef
        totals = L.legval(1.0, icoef.T)
        self._offsets = np.concatenate([[0.0], np.cumsum(totals)])

    @classmethod
    def from_nodal(cls, breaks, values) -> "PanelPoly":
        """Interpolant through values at the Gauss nodes of each panel."""
        breaks = np.asarray(breaks, dtype=float)
        values = np.asarray(values).reshape(len(breaks) - 1, -1)
        return cls(breaks, _nodal_to_legendre(values))

    @classmethod
    def fit(cls, f, breaks, degree: int = 24, tol: float = 1e-13,
            max_degree: int = 96) -> "PanelPoly":
        """Adaptive per-panel fit of a vectorised callable ``f``.

        The degree is doubled on panels whose trailing coefficients are not
        below ``tol`` relative to the panel's largest coefficient.  The
        transform itself leaves noise of order ``m * eps`` in coefficient m,
        so ``tol`` cannot usefully go below ~1e-14.
        """
        breaks = np.asarray(breaks, dtype=float)
        rows = []
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            p = degree
            while True:
                g, _ = gauss_legendre(p)
                x = lo + (hi - lo) * (g + 1) / 2
                c = _nodal_to_legendre(np.asarray(f(x))[None, :])[0]
                big = np.max(np.abs(c)) if c.size else 0.0
                if big == 0 or np.max(np.abs(c[-4:])) <= tol * big or p >= max_degree:
                    break
                p *= 2
            # drop the trailing rounding-level coefficients
            keep = np.nonzero(np.abs(c) > 1e-17 * big)[0]
            rows.append(c[: keep[-1] + 1] if keep.size else c[:1])
        width = max(len(r) for r in rows)
        dtype = np.result_type(*rows)
        C = np.zeros((len(rows), width), dtype=dtype)
        for i, r in enumerate(rows):
            C[i, :len(r)] = r
        return cls(breaks, C)

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breaks, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.breaks) - 2)
        lo, hi = self.breaks[idx], self.breaks[idx + 1]
        t = (2 * x - lo - hi) / (hi - lo)
        inside = (x >= self.breaks[0]) & (x <= self.breaks[-1])
        return idx, np.clip(t, -1.0, 1.0), inside

    @staticmethod
    def _series(coeffs, idx, t):
        V = L.legvander(t.ravel(), coeffs.shape[1] - 1)
        return np.einsum("ij,ij->i", V, coeffs[idx.ravel()]).reshape(t.shape)

    def __call__(self, x):
        idx, t, inside = self._locate(x)
        return np.where(inside, self._series(self.coeffs, idx, t), 0.0)

    def deriv(self, x):
        idx, t, inside = self._locate(x)
        width = np.diff(self.breaks)
        dc = L.legder(self.coeffs, axis=1) * (2 / width[:, None])
        if dc.shape[1] == 0:
            return np.zeros(np.shape(x))
        return np.where(inside, self._series(dc, idx, t), 0.0)

    def antideriv(self, x):
        """Integral from ``breaks[0]`` to ``x`` (clamped to the support)."""
        x = np.asarray(x, dtype=float)
        idx, t, _ = self._locate(x)
        val = self._offsets[idx] + self._series(self._icoeffs, idx, t)
        val = np.where(x <= self.breaks[0], 0.0, val)
        return np.where(x >= self.breaks[-1], self._offsets[-1], val)

    def integral(self, lo, hi):
        return self.antideriv(hi) - self.antideriv(lo)

    @property
    def total(self):
        return self._offsets[-1]
