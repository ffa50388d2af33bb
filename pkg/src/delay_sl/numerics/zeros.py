"""Argument-principle zero counting and local root polishing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ZeroOnBoundaryError(ArithmeticError):
    """The function (nearly) vanishes on the contour."""


class ResolutionError(ArithmeticError):
    """Boundary sampling could not resolve the phase."""


class DivergenceError(ArithmeticError):
    """Root polishing failed to converge."""


@dataclass(frozen=True)
class Rectangle:
    lo_re: float
    hi_re: float
    lo_im: float
    hi_im: float

    def __post_init__(self):
        if not (self.lo_re < self.hi_re and self.lo_im < self.hi_im):
            raise ValueError("degenerate rectangle")

    @property
    def center(self) -> complex:
        return complex((self.lo_re + self.hi_re) / 2, (self.lo_im + self.hi_im) / 2)

    @property
    def width(self) -> float:
        return self.hi_re - self.lo_re

    @property
    def height(self) -> float:
        return self.hi_im - self.lo_im

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return (self.lo_re - margin <= z.real <= self.hi_re + margin
                and self.lo_im - margin <= z.imag <= self.hi_im + margin)

    def boundary(self, s):
        """Counter-clockwise boundary point at perimeter fraction ``s`` in [0, 1)."""
        w, h = self.width, self.height
        d = np.asarray(s) * 2 * (w + h)
        z = np.empty(d.shape, dtype=complex)
        c0 = complex(self.lo_re, self.lo_im)
        m1 = d < w
        m2 = (~m1) & (d < w + h)
        m3 = (~m1) & (~m2) & (d < 2 * w + h)
        m4 = ~(m1 | m2 | m3)
        z[m1] = c0 + d[m1]
        z[m2] = complex(self.hi_re, self.lo_im) + 1j * (d[m2] - w)
        z[m3] = complex(self.hi_re, self.hi_im) - (d[m3] - w - h)
        z[m4] = complex(self.lo_re, self.hi_im) - 1j * (d[m4] - 2 * w - h)
        return z

    def split(self, frac: float = 0.5) -> tuple["Rectangle", "Rectangle"]:
        """Cut across the longer side at ``frac`` of its length."""
        if self.width >= self.height:
            x = self.lo_re + frac * self.width
            return (Rectangle(self.lo_re, x, self.lo_im, self.hi_im),
                    Rectangle(x, self.hi_re, self.lo_im, self.hi_im))
        y = self.lo_im + frac * self.height
        return (Rectangle(self.lo_re, self.hi_re, self.lo_im, y),
                Rectangle(self.lo_re, self.hi_re, y, self.hi_im))


def count_zeros(f, rect: Rectangle, boundary_samples: int = 64,
                max_doublings: int = 6) -> int:
    """Winding number of ``f`` around ``rect`` (zeros counted with multiplicity).

    ``f`` must accept an array of complex points.  Sampling is doubled until
    every phase increment between neighbouring samples is below pi/2.
    """
    n = max(8, int(boundary_samples))
    s = np.arange(n) / n
    vals = np.asarray(f(rect.boundary(s)), dtype=complex)
    for _ in range(max_doublings + 1):
        mod = np.abs(vals)
        if not np.all(np.isfinite(vals)):
            raise ResolutionError("non-finite values on the contour")
        if mod.min() <= 1e-12 * mod.max() or mod.max() == 0:
            raise ZeroOnBoundaryError("function vanishes on the contour")
        ring = np.append(vals, vals[0])
        inc = np.angle(ring[1:] / ring[:-1])
        if np.max(np.abs(inc)) < np.pi / 2:
            return int(round(inc.sum() / (2 * np.pi)))
        mid = (np.arange(n) + 0.5) / n
        new = np.asarray(f(rect.boundary(mid)), dtype=complex)
        merged = np.empty(2 * n, dtype=complex)
        merged[0::2], merged[1::2] = vals, new
        vals, n = merged, 2 * n
    if np.max(np.abs(inc)) > 0.99 * np.pi:
        # a sign flip that survives every doubling straddles a boundary zero
        raise ZeroOnBoundaryError("function changes sign across the contour")
    raise ResolutionError(f"phase unresolved after {max_doublings} doublings")


def _scalar(f, z: complex) -> complex:
    return complex(np.asarray(f(np.array([z])), dtype=complex).ravel()[0])


def refine_zero(f, seed: complex, tol: float = 1e-12, multiplicity: int = 1,
                max_iter: int = 60) -> complex:
    """Newton iteration with a central-difference derivative.

    For a zero of known ``multiplicity`` m the step is scaled by m, which
    restores quadratic convergence.
    """
    z = complex(seed)
    for _ in range(max_iter):
        fz = _scalar(f, z)
        if fz == 0:
            return z
        h = 1e-6 * (1 + abs(z))
        df = (_scalar(f, z + h) - _scalar(f, z - h)) / (2 * h)
        if df == 0 or not np.isfinite(df):
            raise DivergenceError("vanishing derivative during refinement")
        step = multiplicity * fz / df
        z -= step
        if not np.isfinite(z):
            raise DivergenceError("iterate left the finite plane")
        if abs(step) <= tol * (1 + abs(z)):
            return z
    raise DivergenceError(f"no convergence in {max_iter} iterations")
