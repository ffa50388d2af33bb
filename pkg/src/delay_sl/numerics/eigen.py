"""Dense real-symmetric eigensolver.

The cyclic Jacobi kernel is compiled with Cython when the extension is
available; otherwise a vectorised numpy version is used.  Set
``DELAY_SL_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import _jacobi_py

if os.environ.get("DELAY_SL_PURE_PYTHON", "") not in ("", "0"):
    _jacobi_c = None
else:
    try:
        from . import _jacobi as _jacobi_c
    except ImportError:  # extension not built
        _jacobi_c = None

BACKEND = "cython" if _jacobi_c is not None else "python"


def jacobi_backend(name: str | None = None):
    """Return the ``jacobi_eigh`` callable for ``name`` (default: active backend)."""
    name = name or BACKEND
    if name == "cython":
        if _jacobi_c is None:
            raise RuntimeError("compiled Jacobi extension is not available")
        return _jacobi_c.jacobi_eigh
    if name == "python":
        return _jacobi_py.jacobi_eigh
    raise ValueError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class SymMatrix:
    """Real symmetric matrix; symmetry is enforced on construction."""

    entries: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("SymMatrix needs a square array")
        if not np.all(np.isfinite(m)):
            raise ValueError("SymMatrix entries must be finite")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    @property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self.entries))


def sym_eig_arrays(m: SymMatrix | np.ndarray, backend: str | None = None):
    """Eigenvalues and column eigenvectors sorted by descending magnitude."""
    if not isinstance(m, SymMatrix):
        m = SymMatrix(np.asarray(m, dtype=float))
    w, V, _ = jacobi_backend(backend)(m.entries)
    order = _magnitude_order(w)
    return w[order], V[:, order]


def _magnitude_order(w: np.ndarray, rel: float = 1e-12) -> np.ndarray:
    """Descending ``|w|``; magnitudes equal to ``rel`` are ordered positive first."""
    order = np.argsort(-np.abs(w), kind="stable")
    mags = np.abs(w[order])
    tol = rel * (mags[0] if len(mags) else 0.0)
    out, start = [], 0
    for k in range(1, len(order) + 1):
        if k == len(order) or mags[start] - mags[k] > tol:
            group = order[start:k]
            out.extend(group[np.argsort(-w[group], kind="stable")])
            start = k
    return np.asarray(out, dtype=int)


def sym_eig(m: SymMatrix | np.ndarray, backend: str | None = None):
    """List of ``(eigenvalue, unit eigenvector)`` by descending ``|eigenvalue|``."""
    w, V = sym_eig_arrays(m, backend)
    return [(float(w[k]), V[:, k].copy()) for k in range(len(w))]
