# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Cyclic-by-row Jacobi eigensolver for dense real symmetric matrices.

Only rows ``p`` and ``q`` are rotated explicitly; symmetry supplies the
matching columns.  Eigenvectors are accumulated as rows of ``VT`` so that
every inner loop runs over contiguous memory.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def jacobi_eigh(a, double tol=1e-15, int max_sweeps=60):
    """Return ``(w, V, sweeps)`` with ``a @ V[:, k] == w[k] * V[:, k]``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] VT = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] Am = A
    cdef double[:, ::1] Vm = VT
    cdef Py_ssize_t p, q, k
    cdef int sweep = 0
    cdef double off, frob = 0.0, apq, theta, t, c, s, x, y, app, aqq
    for p in range(n):
        for q in range(n):
            frob += Am[p, q] * Am[p, q]
    frob = sqrt(frob)
    if frob == 0.0:
        return np.zeros(n), VT.T.copy(), 0
    while sweep < max_sweeps:
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += Am[p, q] * Am[p, q]
        if sqrt(2.0 * off) <= tol * frob:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = Am[p, q]
                if fabs(apq) <= 1e-300:
                    continue
                app = Am[p, p]
                aqq = Am[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + sqrt(1.0 + theta * theta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    x = Am[p, k]
                    y = Am[q, k]
                    Am[p, k] = c * x - s * y
                    Am[q, k] = s * x + c * y
                for k in range(n):
                    Am[k, p] = Am[p, k]
                    Am[k, q] = Am[q, k]
                Am[p, p] = app - t * apq
                Am[q, q] = aqq + t * apq
                Am[p, q] = 0.0
                Am[q, p] = 0.0
                for k in range(n):
                    x = Vm[p, k]
                    y = Vm[q, k]
                    Vm[p, k] = c * x - s * y
                    Vm[q, k] = s * x + c * y
    return np.diag(A).copy(), VT.T.copy(), sweep
