"""Pure-numpy cyclic Jacobi eigensolver (fallback for the compiled kernel).

Rotations are applied in round-robin order: each step annihilates n/2
disjoint off-diagonal pairs at once, so a sweep costs n-1 vectorised
matrix updates instead of n(n-1)/2 scalar ones.
"""
from __future__ import annotations

import numpy as np


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        p = np.array([a for a, _ in pairs], dtype=int)
        q = np.array([b for _, b in pairs], dtype=int)
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a, tol: float = 1e-15, max_sweeps: int = 60):
    A = np.array(a, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    frob = np.linalg.norm(A)
    if frob == 0.0 or n == 1:
        return np.diag(A).copy(), V, 0
    rounds = _round_robin(n)
    iu = np.triu_indices(n, 1)
    sweep = 0
    while sweep < max_sweeps:
        if np.sqrt(2.0 * np.sum(A[iu] ** 2)) <= tol * frob:
            break
        sweep += 1
        for p, q in rounds:
            apq = A[p, q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = c * Ap - s * Aq
            A[:, q] = s * Ap + c * Aq
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = c * Vp - s * Vq
            V[:, q] = s * Vp + c * Vq
    return np.diag(A).copy(), V, sweep
