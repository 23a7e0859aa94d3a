"""Cyclic Jacobi eigensolver for small symmetric matrices."""

from __future__ import annotations

import math

import numpy as np

from .errors import NoConvergence

OFF_TOL = 1e-12
MAX_SWEEPS = 100


def off_norm(a: np.ndarray) -> float:
    """Frobenius norm of the strictly off-diagonal part."""
    off = a[~np.eye(a.shape[0], dtype=bool)]
    return math.sqrt(float(np.sum(off * off)))


def jacobi_eigh(a, tol: float = OFF_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decompose a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over every (p, q) pair above the diagonal, annihilating each
    element with a plane rotation, until the off-diagonal norm drops below
    `tol`.

    Returns
    -------
    eigenvalues : ndarray, shape (n,)
        Sorted descending.
    eigenvectors : ndarray, shape (n, n)
        Orthonormal columns. Each column is signed so that its entry of
        largest magnitude is positive.
    """
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, float(np.abs(a).max(initial=0.0)))):
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    n = a.shape[0]
    v = np.eye(n)

    for _ in range(max_sweeps + 1):
        if off_norm(a) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # A <- J^T A J with J the (p, q) plane rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(n):
        k = int(np.argmax(np.abs(v[:, j])))
        if v[k, j] < 0:
            v[:, j] = -v[:, j]
    return w, v
