"""Dense symmetric linear algebra used throughout the solver."""

from __future__ import annotations

import numpy as np

__all__ = ["sym", "eig_sym", "project_psd", "lambda_max", "orthonormal_basis"]


def sym(M: np.ndarray) -> np.ndarray:
    """Symmetric part (M + M^T) / 2. Cheap drift control after updates."""
    return (M + M.T) / 2.0


def eig_sym(M: np.ndarray):
    """Full eigendecomposition of a symmetric matrix.

    Returns (w, Q) with eigenvalues w ascending and Q orthonormal,
    M = Q diag(w) Q^T. Only the lower triangle of M is referenced.
    """
    return np.linalg.eigh(M)


def project_psd(M: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) positive semidefinite matrix.

    Symmetrizes first, then clips negative eigenvalues at zero.
    """
    M = sym(np.asarray(M, dtype=float))
    w, Q = eig_sym(M)
    if w.size == 0 or w[0] >= 0.0:
        return M
    pos = w > 0.0
    if not pos.any():
        return np.zeros_like(M)
    Qp = Q[:, pos]
    return sym((Qp * w[pos]) @ Qp.T)


def lambda_max(M: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    return float(np.linalg.eigvalsh(M)[-1])


def orthonormal_basis(W: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column span of a full-column-rank matrix.

    Thin QR; raises ValueError if W is (numerically) rank deficient.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[1] == 0:
        raise ValueError("need a matrix with at least one column")
    Q, R = np.linalg.qr(W)
    d = np.abs(np.diag(R))
    tol = max(W.shape) * np.finfo(float).eps * (d.max() if d.size else 0.0)
    if d.size == 0 or d.min() <= tol:
        raise ValueError("matrix does not have full column rank")
    return Q
