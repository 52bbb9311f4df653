"""Phase-invariant error metrics for vectors, matrices, and subspaces.

A phaseless measurement cannot distinguish x from e^{j theta} x, so all
recovery errors are measured modulo a global phase (a sign, in the real
case).
"""

import numpy as np


def phase_invariant_dist(xhat, x):
    """min over theta of || x e^{j theta} - xhat ||_2.

    The minimizing phase aligns the inner product: e^{j theta} =
    conj(<xhat, x>) / |<xhat, x>|.  The distance is evaluated as the norm of
    the aligned difference rather than via the expanded quadratic form,
    which avoids the sqrt(machine-eps) cancellation floor near zero.  For
    real inputs this equals min(||xhat - x||, ||xhat + x||).
    """
    xhat = np.asarray(xhat)
    x = np.asarray(x)
    if xhat.shape != x.shape:
        raise ValueError(f"length mismatch: {xhat.shape} vs {x.shape}")
    ip = np.conj(np.vdot(xhat, x))
    a = np.abs(ip)
    phase = ip / a if a > 0 else 1.0
    return float(np.linalg.norm(x * phase - xhat))


def matrix_phase_error(Xhat, X):
    """Column-wise phase-invariant error, normalized by ||X||_F.

    Returns sqrt( sum_k dist^2(xhat_k, x_k) / ||X||_F^2 ); each column may
    carry its own phase.
    """
    Xhat = np.asarray(Xhat)
    X = np.asarray(X)
    if Xhat.shape != X.shape:
        raise ValueError(f"shape mismatch: {Xhat.shape} vs {X.shape}")
    fro = np.linalg.norm(X)
    if fro == 0.0:
        raise ValueError("true matrix is zero; normalization undefined")
    total = sum(phase_invariant_dist(Xhat[:, k], X[:, k]) ** 2
                for k in range(X.shape[1]))
    return np.sqrt(total) / fro


def _check_orthonormal(U, tol=1e-8):
    G = U.conj().T @ U
    return np.linalg.norm(G - np.eye(U.shape[1])) <= tol * max(1, U.shape[1])


def subspace_distance(Uhat, U):
    """Sine of the largest principal angle between two column spans.

    Computed as the spectral norm of (I - Uhat Uhat') U; invariant to
    right-multiplication of either argument by a unitary matrix.
    """
    Uhat = np.asarray(Uhat)
    U = np.asarray(U)
    if Uhat.shape != U.shape:
        raise ValueError(f"shape mismatch: {Uhat.shape} vs {U.shape}")
    if not _check_orthonormal(Uhat) or not _check_orthonormal(U):
        raise ValueError("inputs must have orthonormal columns (tol 1e-8)")
    R = U - Uhat @ (Uhat.conj().T @ U)
    return np.linalg.norm(R, 2)
