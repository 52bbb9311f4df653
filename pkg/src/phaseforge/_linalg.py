"""Iterative linear-algebra workhorses: CG on normal equations, block
orthogonal iteration, and a sign-fixed QR."""

import numpy as np

from .errors import DegenerateSpectrumError


def cg_normal(apply_A, apply_At, b, x0, tol=1e-10, max_iters=None):
    """Least squares min ||A x - b|| by conjugate gradients on A'A x = A'b.

    ``apply_A`` / ``apply_At`` map the unknown (any ndarray shape) to the
    residual space and back; works for real and complex data.  Returns
    (x, converged).
    """
    def inner(u, v):
        return np.vdot(u, v).real

    x = np.array(x0, copy=True)
    g = apply_At(b - apply_A(x))          # residual of the normal equations
    d = g.copy()
    gg = inner(g, g)
    g0 = np.sqrt(gg)
    if g0 == 0.0:
        return x, True
    if max_iters is None:
        max_iters = 10 * x.size
    # once the residual reaches the rounding floor CG recurrences can
    # amplify noise instead of converging, so the best iterate seen so far
    # is tracked and returned when progress stalls
    best_x, best, stalled = x.copy(), g0, 0
    for _ in range(max_iters):
        Ad = apply_A(d)
        dAAd = inner(Ad, Ad)
        if dAAd <= 0.0:
            return best_x, False
        alpha = gg / dAAd
        x += alpha * d
        g = apply_At(b - apply_A(x))
        gg_new = inner(g, g)
        rn = np.sqrt(gg_new)
        if rn <= tol * g0:
            return x, True
        if rn < best:
            best, stalled = rn, 0
            best_x = x.copy()
        else:
            stalled += 1
            if stalled >= 30 or rn > 1e3 * g0:
                return best_x, False
        d = g + (gg_new / gg) * d
        gg = gg_new
    return best_x, False


def lstsq_dense(M, b, tol=1e-10):
    """Dense-matrix convenience wrapper around :func:`cg_normal`."""
    x0 = np.zeros(M.shape[1], dtype=np.result_type(M.dtype, b.dtype))
    return cg_normal(lambda v: M @ v, lambda r: M.conj().T @ r, b, x0,
                     tol=tol, max_iters=10 * M.shape[1])


def qr_pos(M):
    """Thin QR with the diagonal of R made real and nonnegative.

    Gives a deterministic factor representation (the plain QR phase
    ambiguity is fixed column by column).
    """
    Q, R = np.linalg.qr(M)
    d = np.diagonal(R).copy()
    phase = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1),
                     1.0)
    Q = Q * phase
    R = phase.conj()[:, None] * R
    return Q, R


def _seeded_start(n, block, dtype):
    rng = np.random.Generator(np.random.Philox(key=0x9E3779B97F4A7C15))
    S = rng.standard_normal((n, block))
    if np.issubdtype(dtype, np.complexfloating):
        S = S + 1j * rng.standard_normal((n, block))
    Q, _ = np.linalg.qr(S)
    return Q.astype(dtype, copy=False)


def top_eigenpairs(matvec, n, k, dtype=np.float64, tol=1e-8,
                   max_sweeps=1000, gap_tol=1e-12):
    """Top-k eigenpairs of a Hermitian PSD operator by orthogonal iteration.

    ``matvec`` applies the operator to an n x b block.  Iterates until the
    invariant-subspace residual falls below ``tol`` (relative) or
    ``max_sweeps`` sweeps.  Raises DegenerateSpectrumError when the operator
    is zero or the eigengap at index k is below ``gap_tol``.

    Returns (eigenvalues descending, eigenvectors as columns), both of
    length/width k.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    block = min(k + 1, n)
    Q = _seeded_start(n, block, dtype)
    for _ in range(max_sweeps):
        Z = matvec(Q)
        zn = np.linalg.norm(Z)
        if zn == 0.0:
            raise DegenerateSpectrumError("operator is numerically zero")
        resid = np.linalg.norm(Z - Q @ (Q.conj().T @ Z)) / zn
        Qn, _ = np.linalg.qr(Z)
        Q = Qn
        if resid <= tol:
            break
    # Rayleigh-Ritz extraction on the converged block
    H = Q.conj().T @ matvec(Q)
    H = 0.5 * (H + H.conj().T)
    evals, V = np.linalg.eigh(H)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    vecs = Q @ V[:, order]
    if block > k and (evals[k - 1] - evals[k]) < gap_tol:
        raise DegenerateSpectrumError(
            f"eigengap at index {k} is below {gap_tol}")
    return evals[:k], vecs[:, :k]
