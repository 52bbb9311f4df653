"""Spectral and truncated-spectral initializations.

The weighted covariance Y0 = (1/m) sum_i y_i^2 a_i a_i' concentrates around
||x||^2 I + 2 x x' (real field), so its top eigenvector is aligned with the
unknown signal; the same construction over all columns of a low-rank matrix
(with truncation of outlier measurements) exposes the column span.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._linalg import top_eigenpairs
from .errors import DegenerateInputError, DegenerateSpectrumError
from .measurement import as_matrix

# Above this dimension the spectral matrix is applied matrix-free instead of
# being materialized densely.
DENSE_LIMIT = 2048


class TruncationMode(Enum):
    NONE = "none"
    MEAN_MULTIPLE = "mean_multiple"


@dataclass(frozen=True)
class TruncationRule:
    """Keep measurement i iff y_i^2 <= c_trunc * mean(y^2).

    The paper-level constant multiplying the empirical mean involves
    condition-number and incoherence factors of the unknown signal; they are
    unknowable at runtime, so the whole factor is a single configurable
    constant (default 9).
    """

    mode: TruncationMode = TruncationMode.NONE
    c_trunc: float = 9.0

    def __post_init__(self):
        if self.c_trunc <= 0:
            raise ValueError("c_trunc must be positive")

    def mask(self, y_sq, mean_sq):
        if self.mode is TruncationMode.NONE:
            return np.ones_like(y_sq, dtype=bool)
        return y_sq <= self.c_trunc * mean_sq


NO_TRUNCATION = TruncationRule(TruncationMode.NONE)
MEAN_TRUNCATION = TruncationRule(TruncationMode.MEAN_MULTIPLE, 9.0)


class SpectralMatrix:
    """Hermitian PSD weighted covariance, dense or matrix-free.

    Stores the n x n matrix densely for n <= DENSE_LIMIT; above that it
    keeps (A, weights) and applies v -> (1/count) A' diag(w) A v on demand.
    """

    def __init__(self, blocks, n, count, dtype):
        # blocks: list of (matrix, weight-vector); weights already include
        # truncation zeros.
        self._blocks = blocks
        self.n = n
        self.count = count
        self.dtype = dtype
        self._dense = None
        if n <= DENSE_LIMIT:
            Y = np.zeros((n, n), dtype=dtype)
            for M, w in blocks:
                Y += (M.conj().T * w) @ M
            Y /= count
            self._dense = 0.5 * (Y + Y.conj().T)

    @property
    def dense(self):
        if self._dense is None:
            raise ValueError(f"matrix not materialized for n > {DENSE_LIMIT}")
        return self._dense

    def matvec(self, V):
        if self._dense is not None:
            return self._dense @ V
        out = np.zeros((self.n,) + V.shape[1:], dtype=self.dtype)
        wshape = (-1,) + (1,) * (V.ndim - 1)
        for M, w in self._blocks:
            out += M.conj().T @ ((M @ V) * w.reshape(wshape))
        return out / self.count

    def diagonal(self):
        if self._dense is not None:
            return np.real(np.diagonal(self._dense)).copy()
        d = np.zeros(self.n)
        for M, w in self._blocks:
            d += w @ (np.abs(M) ** 2)
        return d / self.count

    def top_eigenpairs(self, k, tol=1e-8, max_sweeps=1000):
        return top_eigenpairs(self.matvec, self.n, k, dtype=self.dtype,
                              tol=tol, max_sweeps=max_sweeps)


def build_y0(A, y, rule=NO_TRUNCATION):
    """Spectral matrix Y0 = (1/m) sum over kept i of y_i^2 a_i a_i'."""
    M = as_matrix(A)
    y = np.asarray(getattr(y, "values", y), dtype=float)
    m, n = M.shape
    if y.shape != (m,):
        raise ValueError(f"observation length {y.shape} does not match m={m}")
    y_sq = y ** 2
    keep = rule.mask(y_sq, y_sq.mean())
    if not keep.any():
        raise DegenerateInputError("truncation removed every measurement")
    w = np.where(keep, y_sq, 0.0)
    return SpectralMatrix([(M, w)], n, m, M.dtype)


def _fix_phase(v):
    # Deterministic representative of the phase equivalence class: the
    # largest-magnitude entry is made real and positive.
    j = int(np.argmax(np.abs(v)))
    if np.abs(v[j]) == 0:
        return v
    return v * (np.abs(v[j]) / v[j])


def spectral_estimate(Y, norm_estimate):
    """Top eigenvector of Y scaled to the given norm.

    The eigenvector is computed by orthogonal iteration (relative residual
    1e-8, at most 1000 sweeps); a vanishing top eigengap raises
    DegenerateSpectrumError.
    """
    if norm_estimate <= 0:
        raise ValueError("norm_estimate must be positive")
    _, vecs = Y.top_eigenpairs(1)
    v = _fix_phase(vecs[:, 0])
    return v * (norm_estimate / np.linalg.norm(v))


def norm_from_observation(y):
    """Signal-norm estimate sqrt(mean y^2), valid since E y^2 = ||x||^2."""
    y = np.asarray(getattr(y, "values", y), dtype=float)
    return float(np.sqrt(np.mean(y ** 2)))


def sparse_support_init(A, y, s, rule=NO_TRUNCATION):
    """Indices of the s largest diagonal entries of Y0 (ties: lowest index).

    In expectation diag(Y0)_j = ||x||^2 + 2 x_j^2, so the large entries mark
    the support.
    """
    M = as_matrix(A)
    n = M.shape[1]
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    d = build_y0(A, y, rule).diagonal()
    order = np.argsort(-d, kind="stable")
    return np.sort(order[:s])


def sparse_spectral_init(A, y, s, rule=NO_TRUNCATION):
    """Sparse spectral estimate: top eigenvector of the support submatrix.

    Returns (estimate, support, degenerate_flag); a degenerate spectrum
    (e.g. y = 0) yields a zero estimate with the flag set instead of an
    exception.
    """
    M = as_matrix(A)
    support = sparse_support_init(A, y, s, rule)
    sub = build_y0(M[:, support], y, rule)
    x = np.zeros(M.shape[1], dtype=M.dtype)
    try:
        x[support] = spectral_estimate(sub, max(norm_from_observation(y),
                                                np.finfo(float).tiny))
    except DegenerateSpectrumError:
        return x, support, True
    return x, support, False


def build_yu(E, Ys, rule=MEAN_TRUNCATION):
    """Column-span spectral matrix over all mq per-column measurements.

    Y_U = (1/(mq)) sum_{k,i} y_ik^2 a_ik a_ik' 1{y_ik^2 <= c * mean(y^2)};
    truncation discards outlier measurements that would bias the top
    eigenvectors.
    """
    Ys = np.asarray(Ys, dtype=float)
    if Ys.shape != (E.m, E.q):
        raise ValueError(
            f"observation shape {Ys.shape} does not match ({E.m}, {E.q})")
    y_sq = Ys ** 2
    mean_sq = y_sq.mean()
    blocks = []
    kept = 0
    for k, A_k in enumerate(E):
        keep = rule.mask(y_sq[:, k], mean_sq)
        kept += int(keep.sum())
        blocks.append((A_k.entries, np.where(keep, y_sq[:, k], 0.0)))
    if kept == 0:
        raise DegenerateInputError("truncation removed every measurement")
    return SpectralMatrix(blocks, E.n, E.m * E.q, E.field.dtype)


def lowrank_spectral_init(E, Ys, r, rule=MEAN_TRUNCATION):
    """Top-r eigenvectors of Y_U: an orthonormal estimate of the column span."""
    if not 1 <= r <= min(E.n, E.q):
        raise ValueError(f"need 1 <= r <= min(n, q), got r={r}")
    Y = build_yu(E, Ys, rule)
    _, vecs = Y.top_eigenpairs(r)
    # Re-orthonormalize to clean up rounding from the block iteration.
    Q, _ = np.linalg.qr(vecs)
    return Q
