"""Sparse phase retrieval: AltMinSparse, thresholded WF, and CoPRAM, plus
the hard-thresholding primitive and the CoSaMP inner solver."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError
from .measurement import as_matrix
from .spectral import sparse_spectral_init, sparse_support_init
from .unstructured import (SolverConfig, SolverReport, Termination, _Run,
                           phase_of, truncated_gradient)


@dataclass(frozen=True)
class SparseEstimate:
    """Signal estimate with explicit support; values vanish off support."""

    values: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        off = np.setdiff1d(np.arange(self.values.shape[0]), self.support)
        if np.any(self.values[off] != 0):
            raise ValueError("values must be zero off the support")


def _top_s_indices(x, s):
    # ties broken toward the lowest index: stable sort on descending |x|
    order = np.argsort(-np.abs(x), kind="stable")
    return np.sort(order[:s])


def hard_threshold(x, s):
    """Keep the s largest-magnitude entries, zero the rest.

    This is the Euclidean projection onto s-sparse vectors; ties are broken
    toward the lowest index.  Idempotent.
    """
    x = np.asarray(x)
    n = x.shape[0]
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    support = _top_s_indices(x, s)
    out = np.zeros_like(x)
    out[support] = x[support]
    return SparseEstimate(values=out, support=support)


def cosamp(A, b, s, max_iters=50, tol=1e-6):
    """CoSaMP for the linear problem b = A x with x s-sparse.

    Per iteration: proxy A' r, merge the 2s strongest proxy indices with the
    current support, least squares on the merged support, prune to s.  Stops
    when the residual stagnates (relative change < tol) or after
    ``max_iters`` iterations.  Returns (SparseEstimate, degenerate_flag).
    """
    M = as_matrix(A)
    b = np.asarray(b)
    m, n = M.shape
    if b.shape != (m,):
        raise ValueError(f"rhs length {b.shape} does not match m={m}")
    x = np.zeros(n, dtype=np.result_type(M.dtype, b.dtype))
    support = np.array([], dtype=int)
    r = b.copy()
    r_norm = np.linalg.norm(r)
    degenerate = False
    if r_norm == 0:
        return SparseEstimate(values=x, support=_top_s_indices(x, s)), False
    for _ in range(max_iters):
        proxy = M.conj().T @ r
        cand = _top_s_indices(proxy, min(2 * s, n))
        merged = np.union1d(cand, support)
        sub = M[:, merged]
        coef, *_ = np.linalg.lstsq(sub, b, rcond=None)
        if not np.all(np.isfinite(coef)):
            degenerate = True
            coef = np.nan_to_num(coef)
        full = np.zeros(n, dtype=x.dtype)
        full[merged] = coef
        est = hard_threshold(full, s)
        x, support = est.values, est.support
        r = b - M @ x
        r_norm_new = np.linalg.norm(r)
        if abs(r_norm - r_norm_new) < tol * max(r_norm, np.finfo(float).tiny):
            r_norm = r_norm_new
            break
        r_norm = r_norm_new
    return SparseEstimate(values=x, support=support), degenerate


def altmin_sparse(y, source, s, cfg=None, truth=None):
    """AltMinPhase restricted to a one-shot support estimate.

    The support comes from the s largest diagonal entries of Y0 and is never
    revisited, so recovery needs the smallest nonzero entry of the signal to
    stand out; the estimate is zero on the complement.
    """
    from ._linalg import cg_normal

    cfg = cfg or SolverConfig(max_iters=100)
    M = as_matrix(source)
    yv = np.asarray(getattr(y, "values", y), dtype=float)
    n = M.shape[1]
    support = sparse_support_init(M, yv, s, cfg.truncation)
    x0, _, flag = sparse_spectral_init(M, yv, s, cfg.truncation)
    if flag:
        return SolverReport(estimate=x0, trace=[np.inf], iterations=0,
                            termination=Termination.DEGENERATE, wall_time=0.0)
    sub = M[:, support]
    run = _Run(x0, truth)
    for _ in range(cfg.max_iters):
        if sub.shape[0] < sub.shape[1]:
            return run.report(Termination.DEGENERATE)
        c = phase_of(sub @ run.x[support])
        xs, _ = cg_normal(lambda v: sub @ v, lambda r: sub.conj().T @ r,
                          c * yv, run.x[support], tol=1e-10,
                          max_iters=10 * sub.shape[1])
        x_new = np.zeros(n, dtype=M.dtype)
        x_new[support] = xs
        if not np.all(np.isfinite(x_new)):
            return run.report(Termination.DEGENERATE)
        if run.step(x_new, cfg.tol):
            return run.report(Termination.CONVERGED)
    return run.report(Termination.MAX_ITERS)


def _centered_support(M, yv, s):
    """Support guess from the centered diagonal statistic.

    d_j = (1/m) sum_i (y_i^2 - mean(y^2)) (|a_ij|^2 - 1) has expectation
    2 x_j^2 (real field) like the raw diagonal of Y0, but subtracting the
    means cancels the ||x||^2-level noise common to every coordinate, so
    the top-s entries recover the support more reliably at small m.
    """
    m = M.shape[0]
    ysq = yv ** 2
    d = ((ysq - ysq.mean()) @ (np.abs(M) ** 2 - 1.0)) / m
    return _top_s_indices(d, s)


def _support_restricted_estimate(M, yv, support):
    from .spectral import (build_y0, norm_from_observation, spectral_estimate)

    x = np.zeros(M.shape[1], dtype=M.dtype)
    try:
        x[support] = spectral_estimate(build_y0(M[:, support], yv),
                                       norm_from_observation(yv))
    except DegenerateError:
        pass
    return x


def thresh_wf(y, A, s, cfg=None, truth=None):
    """Projected gradient descent: one gradient step, then keep top s entries.

    The support is re-estimated every iteration via the projection, which is
    what removes the minimum-nonzero-entry requirement that one-shot-support
    methods need.  Two starting points are tried -- the sparse spectral
    estimate and the same construction on the centered-statistic support --
    and the iterate with the smaller observation residual || |A x| - y ||
    wins.  The gradient follows cfg.gradient as in twf; with s = n,
    gradient="intensity" and truncation thresholds disabled each run
    reproduces wf exactly.
    """
    cfg = cfg or SolverConfig(max_iters=500, step_size=0.25)
    M = as_matrix(A)
    yv = np.asarray(getattr(y, "values", y), dtype=float)
    x_raw, _, flag = sparse_spectral_init(M, yv, s, cfg.truncation)
    if flag:
        return SolverReport(estimate=x_raw, trace=[np.inf], iterations=0,
                            termination=Termination.DEGENERATE, wall_time=0.0)
    starts = [x_raw]
    x_cen = _support_restricted_estimate(M, yv, _centered_support(M, yv, s))
    if np.linalg.norm(x_cen) > 0:
        starts.append(x_cen)
    best = None
    best_res = np.inf
    for x0 in starts:
        if cfg.gradient == "poisson":
            mu = cfg.step_size
        else:
            mu = cfg.step_size / (np.linalg.norm(x0) ** 2)
        run = _Run(x0, truth)
        termination = Termination.MAX_ITERS
        with np.errstate(over="ignore", invalid="ignore"):
            for _ in range(cfg.max_iters):
                g = truncated_gradient(M, yv, run.x, cfg)
                x_new = hard_threshold(run.x - mu * g, s).values
                if not np.all(np.isfinite(x_new)):
                    termination = Termination.DEGENERATE
                    break
                if run.step(x_new, cfg.tol):
                    termination = Termination.CONVERGED
                    break
        report = run.report(termination)
        res = (np.inf if termination is Termination.DEGENERATE
               else np.linalg.norm(np.abs(M @ report.estimate) - yv))
        if res < best_res:
            best_res = res
            best = report
    return best


def copram(y, source, s, cfg=None, truth=None):
    """Alternate phase estimation with a compressive-sensing solve.

    Each iteration treats C y (phases from the current estimate applied to
    the magnitudes) as linear measurements and runs CoSaMP, so the support
    is re-estimated every iteration.
    """
    cfg = cfg or SolverConfig(max_iters=100)
    M = as_matrix(source)
    yv = np.asarray(getattr(y, "values", y), dtype=float)
    x0, _, flag = sparse_spectral_init(M, yv, s, cfg.truncation)
    if flag:
        return SolverReport(estimate=x0, trace=[np.inf], iterations=0,
                            termination=Termination.DEGENERATE, wall_time=0.0)
    run = _Run(x0, truth)
    degenerate = False
    for _ in range(cfg.max_iters):
        c = phase_of(M @ run.x)
        est, deg = cosamp(M, c * yv, s)
        degenerate = degenerate or deg
        x_new = est.values
        if not np.all(np.isfinite(x_new)):
            return run.report(Termination.DEGENERATE)
        if run.step(x_new, cfg.tol):
            rep = run.report(Termination.CONVERGED)
            rep.column_flags = [degenerate]
            return rep
    rep = run.report(Termination.MAX_ITERS
                     if not degenerate else Termination.DEGENERATE)
    rep.column_flags = [degenerate]
    return rep
