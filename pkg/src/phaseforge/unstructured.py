"""Standard phase retrieval solvers on full vectors.

All three solvers share the stopping rule (successive-iterate
phase-invariant change below tol * ||estimate||) and report a per-iteration
error trace: against the ground truth when it is supplied, otherwise the
successive-iterate distance.
"""

import time
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from ._linalg import cg_normal
from .measurement import SampleStream, as_matrix
from .metrics import phase_invariant_dist
from .spectral import NO_TRUNCATION, TruncationRule


class Termination(Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    DEGENERATE = "degenerate"


@dataclass
class SolverConfig:
    max_iters: int = 500
    tol: float = 1e-10           # relative successive-iterate change
    step_size: float = 0.25
    sample_splitting: bool = False
    truncation: TruncationRule = dc_field(default_factory=lambda: NO_TRUNCATION)
    seed: int = 0
    # gradient truncation thresholds (TWF); lb on |<a_i, x>| / ||x||,
    # ub on y_i relative to mean(y)
    alpha_lb: float = 0.3
    alpha_ub: float = 5.0
    # TWF gradient flavor: "poisson" (likelihood gradient, scale-free step)
    # or "intensity" (same gradient as wf, step scaled by 1/||x0||^2)
    gradient: str = "poisson"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class SolverReport:
    estimate: np.ndarray
    trace: list
    iterations: int
    termination: Termination
    wall_time: float
    column_flags: list = dc_field(default_factory=list)
    times: list = dc_field(default_factory=list)  # cumulative seconds per row

    @property
    def final_error(self):
        return self.trace[-1]


def phase_of(z):
    """z / |z| element-wise, with the convention phase_of(0) = 1."""
    z = np.asarray(z)
    a = np.abs(z)
    return np.where(a > 0, z / np.where(a > 0, a, 1), 1.0)


def _err(x_new, x_old, truth):
    if truth is not None:
        return phase_invariant_dist(x_new, truth) / np.linalg.norm(truth)
    return phase_invariant_dist(x_new, x_old)


class _Run:
    """Trace bookkeeping shared by the iterative solvers."""

    def __init__(self, x0, truth):
        self.truth = truth
        self.x = np.array(x0, copy=True)
        self.trace = [_err(self.x, np.zeros_like(self.x), truth)
                      if truth is not None else 0.0]
        self.t0 = time.perf_counter()
        self.times = [0.0]

    def step(self, x_new, tol):
        change = phase_invariant_dist(x_new, self.x)
        self.trace.append(_err(x_new, self.x, self.truth))
        self.times.append(time.perf_counter() - self.t0)
        self.x = x_new
        return change < tol * max(np.linalg.norm(x_new), np.finfo(float).tiny)

    def report(self, termination):
        return SolverReport(estimate=self.x, trace=self.trace,
                            iterations=len(self.trace) - 1,
                            termination=termination,
                            wall_time=time.perf_counter() - self.t0,
                            times=self.times)


def _iteration_data(y, source, cfg):
    """Yield the (A, y) pair to use at each iteration.

    With sample splitting, ``source`` must be a SampleStream and each
    iteration consumes one fresh pair; otherwise the single ensemble and
    observation are reused.
    """
    if cfg.sample_splitting:
        if not isinstance(source, SampleStream):
            raise ValueError("sample_splitting requires a SampleStream")
        while True:
            A_t, y_t = source.next_pair()
            yield as_matrix(A_t), np.asarray(y_t.values, dtype=float)
    else:
        M = as_matrix(source)
        yv = np.asarray(getattr(y, "values", y), dtype=float)
        while True:
            yield M, yv


def altmin_phase(y, source, x0, cfg=None, truth=None):
    """Alternating minimization: phase estimation + least squares.

    Each iteration sets C_ii = phase(<a_i, x>) and solves
    min_x || C y - A x ||_2 by CG on the normal equations (relative
    residual 1e-10).  An underdetermined system (m < n) terminates as
    Degenerate rather than raising.
    """
    cfg = cfg or SolverConfig(max_iters=100)
    x0 = np.asarray(x0)
    if np.linalg.norm(x0) == 0:
        raise ValueError("x0 must be nonzero")
    run = _Run(x0, truth)
    data = _iteration_data(y, source, cfg)
    for _ in range(cfg.max_iters):
        M, yv = next(data)
        if M.shape[0] < M.shape[1]:
            return run.report(Termination.DEGENERATE)
        c = phase_of(M @ run.x)
        b = c * yv
        x_new, ok = cg_normal(lambda v: M @ v,
                              lambda r: M.conj().T @ r,
                              b, run.x, tol=1e-10,
                              max_iters=10 * M.shape[1])
        if not np.all(np.isfinite(x_new)):
            return run.report(Termination.DEGENERATE)
        if run.step(x_new, cfg.tol):
            return run.report(Termination.CONVERGED)
    return run.report(Termination.MAX_ITERS)


def wf_gradient(M, yv, x):
    """Gradient of (1/m) sum (y_i^2 - |<a_i,x>|^2)^2.

    Real field: the exact gradient (4/m) sum (|z_i|^2 - y_i^2) z_i a_i.
    Complex field: twice the conjugate (Wirtinger) gradient, i.e. the real
    gradient in (Re x, Im x) coordinates packed as a complex vector.
    """
    z = M @ x
    w = (np.abs(z) ** 2 - yv ** 2) * z
    return (4.0 / M.shape[0]) * (M.conj().T @ w)


def _truncation_mask(M, yv, x, cfg):
    z = np.abs(M @ x)
    keep = (z >= cfg.alpha_lb * np.linalg.norm(x))
    keep &= (yv <= cfg.alpha_ub * yv.mean())
    return keep


def truncated_gradient(M, yv, x, cfg):
    """Truncated gradient term used by twf.

    "poisson" mode is the likelihood gradient (1/m) sum 2(|z_i|^2 - y_i^2)
    / conj(z_i) a_i, which is degree-1 homogeneous in x so the step size
    needs no norm scaling.  "intensity" mode keeps wf's gradient, just with
    terms masked out.
    """
    keep = _truncation_mask(M, yv, x, cfg)
    z = M @ x
    if cfg.gradient == "intensity":
        w = np.where(keep, (np.abs(z) ** 2 - yv ** 2), 0.0) * z
        return (4.0 / M.shape[0]) * (M.conj().T @ w)
    if cfg.gradient != "poisson":
        raise ValueError(f"unknown gradient mode {cfg.gradient!r}")
    az = np.abs(z)
    safe = np.where(az > 0, z, 1.0)
    w = np.where(keep & (az > 0), 2.0 * (az ** 2 - yv ** 2), 0.0) / safe.conj()
    return (1.0 / M.shape[0]) * (M.conj().T @ w)


def _gd(y, A, x0, cfg, truth, truncated):
    x0 = np.asarray(x0)
    if np.linalg.norm(x0) == 0:
        raise ValueError("x0 must be nonzero")
    M = as_matrix(A)
    yv = np.asarray(getattr(y, "values", y), dtype=float)
    if truncated and cfg.gradient == "poisson":
        mu = cfg.step_size
    else:
        mu = cfg.step_size / (np.linalg.norm(x0) ** 2)
    run = _Run(x0, truth)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(cfg.max_iters):
            if truncated:
                g = truncated_gradient(M, yv, run.x, cfg)
            else:
                g = wf_gradient(M, yv, run.x)
            x_new = run.x - mu * g
            if not np.all(np.isfinite(x_new)):
                return run.report(Termination.DEGENERATE)
            if run.step(x_new, cfg.tol):
                return run.report(Termination.CONVERGED)
    return run.report(Termination.MAX_ITERS)


def wf(y, A, x0, cfg=None, truth=None):
    """Wirtinger Flow: gradient descent on the squared-intensity misfit.

    Step size is cfg.step_size / ||x0||^2 with the gradient of
    (1/m) sum (y_i^2 - |<a_i,x>|^2)^2.
    """
    return _gd(y, A, x0, cfg or SolverConfig(max_iters=2000, step_size=0.05),
               truth, truncated=False)


def twf(y, A, x0, cfg=None, truth=None):
    """Truncated Wirtinger Flow: gradient truncation per measurement.

    A measurement contributes only when |<a_i, x>| >= alpha_lb ||x|| and
    y_i <= alpha_ub * mean(y).  The default gradient is the Poisson
    likelihood form with a plain constant step; with
    gradient="intensity", alpha_lb = 0 and alpha_ub = inf this reproduces
    wf bit for bit under the same config.
    """
    return _gd(y, A, x0, cfg or SolverConfig(max_iters=500, step_size=0.25),
               truth, truncated=True)


def twf_step(M, yv, x, cfg):
    """One truncated gradient step (used by the projected low-rank solver)."""
    g = truncated_gradient(M, yv, x, cfg)
    if cfg.gradient == "poisson":
        return x - cfg.step_size * g
    return x - (cfg.step_size / max(np.linalg.norm(x) ** 2,
                                    np.finfo(float).tiny)) * g
