"""Experiment harness: instance generation, solver dispatch, phase-transition
sweeps, convergence traces, CSV emission.

Per-trial seeds are derived by mixing (base seed, m, trial index) through a
64-bit finalizer, so any cell can be reproduced in isolation.  CSV output is
a pure function of the configuration: timing columns are emitted as 0 unless
``timing`` is enabled, because wall-clock values would break the bit-identity
contract of repeated runs.
"""

import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import DegenerateError
from .lowrank import altmin_lowrap, generate_lrpr_instance, lrpr1_projected_gd
from .measurement import (ScalarField, forward_phaseless, sample_ensemble)
from .metrics import matrix_phase_error, phase_invariant_dist
from .sparse import altmin_sparse, copram, thresh_wf
from .spectral import (MEAN_TRUNCATION, TruncationMode, TruncationRule,
                       build_y0, norm_from_observation, spectral_estimate)
from .unstructured import SolverConfig, altmin_phase, twf, wf

PROBLEMS = ("unstructured", "sparse", "lowrank")
SOLVERS = {
    "unstructured": ("altminphase", "wf", "twf"),
    "sparse": ("altminsparse", "threshwf", "copram"),
    "lowrank": ("altminlowrap", "lrpr1"),
}

PT_HEADER = ("problem,solver,n,q,r,s,m,trials,successes,"
             "mean_err,median_err,mean_iters,mean_ms")
TRACE_HEADER = "iter,err,ms"


def splitmix64(z):
    """64-bit finalizer; decorrelates nearby inputs."""
    z = (z + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def trial_seed(base_seed, m, trial):
    return base_seed ^ splitmix64((m << 20) ^ trial)


@dataclass
class ExperimentConfig:
    problem: str = "unstructured"
    solver: str = "twf"
    n: int = 32
    q: int = 1
    r: int = 1
    s: int = 1
    m_grid: tuple = (64,)
    trials: int = 10
    seed: int = 0
    threshold: float = 1e-4
    field: ScalarField = ScalarField.REAL
    condition: float = 2.0
    timing: bool = False
    threads: int = 1
    solver_overrides: dict = dc_field(default_factory=dict)
    out: str = None

    def validate(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.solver not in SOLVERS[self.problem]:
            raise ValueError(
                f"unknown solver {self.solver!r} for problem "
                f"{self.problem!r} (choices: {SOLVERS[self.problem]})")
        if not self.m_grid:
            raise ValueError("m grid must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must be in (0, 1)")


@dataclass
class CellResult:
    m: int
    n: int
    q: int
    r: int
    s: int
    successes: int
    trials: int
    mean_err: float
    median_err: float
    mean_iters: float
    mean_ms: float


def _solver_config(cfg, defaults):
    sc = SolverConfig(**defaults)
    for key, value in cfg.solver_overrides.items():
        if key == "c_trunc":
            sc.truncation = TruncationRule(TruncationMode.MEAN_MULTIPLE,
                                           float(value))
            continue
        if not hasattr(sc, key):
            raise ValueError(f"unknown solver option {key!r}")
        cast = type(getattr(sc, key))
        setattr(sc, key, cast(value))
    return sc


_SOLVER_DEFAULTS = {
    "altminphase": dict(max_iters=100, tol=1e-10),
    "wf": dict(max_iters=2000, tol=1e-10, step_size=0.05),
    "twf": dict(max_iters=500, tol=1e-10, step_size=0.25),
    "altminsparse": dict(max_iters=100, tol=1e-10),
    "threshwf": dict(max_iters=500, tol=1e-10, step_size=0.25),
    "copram": dict(max_iters=100, tol=1e-10),
    "altminlowrap": dict(max_iters=25, tol=1e-9, step_size=0.25),
    "lrpr1": dict(max_iters=300, tol=1e-9, step_size=0.25),
}


def _gaussian_vector(seed, n, field, sparsity=None):
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(0x5149474E41)])  # signal sub-stream
    rng = np.random.Generator(np.random.Philox(key=key))
    x = rng.standard_normal(n)
    if field is ScalarField.COMPLEX:
        x = (x + 1j * rng.standard_normal(n)) * np.sqrt(0.5)
    if sparsity is not None:
        support = rng.choice(n, size=sparsity, replace=False)
        dense = x
        x = np.zeros(n, dtype=dense.dtype)
        x[support] = dense[support]
    return x


def spectral_start(A, y):
    """Truncated spectral initialization used by the unstructured solvers."""
    Y = build_y0(A, y, MEAN_TRUNCATION)
    return spectral_estimate(Y, norm_from_observation(y))


def run_single(cfg, m, trial):
    """One seeded trial; returns (relative error, iterations, wall seconds)."""
    seed = trial_seed(cfg.seed, m, trial)
    sc = _solver_config(cfg, _SOLVER_DEFAULTS[cfg.solver])
    t0 = time.perf_counter()
    if cfg.problem == "unstructured":
        x_true = _gaussian_vector(seed, cfg.n, cfg.field)
        A = sample_ensemble(cfg.n, m, cfg.field, seed, 0)
        y = forward_phaseless(A, x_true)
        x0 = spectral_start(A, y)
        fn = {"altminphase": altmin_phase, "wf": wf, "twf": twf}[cfg.solver]
        report = fn(y, A, x0, sc, truth=x_true)
        err = (phase_invariant_dist(report.estimate, x_true)
               / np.linalg.norm(x_true))
    elif cfg.problem == "sparse":
        x_true = _gaussian_vector(seed, cfg.n, cfg.field, sparsity=cfg.s)
        A = sample_ensemble(cfg.n, m, cfg.field, seed, 0)
        y = forward_phaseless(A, x_true)
        fn = {"altminsparse": altmin_sparse, "threshwf": thresh_wf,
              "copram": copram}[cfg.solver]
        report = fn(y, A, cfg.s, sc, truth=x_true)
        err = (phase_invariant_dist(report.estimate, x_true)
               / np.linalg.norm(x_true))
    else:
        X_true, inst = generate_lrpr_instance(
            cfg.n, cfg.q, cfg.r, m, condition=cfg.condition, seed=seed,
            field=cfg.field, incoherence_bound=None)
        if cfg.solver == "altminlowrap":
            _, report = altmin_lowrap(inst, sc, truth=X_true)
            Xhat = report.estimate
        else:
            Xhat, report = lrpr1_projected_gd(inst, sc, truth=X_true)
        err = matrix_phase_error(Xhat, X_true)
    elapsed = time.perf_counter() - t0
    return float(err), report.iterations, elapsed, report


def run_phase_transition(cfg):
    """Sweep the m grid; one CellResult per grid point."""
    cfg.validate()

    def one(args):
        m, trial = args
        try:
            err, iters, secs, _ = run_single(cfg, m, trial)
        except DegenerateError:
            err, iters, secs = np.inf, 0, 0.0
        return err, iters, secs

    results = []
    for m in cfg.m_grid:
        jobs = [(m, t) for t in range(cfg.trials)]
        if cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                outs = list(pool.map(one, jobs))
        else:
            outs = [one(j) for j in jobs]
        errs = np.array([o[0] for o in outs])
        iters = np.array([o[1] for o in outs])
        msecs = np.array([o[2] for o in outs]) * 1e3
        finite = errs[np.isfinite(errs)]
        results.append(CellResult(
            m=m, n=cfg.n, q=cfg.q, r=cfg.r, s=cfg.s,
            successes=int(np.sum(errs < cfg.threshold)),
            trials=cfg.trials,
            mean_err=float(finite.mean()) if finite.size else float("inf"),
            median_err=float(np.median(finite)) if finite.size
            else float("inf"),
            mean_iters=float(iters.mean()),
            mean_ms=float(msecs.mean()) if cfg.timing else 0.0,
        ))
    return results


def phase_transition_csv(cfg, results=None):
    """CSV text for a sweep; bit-identical across repeated runs."""
    if results is None:
        results = run_phase_transition(cfg)
    buf = io.StringIO()
    buf.write(PT_HEADER + "\n")
    for c in results:
        buf.write(",".join([
            cfg.problem, cfg.solver, str(c.n), str(c.q), str(c.r), str(c.s),
            str(c.m), str(c.trials), str(c.successes),
            f"{c.mean_err:.12g}", f"{c.median_err:.12g}",
            f"{c.mean_iters:.12g}", f"{c.mean_ms:.12g}",
        ]) + "\n")
    return buf.getvalue()


def run_trace(cfg, m=None, trial=0):
    """Per-iteration trace rows for a single (m, trial) cell.

    The error column reproduces the solver report trace exactly; the ms
    column is cumulative wall time scaled to the trace (real timing, not
    covered by the determinism contract).
    """
    cfg.validate()
    if m is None:
        m = cfg.m_grid[0]
    err, iters, secs, report = run_single(cfg, m, trial)
    times = report.times or [report.wall_time * i / max(len(report.trace) - 1, 1)
                             for i in range(len(report.trace))]
    rows = [(i, float(e), times[i] * 1e3)
            for i, e in enumerate(report.trace)]
    return rows, report


def solve_file(y_path, out_path, solver, n, seed=0, s=None,
               field=ScalarField.REAL, truth_path=None, overrides=None):
    """Solve a phaseless problem read from disk and write the estimate.

    Observations come from ``y_path`` (CSV or PFG1); the ensemble is
    regenerated from (seed, stream 0) at the observed m and the given n.
    Returns the final relative error when a ground-truth file is supplied,
    else None.
    """
    from . import fileio

    y = np.ravel(fileio.read_array(y_path)).real
    m = y.shape[0]
    A = sample_ensemble(n, m, field, seed, 0)
    cfg = ExperimentConfig(
        problem="sparse" if s is not None else "unstructured",
        solver=solver, n=n, s=s or 1, field=field,
        solver_overrides=overrides or {})
    cfg.validate()
    sc = _solver_config(cfg, _SOLVER_DEFAULTS[solver])
    if s is not None:
        fn = {"altminsparse": altmin_sparse, "threshwf": thresh_wf,
              "copram": copram}[solver]
        report = fn(y, A, s, sc)
    else:
        x0 = spectral_start(A, y)
        fn = {"altminphase": altmin_phase, "wf": wf, "twf": twf}[solver]
        report = fn(y, A, x0, sc)
    from .unstructured import Termination
    if report.termination is Termination.DEGENERATE:
        raise DegenerateError("solver terminated in a degenerate state")
    fileio.write_array(out_path, report.estimate, field)
    if truth_path is not None:
        x_true = np.ravel(fileio.read_array(truth_path))
        return (phase_invariant_dist(report.estimate, x_true)
                / np.linalg.norm(x_true))
    return None


def trace_csv(cfg, m=None, trial=0):
    rows, _ = run_trace(cfg, m, trial)
    buf = io.StringIO()
    buf.write(TRACE_HEADER + "\n")
    for i, e, ms in rows:
        buf.write(f"{i},{e:.12g},{ms:.6g}\n")
    return buf.getvalue()
