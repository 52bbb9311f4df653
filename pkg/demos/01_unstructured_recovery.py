"""
Recovering a signal from magnitude-only measurements
====================================================

A walk through the unstructured pipeline: draw a Gaussian sensing ensemble,
observe y = |A x|, build the truncated spectral initializer, and refine it
with each of the three solvers.  Every stage is deterministic given the
seed, so the printed numbers reproduce exactly.
"""

import numpy as np

from phaseforge import (MEAN_TRUNCATION, ScalarField, SolverConfig,
                        altmin_phase, build_y0, forward_phaseless,
                        norm_from_observation, phase_invariant_dist,
                        sample_ensemble, spectral_estimate, twf, wf)

n, m, seed = 64, 8 * 64, 42

# the unknown signal and the phaseless observations
rng = np.random.Generator(np.random.Philox(key=seed))
x = rng.standard_normal(n)
A = sample_ensemble(n, m, ScalarField.REAL, seed, 0)
y = forward_phaseless(A, x)
print(f"n = {n}, m = {m}: observing y = |A x|, phases discarded")

# spectral initialization: the top eigenvector of (1/m) sum y_i^2 a_i a_i'
# is correlated with x; truncating large y_i^2 tightens the concentration
Y = build_y0(A, y, MEAN_TRUNCATION)
x0 = spectral_estimate(Y, norm_from_observation(y))
d0 = phase_invariant_dist(x0, x) / np.linalg.norm(x)
print(f"spectral start: relative error {d0:.3f}")

# refine with each solver; the distance is measured modulo a global sign
for name, solver, cfg in [
        ("AltMinPhase", altmin_phase, SolverConfig(max_iters=100)),
        ("WF", wf, SolverConfig(max_iters=2000, step_size=0.05)),
        ("TWF", twf, SolverConfig(max_iters=500, step_size=0.25))]:
    rep = solver(y, A, x0, cfg, truth=x)
    rel = rep.trace[-1] / np.linalg.norm(x)
    print(f"{name:12s} {rep.iterations:4d} iterations, "
          f"relative error {rel:.2e} ({rep.termination.name})")

# the trace shows geometric (straight-line-on-log-scale) convergence
rep = twf(y, A, x0, SolverConfig(max_iters=500, step_size=0.25), truth=x)
print("\nTWF error by iteration (every 5th):")
for i in range(0, min(len(rep.trace), 41), 5):
    print(f"  iter {i:3d}: {rep.trace[i] / np.linalg.norm(x):.3e}")
