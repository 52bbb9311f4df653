"""
Phase-transition curves from the benchmark harness
==================================================

Success probability as a function of the number of measurements m shows the
sharp transition typical of non-convex recovery.  The harness derives every
trial's seed from (base seed, m, trial index), so the CSV is a pure function
of the configuration; the same sweep is available on the command line as

    phaseforge phase-transition --problem unstructured --solver twf \
        --n 48 --m 24 --m 48 --m 96 --m 192 --m 384 --trials 10 --seed 0
"""

from phaseforge.bench import ExperimentConfig, phase_transition_csv

n = 48
cfg = ExperimentConfig(problem="unstructured", solver="twf", n=n,
                       m_grid=(n // 2, n, 2 * n, 4 * n, 8 * n),
                       trials=10, seed=0, threshold=1e-4)
text = phase_transition_csv(cfg)
print(text)

rows = [r.split(",") for r in text.strip().split("\n")[1:]]
print("success probability vs m/n:")
for cells in rows:
    m, trials, succ = int(cells[6]), int(cells[7]), int(cells[8])
    bar = "#" * succ + "." * (trials - succ)
    print(f"  m/n = {m / n:4.1f}  [{bar}]  {succ}/{trials}")
