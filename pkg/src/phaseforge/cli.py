"""Command-line interface.

Subcommands: ``phase-transition`` (success-vs-m sweep to CSV), ``trace``
(per-iteration convergence CSV), ``solve`` (file-in, file-out single
problem), ``gen`` (signal / observation generation to files).

Exit codes: 0 success, 2 usage, 3 configuration, 4 runtime-degenerate.
The thread count falls back to the PHASEFORGE_THREADS environment variable
when --threads is not given.
"""

import argparse
import os
import sys

try:
    import tomllib
except ImportError:                       # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import bench, fileio
from .errors import DegenerateError, FileFormatError, GenerationError
from .measurement import ScalarField, forward_phaseless, sample_ensemble

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _field(name):
    return ScalarField.COMPLEX if name == "complex" else ScalarField.REAL


def _parse_sets(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise _UsageError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key] = value
    return out


def _load_config(args):
    cfg = bench.ExperimentConfig()
    if args.config:
        with open(args.config, "rb") as fh:
            data = tomllib.load(fh)
        for key in ("problem", "solver", "n", "q", "r", "s", "trials",
                    "seed", "threshold", "condition", "timing", "out"):
            if key in data:
                setattr(cfg, key, data[key])
        if "field" in data:
            cfg.field = _field(data["field"])
        if "m_grid" in data:
            cfg.m_grid = tuple(int(v) for v in data["m_grid"])
        elif "m_multiples" in data:
            cfg.m_grid = tuple(int(round(v * cfg.n))
                               for v in data["m_multiples"])
        cfg.solver_overrides.update(data.get("solver_config", {}))
    for key in ("problem", "solver", "n", "q", "r", "s", "trials",
                "threshold"):
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "m", None):
        cfg.m_grid = tuple(args.m)
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None):
        cfg.out = args.out
    cfg.threads = _threads(args)
    cfg.solver_overrides.update(_parse_sets(getattr(args, "set", None)))
    return cfg


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("PHASEFORGE_THREADS")
    return int(env) if env else 1


def _write_out(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_phase_transition(args):
    cfg = _load_config(args)
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _write_out(bench.phase_transition_csv(cfg), cfg.out)
    return EXIT_OK


def _cmd_trace(args):
    cfg = _load_config(args)
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    m = cfg.m_grid[0]
    try:
        text = bench.trace_csv(cfg, m=m, trial=args.trial)
    except DegenerateError as exc:
        print(f"degenerate run: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _write_out(text, cfg.out)
    return EXIT_OK


def _cmd_solve(args):
    overrides = _parse_sets(args.set)
    try:
        err = bench.solve_file(
            args.y, args.out, args.solver, args.n, seed=args.seed or 0,
            s=args.s, field=_field(args.field), truth_path=args.truth,
            overrides=overrides)
    except FileFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateError as exc:
        print(f"degenerate run: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if err is not None:
        print(f"final relative error: {err:.6g}")
    return EXIT_OK


def _cmd_gen(args):
    field = _field(args.field)
    seed = args.seed or 0
    if args.kind == "signal":
        x = bench._gaussian_vector(seed, args.n, field,
                                   sparsity=args.s)
        fileio.write_array(args.out, x, field)
    elif args.kind == "observations":
        try:
            x = np.ravel(fileio.read_array(args.signal))
        except FileFormatError as exc:
            print(f"parse error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        A = sample_ensemble(x.shape[0], args.m, field, seed, 0)
        y = forward_phaseless(A, x)
        fileio.write_array(args.out, y.values, ScalarField.REAL)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="phaseforge",
                description="structured phase retrieval benchmark harness")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_grid=True):
        sp.add_argument("--config", help="TOML experiment configuration")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="solver config override")
        sp.add_argument("--problem", choices=bench.PROBLEMS)
        sp.add_argument("--solver")
        sp.add_argument("--n", type=int)
        sp.add_argument("--q", type=int)
        sp.add_argument("--r", type=int)
        sp.add_argument("--s", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--threshold", type=float)
        if with_grid:
            sp.add_argument("--m", type=int, action="append",
                            help="measurement count (repeatable)")

    pt = sub.add_parser("phase-transition",
                        help="success-probability sweep over m")
    common(pt)
    pt.set_defaults(func=_cmd_phase_transition)

    tr = sub.add_parser("trace", help="per-iteration convergence trace")
    common(tr)
    tr.add_argument("--trial", type=int, default=0)
    tr.set_defaults(func=_cmd_trace)

    sv = sub.add_parser("solve", help="solve a problem stored in files")
    sv.add_argument("--y", required=True, help="observations file")
    sv.add_argument("--out", required=True, help="estimate output file")
    sv.add_argument("--solver", required=True,
                    choices=[s for group in bench.SOLVERS.values()
                             for s in group])
    sv.add_argument("--n", type=int, required=True)
    sv.add_argument("--s", type=int, help="sparsity (selects sparse solvers)")
    sv.add_argument("--seed", type=int)
    sv.add_argument("--field", choices=["real", "complex"], default="real")
    sv.add_argument("--truth", help="ground-truth signal file")
    sv.add_argument("--set", action="append", metavar="KEY=VALUE")
    sv.set_defaults(func=_cmd_solve)

    gn = sub.add_parser("gen", help="generate signals / observations")
    gn.add_argument("--kind", choices=["signal", "observations"],
                    required=True)
    gn.add_argument("--out", required=True)
    gn.add_argument("--n", type=int)
    gn.add_argument("--m", type=int)
    gn.add_argument("--s", type=int)
    gn.add_argument("--seed", type=int)
    gn.add_argument("--signal", help="input signal file (observations mode)")
    gn.add_argument("--field", choices=["real", "complex"], default="real")
    gn.set_defaults(func=_cmd_gen)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except GenerationError as exc:
        print(f"generation error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
