"""Gaussian sensing ensembles and the phaseless forward model.

Measurements are magnitudes of linear projections: given an m x n matrix A
whose i-th row is a_i' (conjugate transpose), the observation is
y = |A x| taken entry-wise.  Ensembles are addressed by (seed, stream_index)
through a counter-based generator, so independent sub-streams (for sample
splitting, per-column ensembles, parallel trials) can be regenerated
bit-identically without sequential draining.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtri


class ScalarField(Enum):
    REAL = "real"
    COMPLEX = "complex"

    @property
    def dtype(self):
        return np.float64 if self is ScalarField.REAL else np.complex128


def _uniform_block(seed, stream_index, shape):
    # Philox is counter-based: keying on (seed, stream) gives independent
    # sub-streams without jump-ahead bookkeeping.
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(stream_index & 0xFFFFFFFFFFFFFFFF)])
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.random(shape)


def _gaussian_block(seed, stream_index, shape, field):
    """Unit-variance Gaussian array via inverse-CDF of Philox uniforms.

    The inverse-CDF transform has no data-dependent rejection loop, so the
    draw count (and hence the output) is a pure function of the arguments.
    """
    if field is ScalarField.REAL:
        u = _uniform_block(seed, stream_index, shape)
        return ndtri(np.clip(u, 1e-300, None))
    u = _uniform_block(seed, stream_index, (2,) + tuple(shape))
    g = ndtri(np.clip(u, 1e-300, None))
    # N(0, 1/2) per component -> E|entry|^2 = 1 (circular complex Gaussian)
    return (g[0] + 1j * g[1]) * np.sqrt(0.5)


@dataclass(frozen=True)
class SensingEnsemble:
    """One m x n Gaussian measurement matrix, seed-addressed.

    ``entries`` holds A with rows a_i'; the matrix is immutable after
    construction.
    """

    field: ScalarField
    m: int
    n: int
    entries: np.ndarray
    seed: int
    stream_index: int

    def __post_init__(self):
        self.entries.flags.writeable = False

    @property
    def matrix(self):
        return self.entries


@dataclass(frozen=True)
class Observation:
    """Nonnegative magnitude vector paired with its ensemble identity."""

    values: np.ndarray
    seed: int
    stream_index: int

    def __post_init__(self):
        self.values.flags.writeable = False


@dataclass(frozen=True)
class ColumnwiseEnsemble:
    """Independent per-column ensembles A_k, k = 1..q, same (m, n, field)."""

    ensembles: tuple

    def __post_init__(self):
        streams = [(e.seed, e.stream_index) for e in self.ensembles]
        if len(set(streams)) != len(streams):
            raise ValueError("columns must not share a (seed, stream) pair")

    @property
    def q(self):
        return len(self.ensembles)

    @property
    def m(self):
        return self.ensembles[0].m

    @property
    def n(self):
        return self.ensembles[0].n

    @property
    def field(self):
        return self.ensembles[0].field

    def __getitem__(self, k):
        return self.ensembles[k]

    def __iter__(self):
        return iter(self.ensembles)


def sample_ensemble(n, m, field=ScalarField.REAL, seed=0, stream_index=0):
    """Draw an m x n i.i.d. unit-variance Gaussian sensing matrix.

    Deterministic in all arguments: the same (seed, stream_index, m, n,
    field) regenerates a bit-identical ensemble.
    """
    if m < 1 or n < 1:
        raise ValueError(f"dimensions must be >= 1, got m={m}, n={n}")
    entries = _gaussian_block(seed, stream_index, (m, n), field)
    return SensingEnsemble(field=field, m=m, n=n, entries=entries,
                           seed=seed, stream_index=stream_index)


def as_matrix(A):
    """Accept a SensingEnsemble or a plain 2-d array."""
    if isinstance(A, SensingEnsemble):
        return A.entries
    M = np.asarray(A)
    if M.ndim != 2:
        raise ValueError("sensing matrix must be 2-d")
    return M


def forward_phaseless(A, x):
    """Apply the magnitude-only forward model y = |A x|."""
    M = as_matrix(A)
    x = np.asarray(x)
    if x.shape != (M.shape[1],):
        raise ValueError(
            f"signal length {x.shape} does not match n={M.shape[1]}")
    values = np.abs(M @ x)
    if isinstance(A, SensingEnsemble):
        return Observation(values=values, seed=A.seed,
                           stream_index=A.stream_index)
    return Observation(values=values, seed=-1, stream_index=-1)


def sample_columnwise(n, m, q, field=ScalarField.REAL, seed=0,
                      base_stream=0):
    """q mutually independent ensembles on consecutive stream indices."""
    ens = tuple(sample_ensemble(n, m, field, seed, base_stream + k)
                for k in range(q))
    return ColumnwiseEnsemble(ensembles=ens)


def forward_columnwise(E, X):
    """Per-column phaseless measurements: column k is |A_k x_k|."""
    X = np.asarray(X)
    if X.ndim != 2 or X.shape != (E.n, E.q):
        raise ValueError(
            f"signal matrix shape {X.shape} does not match ({E.n}, {E.q})")
    Y = np.empty((E.m, E.q))
    for k, A_k in enumerate(E):
        Y[:, k] = np.abs(A_k.entries @ X[:, k])
    return Y


def ensemble_stream(seed, n, m, field=ScalarField.REAL, start=0):
    """Endless iterator of independent ensembles on stream indices start, start+1, ...

    Restarting the stream reproduces the same sequence.
    """
    t = start
    while True:
        yield sample_ensemble(n, m, field, seed, t)
        t += 1


class SampleStream:
    """Fresh (ensemble, observation) pairs for sample-splitting solvers.

    Wraps a ground-truth signal and an ensemble iterator; ``consumed``
    counts how many pairs have been handed out, so a harness can audit that
    iteration t used stream item t exactly once.
    """

    def __init__(self, x, ensembles):
        self._x = np.asarray(x)
        self._ensembles = iter(ensembles)
        self.consumed = 0

    def next_pair(self):
        A = next(self._ensembles)
        self.consumed += 1
        return A, forward_phaseless(A, self._x)


def split_stream(x, seed, m, field=ScalarField.REAL, start=0):
    """SampleStream over fresh seed-addressed ensembles of the given shape."""
    x = np.asarray(x)
    return SampleStream(x, ensemble_stream(seed, x.shape[0], m, field, start))
