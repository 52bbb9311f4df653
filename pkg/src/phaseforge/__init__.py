"""Non-convex structured phase retrieval.

Solvers for recovering signals from magnitude-only Gaussian projections:
unstructured (AltMinPhase, WF, TWF), sparse (AltMinSparse, ThreshWF,
CoPRAM), and low-rank column-span (AltMinLowRaP, LRPR1), all built on
seed-addressed Gaussian ensembles and spectral initialization.
"""

from .errors import (DegenerateError, DegenerateInputError,
                     DegenerateSpectrumError, FileFormatError,
                     GenerationError)
from .measurement import (ColumnwiseEnsemble, Observation, SampleStream,
                          ScalarField, SensingEnsemble, ensemble_stream,
                          forward_columnwise, forward_phaseless,
                          sample_columnwise, sample_ensemble, split_stream)
from .metrics import matrix_phase_error, phase_invariant_dist, \
    subspace_distance
from .spectral import (MEAN_TRUNCATION, NO_TRUNCATION, SpectralMatrix,
                       TruncationMode, TruncationRule, build_y0, build_yu,
                       lowrank_spectral_init, norm_from_observation,
                       sparse_spectral_init, sparse_support_init,
                       spectral_estimate)
from .unstructured import (SolverConfig, SolverReport, Termination,
                           altmin_phase, phase_of, twf, wf, wf_gradient)
from .sparse import (SparseEstimate, altmin_sparse, copram, cosamp,
                     hard_threshold, thresh_wf)
from .lowrank import (LowRankEstimate, LrprInstance, LrprSampleStream,
                      altmin_lowrap, generate_lrpr_instance,
                      lrpr1_projected_gd, project_rank_r, right_incoherence)
from .fileio import read_array, read_csv, write_array, write_csv

__version__ = "0.1.0"

__all__ = [
    "ScalarField", "SensingEnsemble", "ColumnwiseEnsemble", "Observation",
    "SampleStream", "sample_ensemble", "sample_columnwise",
    "forward_phaseless", "forward_columnwise", "ensemble_stream",
    "split_stream",
    "phase_invariant_dist", "matrix_phase_error", "subspace_distance",
    "TruncationRule", "TruncationMode", "NO_TRUNCATION", "MEAN_TRUNCATION",
    "SpectralMatrix", "build_y0", "build_yu", "spectral_estimate",
    "sparse_support_init", "sparse_spectral_init", "lowrank_spectral_init",
    "norm_from_observation",
    "SolverConfig", "SolverReport", "Termination", "phase_of",
    "altmin_phase", "wf", "twf", "wf_gradient",
    "SparseEstimate", "hard_threshold", "cosamp", "altmin_sparse",
    "thresh_wf", "copram",
    "LowRankEstimate", "LrprInstance", "LrprSampleStream", "project_rank_r",
    "generate_lrpr_instance", "right_incoherence", "altmin_lowrap",
    "lrpr1_projected_gd",
    "read_array", "read_csv", "write_array", "write_csv",
    "DegenerateError", "DegenerateInputError", "DegenerateSpectrumError",
    "GenerationError", "FileFormatError",
]
