"""Numerical laboratory for the nested matrix-tensor model.

A rank-one signal tensor whose matrix factor is itself a spiked random
matrix: generators for the model and its multi-view clustering
instance, best rank-one approximation by power iteration, the coupled
Stieltjes fixed point with the limiting spectral density, support
detection and asymptotic summary statistics, block contraction matrices
with their spike structure, and clustering experiments with Gaussianity
diagnostics. See the README for the theory conventions and the CLI.
"""
from ._kernels import BACKEND
from ._version import __version__
from .blocks import (BlockMatrix, EmpiricalSpectrum, build_h, build_l,
                     build_phi, eig_spectrum, group_outliers,
                     kolmogorov_distance, split_outliers)
from .clustering import (ClusteringResult, GaussianityReport, TheoryAccuracy,
                         cluster_tensor, cluster_unfold, gaussianity_check,
                         theory_accuracy)
from .errors import (BranchConsistencyError, ConvergenceError,
                     DegenerateInputError, DimensionMismatchError,
                     RootSearchError, SupportDetectionError, TensorRmtError,
                     ValidationError, WrongBranchError)
from .experiments import ExperimentConfig, RunResult, run
from .models import (MultiViewParams, MultiViewSample, NestedParams,
                     NestedSample, Vec3Signals, gen_multiview, gen_nested)
from .rank_one import (EmpiricalStats, RankOneFit, empirical_stats,
                       power_iteration)
from .tensor import (Tensor3, contract1, contract2, contract2v, contract3,
                     contract3s, frobenius_norm, outer3, unfold)
from .theory import (LimitParams, SpectrumCurve, StieltjesSolution,
                     SummaryStats, compute_summary_stats, density,
                     solve_stieltjes, support_edges)

__all__ = [
    "__version__",
    "BACKEND",
    # tensors
    "Tensor3", "outer3", "contract1", "contract2", "contract3",
    "contract2v", "contract3s", "frobenius_norm", "unfold",
    # models
    "NestedParams", "NestedSample", "Vec3Signals", "gen_nested",
    "MultiViewParams", "MultiViewSample", "gen_multiview",
    # rank-one approximation
    "RankOneFit", "EmpiricalStats", "power_iteration", "empirical_stats",
    # limit theory
    "LimitParams", "StieltjesSolution", "SpectrumCurve", "SummaryStats",
    "solve_stieltjes", "density", "support_edges", "compute_summary_stats",
    # block matrices
    "BlockMatrix", "EmpiricalSpectrum", "build_phi", "build_h", "build_l",
    "eig_spectrum", "split_outliers", "group_outliers",
    "kolmogorov_distance",
    # clustering
    "ClusteringResult", "TheoryAccuracy", "GaussianityReport",
    "cluster_tensor", "cluster_unfold", "theory_accuracy",
    "gaussianity_check",
    # experiments
    "ExperimentConfig", "RunResult", "run",
    # errors
    "TensorRmtError", "DimensionMismatchError", "ValidationError",
    "DegenerateInputError", "ConvergenceError", "WrongBranchError",
    "BranchConsistencyError", "RootSearchError", "SupportDetectionError",
]
