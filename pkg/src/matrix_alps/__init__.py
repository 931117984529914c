"""Low-rank matrix recovery by hard thresholding with subspace pursuit and momentum."""

from .exceptions import (
    DegenerateError,
    InvalidInputError,
    InvalidRankError,
    SolverDiverged,
    StationaryPoint,
)
from .harness import (
    ExperimentReport,
    ProblemSpec,
    denoise_image,
    emit_table,
    generate_problem,
    run_monte_carlo,
    run_toy_example,
)
from .linalg import SubspaceBasis, best_rank_k, ortho_union, project_complement, project_subspace, svd
from .operators import IdentityOperator, MaskOperator, StructuredOperator, make_operator, rip_probe
from .projectors import ProjectorSpec, measured_epsilon, project
from .solvers import MomentumPolicy, RunReport, SolverConfig, solve

__all__ = [
    "DegenerateError", "InvalidInputError", "InvalidRankError", "SolverDiverged", "StationaryPoint",
    "ExperimentReport", "ProblemSpec", "denoise_image", "emit_table", "generate_problem",
    "run_monte_carlo", "run_toy_example",
    "SubspaceBasis", "best_rank_k", "ortho_union", "project_complement", "project_subspace", "svd",
    "IdentityOperator", "MaskOperator", "StructuredOperator", "make_operator", "rip_probe",
    "ProjectorSpec", "measured_epsilon", "project",
    "MomentumPolicy", "RunReport", "SolverConfig", "solve",
]
