"""Consensus component analysis of multiblock data.

One monotone solver covers a family of multiblock component methods:
consensus PCA, hierarchical PCA, generalized canonical correlation
analysis, SUMCOR/MAXVAR and generalized redundancy analysis all arise from
the same criterion by choosing the exponent m and per-block shrinkage
constants. Higher-order orthogonal components come from deflation.
"""

__version__ = "0.1.0"

from . import errors
from .dataset import (
    Block,
    BlockSet,
    build_blockset,
    from_matrix,
    load_block,
    sample_cov,
)
from .deflation import DeflationStrategy, MultiSolution, deflate, extract
from .methods import (
    RELATED_FIXED_POINT_METHODS,
    MethodPreset,
    ModeGuidance,
    StationaryCheck,
    guide,
    preset,
    preset_names,
    verify_stationary,
)
from .metrics import (
    ModeSelector,
    Projector,
    ShrinkageMetric,
    build_metric,
    build_metrics,
    inv_sqrt_apply,
    mode_tau,
    projection_operator,
)
from .solver import (
    GradientOracle,
    Solution,
    SolverConfig,
    SolverTrace,
    TransformedProblem,
    auxiliary_solve,
    contributions,
    covariance_criterion,
    criterion,
    fixed_point_residual_original,
    gradient,
    gram_matrix,
    init_v,
    iterate,
    solve,
    solve_matrices,
    sphere_maximize,
    stationary_residual,
    superblock_from_block_components,
    transform,
)

__all__ = [
    "__version__",
    "errors",
    "Block",
    "BlockSet",
    "build_blockset",
    "from_matrix",
    "load_block",
    "sample_cov",
    "ModeSelector",
    "Projector",
    "ShrinkageMetric",
    "build_metric",
    "build_metrics",
    "inv_sqrt_apply",
    "mode_tau",
    "projection_operator",
    "GradientOracle",
    "Solution",
    "SolverConfig",
    "SolverTrace",
    "TransformedProblem",
    "auxiliary_solve",
    "contributions",
    "covariance_criterion",
    "criterion",
    "fixed_point_residual_original",
    "gradient",
    "gram_matrix",
    "init_v",
    "iterate",
    "solve",
    "solve_matrices",
    "sphere_maximize",
    "stationary_residual",
    "superblock_from_block_components",
    "transform",
    "MethodPreset",
    "ModeGuidance",
    "StationaryCheck",
    "RELATED_FIXED_POINT_METHODS",
    "guide",
    "preset",
    "preset_names",
    "verify_stationary",
    "DeflationStrategy",
    "MultiSolution",
    "deflate",
    "extract",
]
