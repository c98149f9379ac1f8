"""balkit: balanced truncation, singular perturbation approximation, and their
realization-free quadrature-based counterparts for asymptotically stable LTI
systems."""

from .errors import (BalkitError, ConvergenceError, DimensionError, FormatError,
                     RankError, SigmaTieError, SingularMatrixError, StabilityError)
from .gramian import (GramianFactors, ProjectionData, hankel_projection, lyap_dense,
                      lyap_factor_dense, lyap_factor_lowrank, lowrank_residual,
                      lyap_residual, penzl_shifts)
from .iofmt import (load_rom, load_samples, load_system, save_rom, save_samples,
                    save_system)
from .metrics import bt_bound, freq_response, hinf_grid, poles
from .quadrature import (QuadDataMatrices, QuadratureRule, log_nodes,
                         make_trapezoid_rule, quadbt, quadbt_matrices, quadspa,
                         quadspa_matrices, realified_matrices, realify, trapezoid_rule)
from .reduce import bt, order_from_tolerance, spa, spa_direct
from .samples import (DERIVATIVE, RAW_H, STRICTLY_PROPER, ZERO_SHIFTED, SampleSet,
                      estimate_feedthrough, sample_tf, sample_tf_derivative,
                      to_strictly_proper, to_zero_shifted)
from .system import (ReducedModel, StateSpace, dc_moment, error_system, eval_tf,
                     heat_1d, is_stable, random_stable, reciprocal,
                     strictly_proper_split, tf_evaluator)

__version__ = "0.1.0"

__all__ = [
    "BalkitError", "ConvergenceError", "DimensionError", "FormatError", "RankError",
    "SigmaTieError", "SingularMatrixError", "StabilityError",
    "StateSpace", "ReducedModel", "GramianFactors", "ProjectionData",
    "QuadratureRule", "QuadDataMatrices", "SampleSet",
    "RAW_H", "STRICTLY_PROPER", "ZERO_SHIFTED", "DERIVATIVE",
    "eval_tf", "tf_evaluator", "reciprocal", "strictly_proper_split", "dc_moment",
    "is_stable", "random_stable", "heat_1d", "error_system",
    "lyap_dense", "lyap_residual", "lyap_factor_dense", "lyap_factor_lowrank",
    "lowrank_residual", "penzl_shifts", "hankel_projection",
    "bt", "spa", "spa_direct", "order_from_tolerance",
    "log_nodes", "trapezoid_rule", "make_trapezoid_rule",
    "quadbt_matrices", "quadspa_matrices", "quadbt", "quadspa", "realify",
    "realified_matrices",
    "sample_tf", "sample_tf_derivative", "estimate_feedthrough",
    "to_strictly_proper", "to_zero_shifted",
    "freq_response", "hinf_grid", "bt_bound", "poles",
    "load_system", "save_system", "save_rom", "load_rom", "save_samples", "load_samples",
    "__version__",
]
