"""Hausdorff-type operators: evaluation, mixed-norm bounds and empirical norm estimates."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .bounds import BoundResult, discrete_hausdorff_bound, exact_norm_compact_group, theoretical_bound
from .errors import (HausdorffError, ToleranceNotMet, NonFiniteSample, OutOfCarrier,
                     PreimageUnavailable, Divergent, NotFiniteDiscrete, SingularMatrix,
                     HypothesesViolated, NoConvergence, EmptyFamily, InadmissibleExponents,
                     ConfigInvalid)
from .estimator import (DivergenceReport, GaussianBump, GridVector, LowerBound, StepFunction,
                        TruncatedPower, divergence_probe, empirical_norm_continuous,
                        empirical_norm_matrix, empirical_norm_operator)
from .kernel import Exponents, Kernel, conjugacy_r, mixed_norm, one_var_norm
from .maps import (CustomMap, CyclicAutomorphism, MatrixDilation, ScalarDilation, agreement_factor,
                   apply_map, verify_agreement)
from .measure import MeasureSpace, QuadratureSpec, integrate, lp_norm
from .operator import OperatorInstance, SupportedFunction, apply, apply_grid, to_matrix

__all__ = [
    "__version__", "BACKEND", "BoundResult", "discrete_hausdorff_bound",
    "exact_norm_compact_group", "theoretical_bound", "DivergenceReport", "GaussianBump",
    "GridVector", "LowerBound", "StepFunction", "TruncatedPower", "divergence_probe",
    "empirical_norm_continuous", "empirical_norm_matrix", "empirical_norm_operator",
    "Exponents", "Kernel", "conjugacy_r", "mixed_norm", "one_var_norm", "CustomMap",
    "CyclicAutomorphism", "MatrixDilation", "ScalarDilation", "agreement_factor",
    "apply_map", "verify_agreement", "MeasureSpace", "QuadratureSpec", "integrate",
    "lp_norm", "OperatorInstance", "SupportedFunction", "apply", "apply_grid", "to_matrix",
    "HausdorffError", "ToleranceNotMet", "NonFiniteSample", "OutOfCarrier",
    "PreimageUnavailable", "Divergent", "NotFiniteDiscrete", "SingularMatrix",
    "HypothesesViolated", "NoConvergence", "EmptyFamily", "InadmissibleExponents",
    "ConfigInvalid"
]
