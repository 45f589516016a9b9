"""Determinacy of symmetric moment problems from their Jacobi sequences."""
from .errors import (ComputeError, InvalidInput, MismatchBeyondTolerance, MomentDetError,
                     NonPositiveOmega, NotIndeterminateWarning, NotPositiveDefinite)
from .jacobi import JacobiSequence, MomentSequence, jacobi_from_moments, moments_from_jacobi
from .recurrence import gap_estimate, run_trace, stieltjes_at_i
from .sc import ScReport, Verdict, check_carleman, check_condition_star, decide_sc, deficiency_norm
from .spectral import (DiscreteMeasure, TridiagonalTruncation, column_convergence_trace,
                       extremal_measure_pair, quadrature_measure)

__version__ = "0.1.0"

__all__ = [
    "ComputeError", "InvalidInput", "MismatchBeyondTolerance", "MomentDetError",
    "NonPositiveOmega", "NotIndeterminateWarning", "NotPositiveDefinite",
    "JacobiSequence", "MomentSequence", "jacobi_from_moments", "moments_from_jacobi",
    "gap_estimate", "run_trace", "stieltjes_at_i",
    "ScReport", "Verdict", "check_carleman", "check_condition_star", "decide_sc",
    "deficiency_norm", "DiscreteMeasure", "TridiagonalTruncation",
    "column_convergence_trace", "extremal_measure_pair", "quadrature_measure",
]
