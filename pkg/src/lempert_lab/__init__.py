"""Certified and numeric bounds for Lempert functions, Kobayashi-type metrics
and the Sibony metric on explicit model domains."""

__version__ = "0.1.0"

from .bounds import (CERTIFIED, LOWER, NUMERIC, NUMERIC_WEAK, UPPER, Bound, Chain,
                     Decomposition, DiscWitness, PathSpec, comparable, consistent)
from .discs import (FAMILIES, AnalyticDisc, ExplicitDisc, PolynomialDisc, paper_disc,
                    verify_containment)
from .domains import (Ball, CPoint, GMinus, GPlain, GPsi, GTilde, Modulus, PolyDisc, Punctured,
                      QuadraticForm, boundary_data, contains, normal_point, normalize_quadratic)
from .errors import (ArgumentError, CapabilityError, ComputationError, ConstructionError,
                     LabError, NumericError, RangeError)
from .lab import ExperimentConfig, SeriesFit, fit_exponent, qti_ratio_scan, run_experiment
from .lower import (localize_lower, mobius, projection_kr_lower, projection_lower,
                    sqrt_trick_kr_lower, sqrt_trick_lower)
from .sibony import CandidateFunction, LeviEvaluation, levi_form, sibony_candidate, sibony_lower
from .upper import (kobayashi_distance_upper, kobayashi_royden_upper, kr_decomposed_upper,
                    lempert_chain_upper, lempert_upper, optimize_polynomial_disc)

__all__ = [
    "CERTIFIED", "LOWER", "NUMERIC", "NUMERIC_WEAK", "UPPER", "Bound", "Chain", "Decomposition",
    "DiscWitness", "PathSpec", "comparable", "consistent", "FAMILIES", "AnalyticDisc",
    "ExplicitDisc", "PolynomialDisc", "paper_disc", "verify_containment", "Ball", "CPoint",
    "GMinus", "GPlain", "GPsi", "GTilde", "Modulus", "PolyDisc", "Punctured", "QuadraticForm",
    "boundary_data", "contains", "normal_point", "normalize_quadratic", "ArgumentError",
    "CapabilityError", "ComputationError", "ConstructionError", "LabError", "NumericError",
    "RangeError", "ExperimentConfig", "SeriesFit", "fit_exponent", "qti_ratio_scan",
    "run_experiment", "localize_lower", "mobius", "projection_kr_lower", "projection_lower",
    "sqrt_trick_kr_lower", "sqrt_trick_lower", "CandidateFunction", "LeviEvaluation",
    "levi_form", "sibony_candidate", "sibony_lower", "kobayashi_distance_upper",
    "kobayashi_royden_upper", "kr_decomposed_upper", "lempert_chain_upper", "lempert_upper",
    "optimize_polynomial_disc",
]
