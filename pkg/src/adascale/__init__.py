"""Affine feature scalers, penalised regression, classifiers and a seeded experiment harness."""
from .errors import (AdascaleError, ArgumentError, ConvergenceError, DataError, NumericalError,
                     TrainingError)
from .scaling import FittedScaler, Method, ScalerSpec, fit_scaler, select_gamma_cv, transform

__version__ = "0.1.0"

__all__ = [
    "AdascaleError", "ArgumentError", "ConvergenceError", "DataError", "NumericalError",
    "TrainingError", "FittedScaler", "Method", "ScalerSpec", "fit_scaler", "select_gamma_cv",
    "transform",
]
