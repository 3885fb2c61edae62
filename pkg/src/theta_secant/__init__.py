"""Numerical verification of trisecant identities on Jacobian theta functions."""

__version__ = "0.1.0"

from .scaled import ScaledComplex, rel_diff
from .theta import (
    DEFAULT_RADIUS_CAP,
    Level2Vector,
    PeriodMatrix,
    ThetaCharacteristic,
    ThetaRequest,
    characteristic_by_index,
    gauss_exponent,
    half_period,
    half_periods,
    lattice_distance,
    lattice_reduce,
    level_two_vector,
    normalized_log_abs,
    theta,
    theta_fd_check,
    theta_hat_abs,
    theta_jet,
    truncation_radius,
)

__all__ = [
    "DEFAULT_RADIUS_CAP",
    "Level2Vector",
    "PeriodMatrix",
    "ScaledComplex",
    "ThetaCharacteristic",
    "ThetaRequest",
    "characteristic_by_index",
    "gauss_exponent",
    "half_period",
    "half_periods",
    "lattice_distance",
    "lattice_reduce",
    "level_two_vector",
    "normalized_log_abs",
    "rel_diff",
    "theta",
    "theta_fd_check",
    "theta_hat_abs",
    "theta_jet",
    "truncation_radius",
]
