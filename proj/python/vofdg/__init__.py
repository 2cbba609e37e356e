"""Python access to the vofdg solver core."""

from ._vofdg import (
    ConfigError,
    DiagnosticFailure,
    InvalidArgument,
    NumericalFailure,
    gamma,
    gauss_rule,
    observed_order,
    solve,
    sweep,
    weights,
)

__all__ = [
    "ConfigError",
    "DiagnosticFailure",
    "InvalidArgument",
    "NumericalFailure",
    "gamma",
    "gauss_rule",
    "observed_order",
    "solve",
    "sweep",
    "weights",
]
