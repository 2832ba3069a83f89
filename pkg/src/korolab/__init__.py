"""Worst-case errors, information complexity and tractability for analytic Korobov spaces."""

from .approx import (
    RateFit,
    fit_rate,
    grid_app_error,
    info_complexity_all,
    minimal_error_all,
    synth_function,
)
from .kernel import kernel
from .quadrature import CubatureRule, GridRule, lower_bound_certificate, wce, wce_grid
from .spectrum import SpaceParams, count_leq, enumerate_smallest, trace_tau
from .tractability import classify, rate_targets
from .weights import WeightModel, asymptotics

__all__ = [
    "CubatureRule",
    "GridRule",
    "RateFit",
    "SpaceParams",
    "WeightModel",
    "asymptotics",
    "classify",
    "count_leq",
    "enumerate_smallest",
    "fit_rate",
    "grid_app_error",
    "info_complexity_all",
    "kernel",
    "lower_bound_certificate",
    "minimal_error_all",
    "rate_targets",
    "synth_function",
    "trace_tau",
    "wce",
    "wce_grid",
]
