"""Quantum limits and classical benchmarks for coherent-state amplifiers."""

from .closed_forms import (
    cft,
    classical_limit_params,
    det_gamma,
    f_det,
    f_prob,
    f_squeeze_opt,
    f_squeeze_r,
    filter_x,
    norm_a_closed,
    norm_gap,
    optimal_sigma_x,
    trace_power_closed,
)

__version__ = "0.1.0"
