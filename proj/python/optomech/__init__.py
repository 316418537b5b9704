"""Driven cavity coupled to a heavily damped mirror."""

import json as _json

from ._core import (
    ConfigError,
    DomainError,
    G2Report,
    ModelParams,
    SimulationError,
    SingularError,
    SpectrumReport,
    SteadyState,
    classify,
    covariance,
    diffusion_matrix,
    drift_matrix,
    effective_coupling,
    g2_reports,
    run_cli,
    simulate,
    steady_states,
)
from ._core import verify as _verify


def verify(params, run_mc=False):
    """Cross-check report as a dict."""
    return _json.loads(_verify(params, run_mc))


__all__ = [
    "ConfigError",
    "DomainError",
    "G2Report",
    "ModelParams",
    "SimulationError",
    "SingularError",
    "SpectrumReport",
    "SteadyState",
    "classify",
    "covariance",
    "diffusion_matrix",
    "drift_matrix",
    "effective_coupling",
    "g2_reports",
    "run_cli",
    "simulate",
    "steady_states",
    "verify",
]
