"""Exact-velocity probability-flow simulation for Gaussian-mixture and Curie-Weiss targets."""

import json
import os

from . import _core
from ._core import (
    ConfigError,
    DomainError,
    Error,
    QualityError,
    SimulationError,
    SingularityError,
    UnreliableEstimateError,
    cw_fixed_point,
    eval_coeffs,
    eval_dilation,
    integrate_limit,
    limit_interval,
    predicted_orth_std,
    velocity,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "QualityError",
    "SimulationError",
    "SingularityError",
    "UnreliableEstimateError",
    "cw_fixed_point",
    "eval_coeffs",
    "eval_dilation",
    "integrate_limit",
    "limit_interval",
    "predicted_orth_std",
    "simulate",
    "validate",
    "velocity",
]


def simulate(config, overrides=None):
    """Run a configuration given as a dict, JSON text or path to a JSON file.

    Overrides map dotted keys ("run.d") to values. Returns a dict with record
    times "t", arrays "M", "mu", "sigma_perp2" of shape (n_traj, n_records)
    and the parsed feature "report".
    """
    if isinstance(config, dict):
        text = json.dumps(config)
    elif isinstance(config, (str, os.PathLike)) and os.path.isfile(config):
        with open(config, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = str(config)
    raw = {k: json.dumps(v) if not isinstance(v, str) else v for k, v in (overrides or {}).items()}
    out = _core.simulate(text, raw)
    out["report"] = json.loads(out["report"])
    return out


def validate(model, d, **kwargs):
    """Compare the closed-form velocity with the Monte Carlo oracle; returns the report dict."""
    return json.loads(_core.validate(model, d, **kwargs))
