"""Dissipative-structure classification and logarithmic L2-decay verification
for cubic derivative NLS equations."""

import json as _json

from dnlsdecay._core import (
    NumericalError,
    ValidationError,
    closed_form_modulus_sq,
    integral_i_theta,
    is_weakly_gauge_invariant,
    matsumura_c2,
    nu_coeffs,
    simulate_profile_series,
)
from dnlsdecay import _core


def classify(nonlinearity, allow_non_gauge=False):
    """Classification report for a nonlinearity expression, as a dict."""
    return _json.loads(_core.classify_json(nonlinearity, allow_non_gauge))


def fit_decay_exponent(log_t, values, eps, **window):
    """Least-squares decay exponent report, as a dict."""
    return _json.loads(_core.fit_decay_exponent(log_t, values, eps, **window))


def verify_matsumura(**kwargs):
    """Comparison-bound verdict along a test ODE, as a dict."""
    return _json.loads(_core.verify_matsumura(**kwargs))


def run_scenario(config, out_dir):
    """Run the full pipeline for a scenario config (dict or JSON string)."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _json.loads(_core.run_scenario_json(config, out_dir))


__all__ = [
    "NumericalError",
    "ValidationError",
    "classify",
    "closed_form_modulus_sq",
    "fit_decay_exponent",
    "integral_i_theta",
    "is_weakly_gauge_invariant",
    "matsumura_c2",
    "nu_coeffs",
    "run_scenario",
    "simulate_profile_series",
    "verify_matsumura",
]
