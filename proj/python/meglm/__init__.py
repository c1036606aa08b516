"""Measurement-error GLMs: closed forms, prior elicitation, simulation and fitting."""

import json

from ._core import (
    InputError,
    NumericalError,
    attenuation_factor,
    berkson_precision_from_interval,
    gamma_from_quantiles,
    lognormal_from_quantiles,
    meb_conditional,
    mec_conditional,
    mec_marginal_w,
    mec_scaled_conditional,
    naive_glm_fit,
    precision_from_uniform_range,
    simulate,
)
from . import _core

__all__ = [
    "InputError",
    "NumericalError",
    "attenuation_factor",
    "berkson_precision_from_interval",
    "fit",
    "gamma_from_quantiles",
    "lognormal_from_quantiles",
    "meb_conditional",
    "mec_conditional",
    "mec_marginal_w",
    "mec_scaled_conditional",
    "naive_glm_fit",
    "precision_from_uniform_range",
    "simulate",
]


def fit(config, data, method="laplace", **options):
    """Fit one method and return the report as a dict.

    `config` is model YAML text and `data` is CSV text, as written by `simulate`.
    """
    return json.loads(_core.fit_json(config, data, method, **options))
