"""Conditional-independence backends."""

from .backends import DataBackend, OracleBackend
from .oracle import oracle_ci
from .plain import normal_scores, plain_ci_test, pooled_columns, residualize
from .proxy import ProxyTestError, proxy_linearity_arrays, proxy_linearity_test, quantile_bins
from .types import CiError, CiQuery, CiVerdict, InsufficientSamplesError

__all__ = [
    "CiError",
    "CiQuery",
    "CiVerdict",
    "DataBackend",
    "InsufficientSamplesError",
    "OracleBackend",
    "ProxyTestError",
    "normal_scores",
    "oracle_ci",
    "plain_ci_test",
    "pooled_columns",
    "proxy_linearity_arrays",
    "proxy_linearity_test",
    "quantile_bins",
    "residualize",
]
