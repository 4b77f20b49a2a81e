"""Python access to the srde stochastic reaction-diffusion laboratory."""

from ._srde import (
    ConfigError,
    SrdeError,
    __version__,
    admissibility,
    bessel,
    config_hash,
    dalang_sup_kappa,
    holder_prediction,
    run_cli,
    simulate,
    truncation,
)

__all__ = [
    "ConfigError",
    "SrdeError",
    "__version__",
    "admissibility",
    "bessel",
    "config_hash",
    "dalang_sup_kappa",
    "holder_prediction",
    "run_cli",
    "simulate",
    "truncation",
]
