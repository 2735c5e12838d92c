"""Durbin-Watson analysis of an AR(1) process driven by AR(1) noise.

Library surface: model simulation (:mod:`dwlab.model`), closed-form limits
(:mod:`dwlab.limits`), least squares statistics (:mod:`dwlab.estimators`),
chi-square tests (:mod:`dwlab.testing`), parameter recovery
(:mod:`dwlab.recovery`) and the Monte Carlo verification engine
(:mod:`dwlab.montecarlo`).  The ``dwlab`` command exposes all of it.
"""

__version__ = "0.1.0"

from .errors import DWLabError
from .estimators import EstimateSet, estimate_all, running_estimates
from .limits import AsymptoticSet, asymptotics
from .model import ModelParams, NoiseSpec, Series, simulate, validate_params
from .montecarlo import (
    McConfig,
    McReport,
    derive_seed,
    empirical_size_power,
    lil_envelope_check,
    qsl_check,
    run_replications,
)
from .recovery import RecoveredParams, recover_params, recover_sigma2
from .testing import TestOutcome, TestWeights, auto_test, critical_case_test, rho_test, rho_zero_test

__all__ = [
    "__version__",
    "DWLabError",
    "ModelParams",
    "NoiseSpec",
    "Series",
    "simulate",
    "validate_params",
    "AsymptoticSet",
    "asymptotics",
    "EstimateSet",
    "estimate_all",
    "running_estimates",
    "TestOutcome",
    "TestWeights",
    "critical_case_test",
    "rho_test",
    "rho_zero_test",
    "auto_test",
    "RecoveredParams",
    "recover_params",
    "recover_sigma2",
    "McConfig",
    "McReport",
    "derive_seed",
    "run_replications",
    "empirical_size_power",
    "qsl_check",
    "lil_envelope_check",
]
