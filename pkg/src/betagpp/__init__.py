"""Beta-Ginibre point process models of cellular base-station deployments.

The package covers the point process itself (moment densities, K, F, G and
J functions), the interference at a typical receiver, coverage probability,
samplers, Monte Carlo estimators, moment-matched interference densities and
fitting the retention parameter to deployment data.
"""

from .errors import (BetaGppError, ConvergenceError, DomainError, FitError, LoadError,
                     TruncationError)
from .interference import PathLoss
from .pointproc import GppModel, MhcpModel
from .coverage import SinrConfig

__version__ = "0.1.0"

__all__ = [
    "BetaGppError",
    "ConvergenceError",
    "DomainError",
    "FitError",
    "LoadError",
    "TruncationError",
    "GppModel",
    "MhcpModel",
    "PathLoss",
    "SinrConfig",
]
