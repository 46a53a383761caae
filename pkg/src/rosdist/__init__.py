"""Numerics for the Rosenblatt distribution.

Expansion weights of the chi-square series, cumulants and moments, the
Levy density and characteristic function, and the distribution function,
density and quantiles of ``Z_D`` for ``0 < D < 1/2``.
"""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, RosdistError  # noqa: E402
from .params import ModelParams, coefficient_C, sigma_of_D  # noqa: E402
from .nystrom import Grid, NystromOperator, build_operator  # noqa: E402
from .cumulants import CumulantSet, c_k, cumulant_set, kappa, moments_from_cumulants  # noqa: E402
from .spectrum import Spectrum, SpectrumCache, converge_spectrum, leading_eigenvalues  # noqa: E402
from .levy import LevyModel, char_function, levy_density  # noqa: E402
from .dist import (  # noqa: E402
    EdgeworthModel,
    Rosenblatt,
    berry_esseen_bound,
    quantile,
    rosenblatt_cdf,
    rosenblatt_pdf,
)

__all__ = [
    "__version__",
    "RosdistError",
    "DomainError",
    "ConvergenceError",
    "ModelParams",
    "sigma_of_D",
    "coefficient_C",
    "Grid",
    "NystromOperator",
    "build_operator",
    "CumulantSet",
    "c_k",
    "cumulant_set",
    "kappa",
    "moments_from_cumulants",
    "Spectrum",
    "SpectrumCache",
    "converge_spectrum",
    "leading_eigenvalues",
    "LevyModel",
    "char_function",
    "levy_density",
    "EdgeworthModel",
    "Rosenblatt",
    "berry_esseen_bound",
    "quantile",
    "rosenblatt_cdf",
    "rosenblatt_pdf",
]
