"""The model parameter ``D`` and the constants derived from it."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


def check_D(D) -> float:
    try:
        D = float(D)
    except (TypeError, ValueError):
        raise DomainError(f"D must be a real number, got {D!r}") from None
    if not 0.0 < D < 0.5:
        raise DomainError(f"D must lie in (0, 1/2), got {D}")
    return D


def sigma_of_D(D) -> float:
    """Normalising constant ``sqrt((1 - 2D)(1 - D) / 2)``."""
    D = check_D(D)
    return math.sqrt(0.5 * (1.0 - 2.0 * D) * (1.0 - D))


def coefficient_C(D) -> float:
    """Coefficient of the eigenvalue law ``lambda_n ~ C n^(D-1)``."""
    D = check_D(D)
    return (
        2.0
        / math.pi ** (1.0 - D)
        * sigma_of_D(D)
        * math.gamma(1.0 - D)
        * math.sin(0.5 * math.pi * D)
    )


@dataclass(frozen=True)
class ModelParams:
    D: float
    sigma: float
    C: float

    @classmethod
    def from_D(cls, D) -> "ModelParams":
        D = check_D(D)
        return cls(D=D, sigma=sigma_of_D(D), C=coefficient_C(D))
