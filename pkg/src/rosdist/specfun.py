"""Special functions used throughout the package.

Thin, domain-checked wrappers around :mod:`scipy.special` plus the few
pieces scipy does not provide in the form needed here (probabilists'
Hermite tables, the joint normal pdf/cdf).  Every function accepts a
scalar or an array and returns the same shape.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sc

from .errors import DomainError

__all__ = [
    "ln_gamma",
    "gamma",
    "beta",
    "upper_incomplete_gamma",
    "gauss_2f1",
    "riemann_zeta",
    "hurwitz_zeta",
    "hermite",
    "hermite_table",
    "std_normal",
    "std_normal_pdf",
    "std_normal_cdf",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _scalar_or_array(value, like):
    if np.ndim(like) == 0 and np.ndim(value) == 0:
        return float(value)
    return value


def ln_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    return _scalar_or_array(sc.gammaln(xa), x)


def gamma(x):
    """Gamma function for ``x > 0``."""
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError(f"gamma requires x > 0, got {x!r}")
    return _scalar_or_array(sc.gamma(xa), x)


def beta(a, b):
    """Euler beta function ``Gamma(a) Gamma(b) / Gamma(a + b)``."""
    aa = np.asarray(a, dtype=float)
    ba = np.asarray(b, dtype=float)
    if np.any(~(aa > 0)) or np.any(~(ba > 0)):
        raise DomainError(f"beta requires a, b > 0, got a={a!r}, b={b!r}")
    return _scalar_or_array(sc.beta(aa, ba), aa + ba)


def upper_incomplete_gamma(a, b):
    """Non-normalised upper incomplete gamma ``int_b^inf z^(a-1) e^-z dz``."""
    aa = np.asarray(a, dtype=float)
    ba = np.asarray(b, dtype=float)
    if np.any(~(aa > 0)) or np.any(~(ba >= 0)):
        raise DomainError(f"upper_incomplete_gamma requires a > 0, b >= 0, got a={a!r}, b={b!r}")
    return _scalar_or_array(sc.gammaincc(aa, ba) * sc.gamma(aa), aa + ba)


def gauss_2f1(a, b, c, x):
    """Gauss hypergeometric function on ``0 <= x <= 1``.

    Only the regime ``c > b > 0`` and ``c > a + b`` is supported; there the
    function is finite at ``x = 1`` and equals the Gauss sum
    ``Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b))``.
    """
    if not (c > b > 0 and c > a + b):
        raise DomainError(f"gauss_2f1 needs c > b > 0 and c > a + b, got a={a}, b={b}, c={c}")
    xa = np.asarray(x, dtype=float)
    if np.any(~((xa >= 0) & (xa <= 1))):
        raise DomainError("gauss_2f1 is only provided for 0 <= x <= 1")
    return _scalar_or_array(sc.hyp2f1(a, b, c, xa), x)


def riemann_zeta(s):
    """Analytically continued Riemann zeta on the strip ``0 < s < 1``."""
    sa = np.asarray(s, dtype=float)
    if np.any(~((sa > 0) & (sa < 1))):
        raise DomainError(f"riemann_zeta is provided on 0 < s < 1 only, got {s!r}")
    return _scalar_or_array(sc.zeta(sa), s)


def hurwitz_zeta(s, m):
    """Shifted zeta series ``sum_{n >= m} n^(-s)`` for ``s > 1``, ``m >= 1``."""
    sa = np.asarray(s, dtype=float)
    ma = np.asarray(m, dtype=float)
    if np.any(~(sa > 1)):
        raise DomainError(f"hurwitz_zeta requires s > 1, got {s!r}")
    if np.any(~(ma >= 1)):
        raise DomainError(f"hurwitz_zeta requires m >= 1, got {m!r}")
    return _scalar_or_array(sc.zeta(sa, ma), sa + ma)


def hermite_table(kmax: int, x) -> np.ndarray:
    """Rows ``H_0(x) .. H_kmax(x)`` of probabilists' Hermite polynomials.

    Built with the three-term recurrence ``H_{k+1} = x H_k - k H_{k-1}``;
    the result has shape ``(kmax + 1,) + np.shape(x)``.
    """
    if kmax < 0:
        raise DomainError("hermite order must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = x
    for k in range(1, kmax):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


def hermite(k: int, x):
    """Probabilists' Hermite polynomial ``H_k(x)``."""
    if k < 0:
        raise DomainError("hermite order must be >= 0")
    return _scalar_or_array(hermite_table(k, x)[k], x)


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return _scalar_or_array(_INV_SQRT_2PI * np.exp(-0.5 * x * x), x)


def std_normal_cdf(x):
    return _scalar_or_array(sc.ndtr(np.asarray(x, dtype=float)), x)


def std_normal(x):
    """Return ``(pdf, cdf)`` of the standard normal law at ``x``."""
    return std_normal_pdf(x), std_normal_cdf(x)
