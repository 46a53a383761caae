"""Levy-Khintchine form of the Rosenblatt law.

``Z_D`` is infinitely divisible with Levy density

    nu_D(u) = (1 / 2u) sum_n exp(-u / (2 lambda_n)),   u > 0,

which is ``G_c(e^(-u/2)) / 2u`` for the sequence ``c_n = 1 / lambda_n``.
Beyond the explicit eigenvalues the sequence follows the power law
``c_n = n^(1-D) / C``, and its contribution is summed by Euler-Maclaurin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import specfun
from .cumulants import cumulant_set
from .errors import DomainError
from .params import sigma_of_D
from .spectrum import Spectrum

__all__ = [
    "PowerLawSequence",
    "LevyModel",
    "g_c",
    "levy_density",
    "levy_normalization",
    "char_function",
    "left_tail_bound",
    "right_tail_ratio_limit",
]

# explicit terms summed past the head before switching to Euler-Maclaurin
_EM_OFFSET = 400


@dataclass(frozen=True, eq=False)
class PowerLawSequence:
    """Increasing positive sequence: explicit ``head`` then ``beta * n^alpha``."""

    head: np.ndarray
    alpha: float
    beta: float

    def __post_init__(self):
        h = np.asarray(self.head, dtype=float)
        if h.ndim != 1 or np.any(h <= 0):
            raise DomainError("head terms must be positive")
        if not self.alpha > 0.5 or not self.beta > 0:
            raise DomainError("power-law tail needs alpha > 1/2 and beta > 0")
        h.setflags(write=False)
        object.__setattr__(self, "head", h)

    @classmethod
    def power_law(cls, alpha, beta, m=0):
        """Pure power law ``c_n = beta n^alpha`` (the first ``m`` terms made explicit)."""
        n = np.arange(1, m + 1, dtype=float)
        return cls(head=beta * n**alpha, alpha=alpha, beta=beta)


def _g_from_kappa(seq: PowerLawSequence, kappa: float) -> float:
    """``G_c(e^-kappa) = sum_n exp(-kappa c_n)`` for ``kappa > 0``."""
    M = seq.head.size
    total = float(np.sum(np.exp(-kappa * seq.head)))
    a, al = kappa * seq.beta, seq.alpha
    n = np.arange(M + 1, M + 1 + _EM_OFFSET, dtype=float)
    total += float(np.sum(np.exp(-a * n**al)))
    N = float(M + 1 + _EM_OFFSET)
    gN = a * N**al
    if gN > 745.0:
        return total
    f = math.exp(-gN)
    g1 = al * gN / N
    g2 = (al - 1.0) * g1 / N
    g3 = (al - 2.0) * g2 / N
    d1 = -g1 * f
    d3 = (-(g1**3) + 3.0 * g1 * g2 - g3) * f
    integral = a ** (-1.0 / al) / al * specfun.upper_incomplete_gamma(1.0 / al, gN)
    return total + integral + 0.5 * f - d1 / 12.0 + d3 / 720.0


def _u2nu_scaled(seq: PowerLawSequence, u: float) -> float:
    """``u^2 nu(u) / u^(1 - 1/alpha)``, bounded on ``[0, 1]``; the u = 0 value is its limit."""
    al = seq.alpha
    if u == 0.0:
        return 0.5 * 2.0 ** (1.0 / al) * specfun.gamma(1.0 / al) / (al * seq.beta ** (1.0 / al))
    return 0.5 * u ** (1.0 / al) * _g_from_kappa(seq, 0.5 * u)


def g_c(seq: PowerLawSequence, x: float) -> float:
    """``G_c(x) = sum_n x^(c_n)`` on ``0 < x < 1``."""
    x = float(x)
    if not 0.0 < x < 1.0:
        raise DomainError(f"g_c needs 0 < x < 1, got {x}")
    return _g_from_kappa(seq, -math.log(x))


@dataclass(frozen=True, eq=False)
class LevyModel:
    spec: Spectrum

    @property
    def D(self) -> float:
        return self.spec.D

    @property
    def sequence(self) -> PowerLawSequence:
        return PowerLawSequence(head=1.0 / self.spec.lambdas, alpha=1.0 - self.D, beta=1.0 / self.spec.C)


def levy_density(model: LevyModel, u):
    """``nu_D(u)`` for ``u > 0``; strictly positive."""
    ua = np.asarray(u, dtype=float)
    if np.any(~(ua > 0)):
        raise DomainError("the Levy density lives on u > 0")
    seq = model.sequence
    out = np.array([_g_from_kappa(seq, 0.5 * v) / (2.0 * v) for v in ua.ravel()]).reshape(ua.shape)
    return float(out) if out.ndim == 0 else out


def levy_normalization(model: LevyModel, method: str = "series") -> float:
    """``int_0^inf u^2 nu_D(u) du``, which should equal 1.

    ``series`` sums the per-term integrals ``2 lambda_n^2`` with a Hurwitz
    zeta tail; ``quadrature`` integrates the density itself.
    """
    spec = model.spec
    if method == "series":
        tail = spec.C**2 * specfun.hurwitz_zeta(2.0 * (1.0 - spec.D), spec.M + 1)
        return 2.0 * (float(np.sum(spec.lambdas**2)) + tail)
    if method == "quadrature":
        # u^2 nu(u) ~ u^(1 - 1/alpha) near 0
        p = 1.0 - 1.0 / (1.0 - spec.D)
        seq = model.sequence
        lo, _ = integrate.quad(lambda u: _u2nu_scaled(seq, u), 0.0, 1.0, weight="alg", wvar=(p, 0.0), epsrel=1e-10)
        hi, _ = integrate.quad(lambda u: 0.5 * u * _g_from_kappa(seq, 0.5 * u), 1.0, np.inf, epsrel=1e-10, limit=200)
        return lo + hi
    raise ValueError(f"unknown method {method!r}")


def _levy_log_cf(model: LevyModel, theta: float) -> complex:
    if theta == 0.0:
        return 0j
    seq = model.sequence
    p = 1.0 - 1.0 / (1.0 - model.D)
    w = lambda u: _u2nu_scaled(seq, u)  # noqa: E731

    def kernel(u):
        # (e^{i theta u} - 1 - i theta u) / u^2 without cancellation
        t = theta * u
        if abs(t) < 1e-3:  # includes u = 0
            re = -0.5 * theta**2 * (1.0 - t * t / 12.0)
            im = -(theta**3) * u / 6.0 * (1.0 - t * t / 20.0)
        else:
            re = (math.cos(t) - 1.0) / (u * u)
            im = (math.sin(t) - t) / (u * u)
        return re, im

    opts = dict(epsabs=1e-13, epsrel=1e-11, limit=400)
    re0, _ = integrate.quad(lambda u: kernel(u)[0] * w(u), 0.0, 1.0, weight="alg", wvar=(p, 0.0), **opts)
    im0, _ = integrate.quad(lambda u: kernel(u)[1] * w(u), 0.0, 1.0, weight="alg", wvar=(p, 0.0), **opts)

    nu = lambda u: _g_from_kappa(seq, 0.5 * u) / (2.0 * u)  # noqa: E731
    a = abs(theta)
    c, _ = integrate.quad(nu, 1.0, np.inf, weight="cos", wvar=a)
    s, _ = integrate.quad(nu, 1.0, np.inf, weight="sin", wvar=a)
    m0, _ = integrate.quad(nu, 1.0, np.inf, **opts)
    m1, _ = integrate.quad(lambda u: u * nu(u), 1.0, np.inf, **opts)
    re1 = c - m0
    im1 = math.copysign(s, theta) - theta * m1
    return complex(re0 + re1, im0 + im1)


def _series_log_cf(D, theta: float, kmax: int) -> complex:
    sig = sigma_of_D(D)
    z = 2j * theta * sig
    cs = cumulant_set(D, kmax)
    total = 0j
    for k in range(2, kmax + 1):
        term = z**k * cs.c_of(k) / (2 * k)
        total += term
        if abs(term) < 1e-18:
            break
    return total


def char_function(model: LevyModel, theta, method: str = "levy", kmax: int = 30):
    """Characteristic function ``E exp(i theta Z_D)``.

    ``levy`` integrates the Levy-Khintchine exponent and works for every
    real ``theta``.  ``cumulant-series`` sums ``sum_k kappa_k (i theta)^k / k!``,
    which converges only for ``|2 theta sigma sqrt(c_2)| < 1``, that is
    ``|theta| < 1/sqrt(2)``.
    """
    theta = float(theta)
    if method == "levy":
        return complex(np.exp(_levy_log_cf(model, theta)))
    if method == "cumulant-series":
        if abs(theta) >= 1.0 / math.sqrt(2.0):
            raise DomainError("cumulant series diverges for |theta| >= 1/sqrt(2)")
        return complex(np.exp(_series_log_cf(model.D, theta, kmax)))
    raise ValueError(f"unknown method {method!r}")


def left_tail_bound(x):
    """Upper bound ``exp(-x^2/2)`` on ``P[Z_D < -x]`` for ``x > 0``, any ``D``."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("left_tail_bound needs x > 0")
    out = np.exp(-0.5 * x * x)
    return float(out) if out.ndim == 0 else out


def right_tail_ratio_limit(spec: Spectrum, alpha) -> float:
    """``lim_u P[Z > u + alpha] / P[Z > u] = exp(-alpha / (2 lambda_1))``."""
    if alpha < 0:
        raise DomainError("alpha must be >= 0")
    return math.exp(-alpha / (2.0 * spec.lambdas[0]))
