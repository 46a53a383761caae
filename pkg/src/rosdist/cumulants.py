"""Cumulants and moments of the Rosenblatt distribution.

The integrals ``c_k`` are reduced to one-dimensional inner products
``c_k = (G_mu, G_nu)`` with ``mu + nu = k``, where ``G_1(x) =
(1-x)^-D / sqrt(1-D)`` and ``G_{m+1} = K G_m``.  ``G_1`` and ``G_2`` are
known in closed form; higher ``G_m`` come from repeated application of the
Nystrom matrix to samples of ``G_2`` on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import betaincc, hyp2f1

from . import specfun
from .errors import ConvergenceError, DomainError
from .nystrom import NystromOperator, _hat_weights, apply, build_operator, inner_product
from .params import ModelParams, check_D, sigma_of_D

__all__ = [
    "ModelParams",
    "CumulantSet",
    "sigma_of_D",
    "c2_closed",
    "c3_closed",
    "g1",
    "g2_closed",
    "g1_image",
    "c_k",
    "kappa",
    "cumulant_set",
    "moments_from_cumulants",
    "J_BASE",
    "J_STEP",
    "J_MAX",
]

J_BASE = 400
J_STEP = 200
J_MAX = 5000


def c2_closed(D) -> float:
    D = check_D(D)
    return 1.0 / ((1.0 - 2.0 * D) * (1.0 - D))


def c3_closed(D) -> float:
    D = check_D(D)
    return 2.0 / ((1.0 - D) * (2.0 - 3.0 * D)) * specfun.beta(1.0 - D, 1.0 - D)


def g1(D, x):
    """``G_1(x) = (1-x)^-D / sqrt(1-D)``; singular at ``x = 1``."""
    D = check_D(D)
    xa = np.asarray(x, dtype=float)
    if np.any(xa >= 1.0) or np.any(xa < 0.0):
        raise DomainError("g1 is defined on 0 <= x < 1")
    out = (1.0 - xa) ** (-D) / math.sqrt(1.0 - D)
    return float(out) if np.ndim(x) == 0 else out


def g2_closed(D, x):
    """``G_2 = K G_1`` via the beta function and 2F1(D, 1; 2-D; x); bounded on [0, 1]."""
    D = check_D(D)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or np.any(xa > 1.0):
        raise DomainError("g2_closed is defined on 0 <= x <= 1")
    out = (
        xa ** (1.0 - D) / (1.0 - D) ** 1.5 * specfun.gauss_2f1(D, 1.0, 2.0 - D, xa)
        + (1.0 - xa) ** (1.0 - 2.0 * D) * specfun.beta(1.0 - D, 1.0 - D) / math.sqrt(1.0 - D)
    )
    return float(out) if np.ndim(x) == 0 else out


def g1_image(op: NystromOperator, exact_fraction: float = 0.25) -> np.ndarray:
    """Samples of ``K G_1`` at the grid nodes.

    ``G_1`` is hat-interpolated and pushed through the Nystrom matrix on
    ``[0, a]``.  On ``[a, 1]``, the last ``exact_fraction`` of the interval,
    interpolating the endpoint singularity would cost accuracy of order
    ``h^(1-D)``, so that piece is integrated exactly against the kernel
    (algebraic-weight quadrature, beta closed form on ``[x_i, 1]``).
    """
    D = op.D
    x = op.grid.nodes
    J = op.grid.J
    p = min(J - 1, max(0, int(np.searchsorted(x, 1.0 - exact_fraction))))
    a = x[p]
    s = 1.0 / math.sqrt(1.0 - D)

    f = np.zeros(J + 1)
    f[:J] = g1(D, x[:J])
    out = op.matrix @ f
    panels = np.arange(p, J)
    left, right = _hat_weights(x[panels][None, :] - x[:, None], x[panels + 1][None, :] - x[:, None], D)
    out -= left @ f[panels] + right @ f[panels + 1]

    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=200)
    B = specfun.beta(1.0 - D, 1.0 - D)
    for i, xi in enumerate(x):
        if xi == 1.0:
            val = (1.0 - a) ** (1.0 - 2.0 * D) / (1.0 - 2.0 * D)
        elif xi <= a:
            # u = xi + (1 - xi) t maps the piece onto an incomplete beta integral
            t0 = (a - xi) / (1.0 - xi)
            val = (1.0 - xi) ** (1.0 - 2.0 * D) * B * betaincc(1.0 - D, 1.0 - D, t0)
        else:
            val = (1.0 - xi) ** (1.0 - 2.0 * D) * B
            v, _ = integrate.quad(lambda u: (1.0 - u) ** (-D), a, xi, weight="alg", wvar=(0.0, -D), **opts)
            val += v
        out[i] += s * val
    return out


def _g2_near_one(D, x):
    """Split ``G_2 = R(x) + S (1-x)^(1-2D)`` with ``R`` smooth on [1/2, 1].

    Follows from the 1 - x connection formula for 2F1(D, 1; 2-D; x), whose
    second branch collapses to ``x^(D-1)``.
    """
    A = specfun.gamma(2.0 - D) * specfun.gamma(1.0 - 2.0 * D) / (
        specfun.gamma(2.0 - 2.0 * D) * specfun.gamma(1.0 - D)
    )
    Bc = specfun.gamma(2.0 - D) * specfun.gamma(2.0 * D) / ((2.0 * D - 1.0) * specfun.gamma(D))
    S = Bc / (1.0 - D) ** 1.5 + specfun.beta(1.0 - D, 1.0 - D) / math.sqrt(1.0 - D)
    R = x ** (1.0 - D) / (1.0 - D) ** 1.5 * A * hyp2f1(D, 1.0, 2.0 * D, 1.0 - x)
    return R, S


# inner products of the closed-form pair {G_1, G_2}: plain quadrature on
# [0, 1/2], and on [1/2, 1] the endpoint powers go into algebraic weights


def _closed_pair(D, mu, nu):
    s = 1.0 / math.sqrt(1.0 - D)
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=200)
    quad = integrate.quad
    S = _g2_near_one(D, 0.5)[1]
    R = lambda x: _g2_near_one(D, x)[0]  # noqa: E731
    if (mu, nu) == (1, 1):
        val, _ = quad(lambda x: s * s, 0.0, 1.0, weight="alg", wvar=(0.0, -2.0 * D), **opts)
        return val
    if (mu, nu) in ((2, 1), (1, 2)):
        lo, _ = quad(lambda x: s * g2_closed(D, x) * (1.0 - x) ** (-D), 0.0, 0.5, **opts)
        hi, _ = quad(R, 0.5, 1.0, weight="alg", wvar=(0.0, -D), **opts)
        return lo + s * hi + s * S * 0.5 ** (2.0 - 3.0 * D) / (2.0 - 3.0 * D)
    if (mu, nu) == (2, 2):
        lo, _ = quad(lambda x: g2_closed(D, x) ** 2, 0.0, 0.5, **opts)
        rr, _ = quad(lambda x: R(x) ** 2, 0.5, 1.0, **opts)
        rs, _ = quad(R, 0.5, 1.0, weight="alg", wvar=(0.0, 1.0 - 2.0 * D), **opts)
        return lo + rr + 2.0 * S * rs + S * S * 0.5 ** (3.0 - 4.0 * D) / (3.0 - 4.0 * D)
    raise ValueError((mu, nu))


def _split(k):
    return (k + 1) // 2, k // 2


def _grid_values(D, ks, J):
    """``c_k`` for every ``k`` in ``ks`` (all with mu >= 3) on a uniform grid of J panels."""
    op = build_operator(D, J)
    G = {2: g2_closed(D, op.grid.nodes)}
    top = max(_split(k)[0] for k in ks)
    for m in range(3, top + 1):
        G[m] = apply(op, G[m - 1])
    return {k: inner_product(op.grid, G[_split(k)[0]], G[_split(k)[1]]) for k in ks}


def _stable(new, old):
    """True once ``new`` and ``old`` agree to half a unit in the 4th significant digit."""
    if new == 0.0:
        return old == 0.0
    unit = 10.0 ** (math.floor(math.log10(abs(new))) - 3)
    return abs(new - old) <= 0.5 * unit


def _converged_grid_values(D, ks, J_base=J_BASE, J_step=J_STEP, J_max=J_MAX):
    history = []
    prev = None
    J = J_base
    while J <= J_max:
        vals = _grid_values(D, ks, J)
        history.append((J, vals))
        if prev is not None and all(_stable(vals[k], prev[k]) for k in ks):
            return vals, J
        prev = vals
        J += J_step
    raise ConvergenceError(
        f"c_k for k={sorted(ks)} at D={D} not stable to 4 significant digits by J={J_max}",
        report={"history": history},
    )


def c_k(D, k: int, J: int | None = None, *, use_closed_form: bool = True) -> float:
    """The integral ``c_k`` via ``c_k = (G_mu, G_nu)``, ``mu = ceil(k/2)``.

    ``k = 2, 3`` return the closed forms unless ``use_closed_form`` is
    False, in which case they (and ``k = 4``) are computed as inner products
    of the closed-form ``G_1``/``G_2``.  For ``k >= 5`` the grid pipeline is
    used: with ``J`` given it runs once at that grid size, otherwise J is
    raised from 400 in steps of 200 until four significant digits settle.
    """
    D = check_D(D)
    if int(k) != k or k < 2:
        raise DomainError(f"c_k needs an integer k >= 2, got {k!r}")
    k = int(k)
    if use_closed_form and k == 2:
        return c2_closed(D)
    if use_closed_form and k == 3:
        return c3_closed(D)
    mu, nu = _split(k)
    if mu <= 2:
        return _closed_pair(D, mu, nu)
    if J is not None:
        return _grid_values(D, [k], J)[k]
    return _converged_grid_values(D, [k])[0][k]


def _kappa_from_c(D, k, c):
    return 2.0 ** (k - 1) * math.factorial(k - 1) * sigma_of_D(D) ** k * c


def kappa(D, k: int, J: int | None = None, **kw) -> float:
    """Cumulant ``kappa_k = 2^(k-1) (k-1)! sigma^k c_k``; ``kappa_1 = 0``."""
    if k == 1:
        return 0.0
    return _kappa_from_c(check_D(D), k, c_k(D, k, J, **kw))


def moments_from_cumulants(kappas) -> list[float]:
    """Raw moments ``mu_1 .. mu_n`` from cumulants ``kappa_1 .. kappa_n``.

    Complete Bell polynomials through the recursion
    ``mu_n = sum_j C(n-1, j-1) kappa_j mu_{n-j}``.
    """
    kap = [float(v) for v in kappas]
    mu = [1.0]
    for n in range(1, len(kap) + 1):
        mu.append(sum(math.comb(n - 1, j - 1) * kap[j - 1] * mu[n - j] for j in range(1, n + 1)))
    return mu[1:]


@dataclass(frozen=True)
class CumulantSet:
    """``c_2..c_K``, ``kappa_1..kappa_K`` and ``mu_1..mu_K`` for one ``D``."""

    D: float
    K: int
    c: tuple
    kappa: tuple
    mu: tuple
    J_used: int | None = None

    def c_of(self, k):
        return self.c[k - 2]


@lru_cache(maxsize=32)
def _cumulant_set_cached(D, K, J):
    ks_grid = [k for k in range(2, K + 1) if _split(k)[0] >= 3]
    c = {k: c_k(D, k) for k in range(2, K + 1) if k not in ks_grid}
    J_used = None
    if ks_grid:
        if J is None:
            vals, J_used = _converged_grid_values(D, ks_grid)
        else:
            vals, J_used = _grid_values(D, ks_grid, J), J
        c.update(vals)
    cs = tuple(c[k] for k in range(2, K + 1))
    kap = (0.0,) + tuple(_kappa_from_c(D, k, c[k]) for k in range(2, K + 1))
    return CumulantSet(D=D, K=K, c=cs, kappa=kap, mu=tuple(moments_from_cumulants(kap)), J_used=J_used)


def cumulant_set(D, K: int = 8, J: int | None = None) -> CumulantSet:
    D = check_D(D)
    if int(K) != K or K < 2:
        raise DomainError("cumulant order K must be an integer >= 2")
    return _cumulant_set_cached(D, int(K), J)
