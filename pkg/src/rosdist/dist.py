"""Distribution function, density and quantiles of ``Z_D``.

``Z_D = X + Y`` splits the chi-square series into a head ``X`` of explicit
terms and a tail ``Y``.  The head law is recovered by inverting its
characteristic function; the tail is replaced by an Edgeworth expansion
built from its Hurwitz-zeta cumulants.  The two are convolved over
Gauss-Legendre nodes in ``y``, with the sum over nodes carried inside the
Fourier inversion integral so each ``x`` costs one pass over the
``theta`` grid.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from . import specfun
from .errors import ConvergenceError, DomainError
from .params import check_D
from .spectrum import Spectrum, SpectrumCache, converge_spectrum

__all__ = [
    "EdgeworthModel",
    "Rosenblatt",
    "sigma_M",
    "kappa_kM",
    "edgeworth_model",
    "edgeworth_terms",
    "edgeworth_cdf",
    "edgeworth_pdf",
    "edgeworth_cf",
    "chisq_sum_cdf_pdf",
    "head_cdf_pdf",
    "rosenblatt_cdf",
    "rosenblatt_pdf",
    "quantile",
    "berry_esseen_bound",
    "get_spectrum",
    "auto_model",
    "BERRY_ESSEEN_CONSTANT",
]

BERRY_ESSEEN_CONSTANT = 0.7056
DEFAULT_M = 50
DEFAULT_N = 6


# --- tail model -------------------------------------------------------------
#
# Here ``M`` is the split index: the head holds lambda_1 .. lambda_{M-1} and
# the tail Y_M starts at n = M.


def _check_split(spec: Spectrum, M):
    if int(M) != M or M < 1:
        raise DomainError(f"split index must be a positive integer, got {M!r}")
    if M > spec.M + 1:
        raise DomainError(f"split index {M} needs {M - 1} eigenvalues, spectrum has {spec.M}")
    return int(M)


def sigma_M(spec: Spectrum, M: int) -> float:
    """Tail scale ``(1 - 2 sum_{n<M} lambda_n^2)^(1/2)``."""
    M = _check_split(spec, M)
    s2 = 1.0 - 2.0 * float(np.sum(spec.lambdas[: M - 1] ** 2))
    if s2 <= 0.0:
        raise DomainError("head variance exceeds 1; spectrum is inconsistent")
    return math.sqrt(s2)


def kappa_kM(spec: Spectrum, M: int, k: int) -> float:
    """Normalised tail cumulant ``2^(k-1) (k-1)! sigma_M^-k C^k zeta(k(1-D), M)``."""
    M = _check_split(spec, M)
    if M < 2:
        raise DomainError("tail cumulants need M >= 2")
    if int(k) != k or k < 2:
        raise DomainError("k must be an integer >= 2")
    k = int(k)
    return (
        2.0 ** (k - 1)
        * math.factorial(k - 1)
        * sigma_M(spec, M) ** (-k)
        * spec.C**k
        * specfun.hurwitz_zeta(k * (1.0 - spec.D), M)
    )


@lru_cache(maxsize=None)
def edgeworth_terms(N: int) -> tuple:
    """Index tuples ``(k_3, .., k_N)`` with ``1 <= sum (m-2) k_m <= N-2``."""
    if N < 2:
        raise DomainError("Edgeworth order N must be >= 2")
    ms = range(3, N + 1)
    out = []
    for ks in itertools.product(*[range((N - 2) // (m - 2) + 1) for m in ms]):
        order = sum((m - 2) * k for m, k in zip(ms, ks))
        if 1 <= order <= N - 2:
            out.append(ks)
    return tuple(out)


@dataclass(frozen=True)
class EdgeworthModel:
    """Edgeworth approximation of the standardised tail ``Y_M / sigma_M``.

    ``kappa_tail`` holds ``kappa_{3,M} .. kappa_{N,M}``.
    """

    M: int
    N: int
    sigma_M: float
    kappa_tail: tuple
    coefs: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.N < 2 or len(self.kappa_tail) != self.N - 2:
            raise DomainError("kappa_tail must hold kappa_3 .. kappa_N")
        coefs = []
        for ks in edgeworth_terms(self.N):
            c = 1.0
            for m, k in zip(range(3, self.N + 1), ks):
                c *= (self.kappa_tail[m - 3] / math.factorial(m)) ** k / math.factorial(k)
            coefs.append((c, sum(m * k for m, k in zip(range(3, self.N + 1), ks)) - 1))
        object.__setattr__(self, "coefs", tuple(coefs))

    @property
    def max_hermite(self) -> int:
        return max((z for _, z in self.coefs), default=0) + 1


def edgeworth_model(spec: Spectrum, M: int, N: int) -> EdgeworthModel:
    kt = tuple(kappa_kM(spec, M, k) for k in range(3, N + 1))
    return EdgeworthModel(M=int(M), N=int(N), sigma_M=sigma_M(spec, M), kappa_tail=kt)


def edgeworth_cdf(em: EdgeworthModel, x):
    """``Phi(x) - phi(x) sum_eta c_eta H_{zeta(eta)}(x)``."""
    x = np.asarray(x, dtype=float)
    pdf, cdf = specfun.std_normal(x)
    if em.coefs:
        H = specfun.hermite_table(em.max_hermite, x)
        cdf = cdf - pdf * sum(c * H[z] for c, z in em.coefs)
    return float(cdf) if np.ndim(cdf) == 0 else cdf


def edgeworth_pdf(em: EdgeworthModel, x):
    """``phi(x) [1 + sum_eta c_eta H_{zeta(eta)+1}(x)]``."""
    x = np.asarray(x, dtype=float)
    pdf = specfun.std_normal_pdf(x)
    if em.coefs:
        H = specfun.hermite_table(em.max_hermite, x)
        pdf = pdf * (1.0 + sum(c * H[z + 1] for c, z in em.coefs))
    return float(pdf) if np.ndim(pdf) == 0 else pdf


def edgeworth_cf(em: EdgeworthModel, t):
    """Fourier transform of :func:`edgeworth_pdf`, using ``FT[phi H_k](t) = (it)^k e^(-t^2/2)``."""
    t = np.asarray(t, dtype=float)
    it = 1j * t
    out = np.exp(-0.5 * t * t) * (1.0 + sum(c * it ** (z + 1) for c, z in em.coefs))
    return out


# --- finite weighted chi-square sums ------------------------------------------


def _chisq_cf_unshifted(lams, theta):
    """``prod (1 - 2 i theta lambda)^(-1/2)``, the CF of ``sum lambda eps^2``."""
    th = np.asarray(theta, dtype=float)
    z = np.log1p(-2j * np.multiply.outer(th, lams))
    return np.exp(-0.5 * np.sum(z, axis=-1))


def chisq_sum_cdf_pdf(lams, x, *, epsabs=1e-11, full_output=False):
    """CDF and PDF of ``sum lambda_n (eps_n^2 - 1)`` at scalar ``x``.

    Half-line inversion of the characteristic function; with
    ``g(theta) = prod (1 - 2 i theta lambda)^(-1/2)`` and ``y = x + sum lambda``,

        F = 1/2 - (1/pi) int_0^inf Im[g e^{-i theta y}] / theta,
        f = (1/pi) int_0^inf Re[g e^{-i theta y}].

    ``[0, 1]`` is integrated directly and ``[1, inf)`` with QUADPACK's
    Fourier-weight rule.  The PDF integral converges absolutely only for
    three or more terms.
    """
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 1 or lams.size == 0 or np.any(lams <= 0):
        raise DomainError("weights must be a non-empty vector of positive reals")
    y = float(x) + float(np.sum(lams))
    if y <= 0.0:
        res = (0.0, 0.0)
        return (res, {"abserr": 0.0}) if full_output else res

    def g(t):
        return complex(_chisq_cf_unshifted(lams, t))

    def cdf_core(t):
        if t == 0.0:
            return float(np.sum(lams)) - y
        v = g(t) * complex(math.cos(t * y), -math.sin(t * y))
        return v.imag / t

    def pdf_core(t):
        v = g(t) * complex(math.cos(t * y), -math.sin(t * y))
        return v.real

    opts = dict(epsabs=epsabs, epsrel=1e-10, limit=500)
    c0, e0 = integrate.quad(cdf_core, 0.0, 1.0, **opts)
    p0, e1 = integrate.quad(pdf_core, 0.0, 1.0, **opts)
    # tail pieces: Im[g e^{-i t y}] = Im g cos(t y) - Re g sin(t y)
    quadf = dict(limlst=200, limit=500)
    a1, e2 = integrate.quad(lambda t: g(t).imag / t, 1.0, np.inf, weight="cos", wvar=y, **quadf)
    a2, e3 = integrate.quad(lambda t: g(t).real / t, 1.0, np.inf, weight="sin", wvar=y, **quadf)
    b1, e4 = integrate.quad(lambda t: g(t).real, 1.0, np.inf, weight="cos", wvar=y, **quadf)
    b2, e5 = integrate.quad(lambda t: g(t).imag, 1.0, np.inf, weight="sin", wvar=y, **quadf)
    cdf = 0.5 - (c0 + a1 - a2) / math.pi
    pdf = (p0 + b1 + b2) / math.pi
    err = max(e0, e2, e3) / math.pi
    if err > 1e-7:
        raise ConvergenceError(f"characteristic function inversion error {err:.1e}", report={"abserr": err})
    res = (min(1.0, max(0.0, cdf)), max(0.0, pdf))
    return (res, {"abserr": err, "pdf_abserr": max(e1, e4, e5) / math.pi}) if full_output else res


def head_cdf_pdf(spec: Spectrum, M: int, x, *, diagnostic: bool = False):
    """CDF and PDF of the head ``X_M = sum_{n<M} lambda_n (eps_n^2 - 1)``.

    ``M >= 4`` keeps the density integral absolutely convergent; smaller
    ``M`` is accepted only with ``diagnostic=True``.
    """
    M = _check_split(spec, M)
    if M < 4 and not (diagnostic and M >= 2):
        raise DomainError("head inversion needs M >= 4 (three or more terms)")
    return chisq_sum_cdf_pdf(spec.lambdas[: M - 1], x)


# --- the full law -------------------------------------------------------------


@lru_cache(maxsize=64)
def _spectrum_cached(D, M, cache_dir):
    cache = SpectrumCache(cache_dir) if cache_dir else None
    return converge_spectrum(D, M, cache=cache)


def get_spectrum(D, M: int = DEFAULT_M, cache_dir=None) -> Spectrum:
    """Converged spectrum with at least ``M`` weights, memoised per process."""
    return _spectrum_cached(check_D(D), int(max(M, DEFAULT_M)), str(cache_dir) if cache_dir else None)


_GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


def _gl_panels(a, b, width):
    n = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, n + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * _GL_X).ravel(), (half * _GL_W).ravel()


class Rosenblatt:
    """``Z_D`` approximated with ``terms`` explicit chi-squares and an
    order ``N`` Edgeworth tail.

    Evaluation precomputes on a ``theta`` grid the product of the head
    characteristic function and the transform ``psi`` of the discretised
    tail density, so repeated CDF/PDF calls are cheap.
    """

    def __init__(self, D, terms: int = DEFAULT_M, N: int = DEFAULT_N, *, spectrum: Spectrum | None = None,
                 y_panels: int = 24, tol: float = 1e-13):
        self.D = check_D(D)
        if int(terms) != terms or terms < 1:
            raise DomainError("number of explicit terms must be a positive integer")
        if int(N) != N or N < 2:
            raise DomainError("Edgeworth order N must be an integer >= 2")
        self.terms = int(terms)
        self.N = int(N)
        self.spec = spectrum if spectrum is not None else get_spectrum(self.D, self.terms)
        if self.spec.D != self.D:
            raise DomainError("spectrum belongs to a different D")
        self.head = self.spec.head(self.terms)
        self.em = edgeworth_model(self.spec, self.terms + 1, self.N)
        self.tol = tol
        s = self.em.sigma_M
        # tail density on Gauss-Legendre panels over [-8 sigma_M, 8 sigma_M]
        self._y, w = _gl_panels(-8.0 * s, 8.0 * s, 16.0 * s / y_panels)
        self._wf = w * edgeworth_pdf(self.em, self._y / s) / s
        self.tail_mass = float(np.sum(self._wf))
        self._shift = float(np.sum(self.head))
        self._theta_max = self._find_theta_max()
        self._grids = {}
        self.convolution_error = self._convolution_error()

    def _envelope(self, th):
        """Upper bound on ``|phi_X psi|``."""
        t = self.em.sigma_M * th
        poly = 1.0 + sum(abs(c) * t ** (z + 1) for c, z in self.em.coefs)
        return np.abs(_chisq_cf_unshifted(self.head, th)) * np.exp(-0.5 * t * t) * poly

    def _find_theta_max(self):
        th = np.geomspace(1.0, 1e5, 2001)
        env = self._envelope(th)
        # last point where the bound is still above tolerance
        above = np.nonzero(env >= self.tol)[0]
        if above.size == 0:
            return 1.0
        i = above[-1]
        if i == th.size - 1:
            raise ConvergenceError("characteristic function does not decay by theta = 1e5")
        return float(th[i + 1])

    def _psi(self, th):
        # chunked to bound memory
        out = np.empty(th.shape, dtype=complex)
        step = max(1, 2_000_000 // self._y.size)
        for i in range(0, th.size, step):
            out[i : i + step] = np.exp(1j * np.outer(th[i : i + step], self._y)) @ self._wf
        return out

    def _convolution_error(self):
        th = np.linspace(0.0, self._theta_max, 257)
        exact = edgeworth_cf(self.em, self.em.sigma_M * th)
        return float(np.max(np.abs(self._psi(th) - exact)))

    def _grid(self, xmax):
        # panel width tied to the fastest oscillation 2 pi / (|x| + sum lambda)
        key = max(4, int(2 ** math.ceil(math.log2(max(xmax, 1.0)))))
        g = self._grids.get(key)
        if g is None:
            width = 2.0 * math.pi / (key + self._shift + 8.0 * self.em.sigma_M)
            th, w = _gl_panels(0.0, self._theta_max, width)
            prod = _chisq_cf_unshifted(self.head, th) * np.exp(-1j * th * self._shift) * self._psi(th)
            g = (th, w, prod)
            self._grids[key] = g
        return g

    def _eval(self, x, want):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        if flat.size:
            th, w, prod = self._grid(float(np.max(np.abs(flat))))
            step = max(1, 4_000_000 // th.size)
            for i in range(0, flat.size, step):
                xs = flat[i : i + step]
                v = prod[:, None] * np.exp(-1j * np.outer(th, xs))
                if want == "cdf":
                    out[i : i + step] = 0.5 * self.tail_mass - (w / th) @ v.imag / math.pi
                else:
                    out[i : i + step] = w @ v.real / math.pi
        return out.reshape(x.shape)

    def cdf(self, x, clamp: bool = True):
        out = self._eval(x, "cdf")
        if clamp:
            out = np.clip(out, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def pdf(self, x, clamp: bool = True):
        out = self._eval(x, "pdf")
        if clamp:
            out = np.maximum(out, 0.0)
        return float(out) if out.ndim == 0 else out

    def quantile(self, q, *, xtol=1e-12):
        q = float(q)
        if not 0.0 < q < 1.0:
            raise DomainError(f"q must lie in (0, 1), got {q}")
        f = lambda x: self.cdf(x, clamp=False) - q  # noqa: E731
        lo, hi = -3.0, 10.0
        for _ in range(60):
            if f(lo) < 0.0:
                break
            lo -= 1.0
        else:
            raise ConvergenceError(f"no lower bracket for q={q}")
        for _ in range(60):
            if f(hi) > 0.0:
                break
            hi *= 1.5
        else:
            raise ConvergenceError(f"no upper bracket for q={q}")
        return float(brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200))


@lru_cache(maxsize=64)
def _model(D, terms, N, cache_dir):
    spec = get_spectrum(D, terms, cache_dir)
    return Rosenblatt(D, terms, N, spectrum=spec)


def _resolve(D, M, N, cache_dir=None):
    D = check_D(D)
    if M == "auto":
        return _auto_model(D, N, cache_dir)
    if int(M) != M or M < 4:
        raise DomainError("number of explicit terms must be an integer >= 4")
    return _model(D, int(M), int(N), str(cache_dir) if cache_dir else None)


AUTO_START = 10
AUTO_STEP = 10
AUTO_MAX = 200
AUTO_TOL = 1e-5
_AUTO_PROBES = np.linspace(-1.5, 4.0, 12)


@lru_cache(maxsize=16)
def _auto_model(D, N, cache_dir):
    """Raise the head size by 10 until the CDF on a probe grid moves by < 1e-5."""
    prev = None
    for M in range(AUTO_START, AUTO_MAX + 1, AUTO_STEP):
        model = _model(D, M, int(N), cache_dir)
        cur = model.cdf(_AUTO_PROBES)
        if prev is not None and np.max(np.abs(cur - prev)) < AUTO_TOL:
            return model
        prev = cur
    raise ConvergenceError(f"CDF at D={D} still moving by {AUTO_TOL} at M={AUTO_MAX}")


def auto_model(D, N: int = DEFAULT_N, cache_dir=None) -> Rosenblatt:
    """Model whose head size was raised in steps of 10 until the CDF settled to 1e-5."""
    return _auto_model(check_D(D), int(N), str(cache_dir) if cache_dir else None)


def rosenblatt_cdf(D, x, M=DEFAULT_M, N: int = DEFAULT_N, *, cache_dir=None):
    """``P[Z_D <= x]`` with ``M`` explicit chi-square terms (or ``"auto"``) and Edgeworth order ``N``."""
    return _resolve(D, M, N, cache_dir).cdf(x)


def rosenblatt_pdf(D, x, M=DEFAULT_M, N: int = DEFAULT_N, *, cache_dir=None):
    return _resolve(D, M, N, cache_dir).pdf(x)


def quantile(D, q, M=DEFAULT_M, N: int = DEFAULT_N, *, cache_dir=None) -> float:
    """Solve ``F(x) = q`` by bracketing from ``[-3, 10]``."""
    return _resolve(D, M, N, cache_dir).quantile(q)


def berry_esseen_bound(spec: Spectrum, M: int) -> float:
    """``0.7056 kappa_{3,M}``, bounding ``sup |P[Y_M <= sigma_M x] - Phi(x)|``."""
    return BERRY_ESSEEN_CONSTANT * kappa_kM(spec, M, 3)
