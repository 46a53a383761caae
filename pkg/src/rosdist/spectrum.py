"""Expansion weights ``lambda_n`` of the Rosenblatt chi-square series.

The weights are the eigenvalues of ``sigma(D) K_D``.  They are computed
from the Nystrom matrix with ARPACK and completed beyond the explicit head
by the power law ``C(D) n^(D-1)``.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import eigs

from . import __version__, specfun
from .errors import ConvergenceError, DomainError, RosdistError
from .nystrom import build_operator
from .params import check_D, coefficient_C, sigma_of_D

__all__ = [
    "Spectrum",
    "SpectrumCache",
    "coefficient_C",
    "leading_eigenvalues",
    "converge_spectrum",
    "asymptotic_lambda",
    "lambda_sequence",
    "tail_identity_residual",
    "kappa_from_spectrum",
    "IMAG_TOL",
]

IMAG_TOL = 1e-9
DEFAULT_M = 50


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Leading weights ``lambda_1 >= ... >= lambda_M`` plus the tail law."""

    D: float
    M: int
    lambdas: np.ndarray
    C: float
    J_used: int | None = None
    scaled: bool = True
    history: tuple = field(default=(), repr=False)

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float)
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "M", int(lam.size))

    def head(self, m: int) -> np.ndarray:
        if m > self.M:
            raise DomainError(f"spectrum holds {self.M} eigenvalues, {m} requested")
        return self.lambdas[:m]

    def to_dict(self) -> dict:
        return {
            "D": self.D,
            "M": self.M,
            "J_used": self.J_used,
            "C": self.C,
            "scaled": self.scaled,
            "lambdas": [float(v) for v in self.lambdas],
            "version": __version__,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Spectrum":
        return cls(
            D=float(doc["D"]),
            M=int(doc["M"]),
            lambdas=np.asarray(doc["lambdas"], dtype=float),
            C=float(doc["C"]),
            J_used=doc.get("J_used"),
            scaled=bool(doc.get("scaled", True)),
        )


def _leading(D, M, J):
    op = build_operator(D, J)
    n = J + 1
    if M >= n - 1:
        raise DomainError(f"need M < J, got M={M}, J={J}")
    k = min(max(M, 6), n - 2)
    # fixed start vector keeps repeated runs bit-identical
    w = eigs(op.matrix, k=k, which="LR", v0=np.ones(n), tol=0.0, return_eigenvectors=False)
    w = w[np.argsort(-w.real)][:M]
    imag = float(np.max(np.abs(w.imag))) if w.size else 0.0
    if imag > IMAG_TOL:
        raise RosdistError(f"eigenvalues have imaginary parts up to {imag:.2e}; the matrix is suspect")
    return w.real


def leading_eigenvalues(D, M: int, J: int, scaled: bool = True) -> Spectrum:
    """The ``M`` largest eigenvalues of the J-panel Nystrom matrix, times ``sigma(D)`` if ``scaled``."""
    D = check_D(D)
    if int(M) != M or M < 1:
        raise DomainError("M must be a positive integer")
    lam = _leading(D, int(M), int(J))
    if scaled:
        lam = sigma_of_D(D) * lam
    C = coefficient_C(D) if scaled else coefficient_C(D) / sigma_of_D(D)
    return Spectrum(D=D, M=int(M), lambdas=lam, C=C, J_used=int(J), scaled=scaled)


def _stable(new, old):
    unit = 10.0 ** (np.floor(np.log10(np.abs(new))) - 3)
    return bool(np.all(np.abs(new - old) <= 0.5 * unit))


def converge_spectrum(
    D,
    M: int = DEFAULT_M,
    base: int = 400,
    step: int = 200,
    ceiling: int = 5000,
    cache: "SpectrumCache | None" = None,
) -> Spectrum:
    """Raise J from ``base`` by ``step`` until the M leading weights agree
    to half a unit in the 4th significant digit between consecutive grids.
    """
    D = check_D(D)
    M = int(M)
    if cache is not None:
        hit = cache.get(D, M)
        if hit is not None:
            return hit
    history = []
    prev = None
    J = base
    while J < 4 * M:  # keep the requested eigenvalues well inside the resolved part
        J += step
    while J <= ceiling:
        lam = sigma_of_D(D) * _leading(D, M, J)
        history.append((J, lam))
        if prev is not None and _stable(lam, prev):
            spec = Spectrum(D=D, M=M, lambdas=lam, C=coefficient_C(D), J_used=J, history=tuple(history))
            if cache is not None:
                cache.put(spec)
            return spec
        prev = lam
        J += step
    raise ConvergenceError(
        f"leading {M} eigenvalues at D={D} not stable to 4 significant digits by J={ceiling}",
        report={"history": [(j, lam.tolist()) for j, lam in history]},
    )


def asymptotic_lambda(spec: Spectrum, n):
    """Tail law ``C n^(D-1)``."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise DomainError("n must be >= 1")
    out = spec.C * n ** (spec.D - 1.0)
    return float(out) if out.ndim == 0 else out


def lambda_sequence(spec: Spectrum, n_max: int) -> np.ndarray:
    """``lambda_1 .. lambda_{n_max}``: explicit head, then the tail law."""
    head = spec.lambdas[: min(n_max, spec.M)]
    if n_max <= spec.M:
        return head.copy()
    tail = asymptotic_lambda(spec, np.arange(spec.M + 1, n_max + 1))
    return np.concatenate([head, tail])


def tail_identity_residual(spec: Spectrum) -> float:
    """Residual of ``sum_n (lambda_n - C n^(D-1)) = -2^(1-D) sigma zeta(D)``.

    The partial sums ``S_m`` are continued past ``M`` assuming
    ``S_m = S + b m^-q``: three sums at ``M/4, M/2, M`` fix ``q`` and the
    geometric remainder.  When the differences do not decay (noise
    dominated), the raw partial sum is used.
    """
    if spec.M < 4:
        raise DomainError("tail identity needs at least 4 eigenvalues")
    n = np.arange(1, spec.M + 1)
    S = np.cumsum(spec.lambdas - spec.C * n ** (spec.D - 1.0))
    m = spec.M
    d1 = S[m // 2 - 1] - S[m // 4 - 1]
    d2 = S[m - 1] - S[m // 2 - 1]
    total = S[-1]
    if d1 != 0.0:
        r = d2 / d1
        if 0.0 < r < 1.0:
            total += d2 * r / (1.0 - r)
    rhs = -(2.0 ** (1.0 - spec.D)) * sigma_of_D(spec.D) * specfun.riemann_zeta(spec.D)
    return float(total - rhs)


def kappa_from_spectrum(spec: Spectrum, k: int) -> float:
    """``kappa_k = 2^(k-1) (k-1)! sum_n lambda_n^k``.

    All explicit weights enter the head; the tail from ``n = M + 1`` on is
    ``C^k zeta(k(1-D), M + 1)``.
    """
    if int(k) != k or k < 2:
        raise DomainError("k must be an integer >= 2")
    k = int(k)
    head = float(np.sum(spec.lambdas**k))
    tail = spec.C**k * specfun.hurwitz_zeta(k * (1.0 - spec.D), spec.M + 1)
    return 2.0 ** (k - 1) * math.factorial(k - 1) * (head + tail)


class SpectrumCache:
    """Directory of JSON documents, one per ``(D, M)``.

    Writes go through a temporary file and ``os.replace`` so a reader never
    sees a partial document.
    """

    def __init__(self, directory):
        self.directory = Path(directory)

    def path(self, D, M) -> Path:
        return self.directory / f"spectrum_D{float(D):.6f}_M{int(M)}.json"

    def get(self, D, M) -> Spectrum | None:
        p = self.path(D, M)
        try:
            with open(p, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (FileNotFoundError, json.JSONDecodeError):
            return None
        if doc.get("D") != float(D) or doc.get("M") != int(M):
            return None
        return Spectrum.from_dict(doc)

    def put(self, spec: Spectrum) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        p = self.path(spec.D, spec.M)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(spec.to_dict(), fh, indent=1, sort_keys=True)
                fh.write("\n")
            os.replace(tmp, p)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return p
