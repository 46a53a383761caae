"""Nystrom discretisation of the weakly singular operator

    (K f)(x) = int_0^1 |x - u|^(-D) f(u) du

by collocation at grid nodes with piecewise-linear (hat function)
interpolation of ``f``.  Panel integrals of the kernel against the hat
functions are evaluated from closed-form antiderivatives, so for a
piecewise-linear ``f`` the matrix-vector product is exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .errors import DomainError
from .params import check_D

__all__ = [
    "Grid",
    "NystromOperator",
    "uniform_grid",
    "kernel_moments",
    "build_operator",
    "apply",
    "inner_product",
]


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing nodes ``0 = x_0 < ... < x_J = 1``."""

    nodes: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise DomainError("a grid needs at least two nodes")
        if x[0] != 0.0 or x[-1] != 1.0:
            raise DomainError("grid endpoints must be exactly 0 and 1")
        if np.any(np.diff(x) <= 0):
            raise DomainError("grid nodes must be strictly increasing")
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)

    @property
    def J(self) -> int:
        return self.nodes.size - 1

    @property
    def is_uniform(self) -> bool:
        h = np.diff(self.nodes)
        return bool(np.allclose(h, 1.0 / self.J, rtol=1e-12, atol=0.0))

    def __len__(self):
        return self.nodes.size


def uniform_grid(J: int) -> Grid:
    if int(J) != J or J < 1:
        raise DomainError(f"J must be a positive integer, got {J!r}")
    return Grid(np.linspace(0.0, 1.0, int(J) + 1))


def _panel_moments(xi, a, b, D):
    """Moments of ``|xi - u|^-D`` over ``[a, b]`` in the shifted variable t = u - xi.

    Returns ``(int |t|^-D dt, int t |t|^-D dt)``.  The antiderivatives
    ``sign(t)|t|^(1-D)/(1-D)`` and ``|t|^(2-D)/(2-D)`` are continuous through
    t = 0, so a panel containing ``xi`` needs no explicit split.
    """
    ta = np.asarray(a, dtype=float) - xi
    tb = np.asarray(b, dtype=float) - xi
    p = 1.0 - D
    q = 2.0 - D
    m0 = (np.sign(tb) * np.abs(tb) ** p - np.sign(ta) * np.abs(ta) ** p) / p
    m1 = (np.abs(tb) ** q - np.abs(ta) ** q) / q
    return m0, m1


def kernel_moments(xi: float, a: float, b: float, D: float) -> tuple[float, float]:
    """Return ``(int_a^b |xi-u|^-D du, int_a^b u |xi-u|^-D du)``."""
    D = check_D(D)
    if not (0.0 <= a < b <= 1.0):
        raise DomainError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    if not 0.0 <= xi <= 1.0:
        raise DomainError(f"xi must lie in [0, 1], got {xi}")
    m0, m1t = _panel_moments(xi, a, b, D)
    return float(m0), float(xi * m0 + m1t)


def _hat_weights(ta, tb, D):
    """Kernel integrals against the falling and rising hat pieces of a panel.

    ``ta``/``tb`` are panel endpoints shifted by the collocation node.
    """
    m0, m1 = _panel_moments(0.0, ta, tb, D)
    h = tb - ta
    left = (tb * m0 - m1) / h
    right = (m1 - ta * m0) / h
    return left, right


def _assemble_uniform(J, D):
    h = 1.0 / J
    # panel offsets d = (panel index) - (row index), d in [-J-1, J]
    d = np.arange(-J - 1, J + 1, dtype=float)
    left, right = _hat_weights(d * h, (d + 1.0) * h, D)

    def at(arr, k):
        return arr[np.asarray(k) + J + 1]

    k = np.arange(0, J + 1)
    col = at(left, -k) + at(right, -k - 1)  # a(-i)
    row = at(left, k) + at(right, k - 1)  # a(j)
    A = toeplitz(col, row)
    A[:, 0] = at(left, -k)
    A[:, J] = at(right, J - 1 - k)
    return A


def _assemble_general(nodes, D):
    xi = nodes[:, None]
    left, right = _hat_weights(nodes[None, :-1] - xi, nodes[None, 1:] - xi, D)
    A = np.zeros((nodes.size, nodes.size))
    A[:, :-1] += left
    A[:, 1:] += right
    return A


@dataclass(frozen=True, eq=False)
class NystromOperator:
    """Matrix ``K`` with ``(K f)_i = (K_D f_J)(x_i)`` for hat-interpolated ``f``."""

    grid: Grid
    matrix: np.ndarray
    D: float

    @property
    def J(self) -> int:
        return self.grid.J

    def __matmul__(self, f):
        return apply(self, f)


def build_operator(D: float, J: int | None = None, *, grid: Grid | None = None) -> NystromOperator:
    """Assemble the collocation matrix on ``grid`` (default: uniform with J panels)."""
    D = check_D(D)
    if grid is None:
        if J is None:
            raise DomainError("give either J or grid")
        if int(J) != J or J < 2:
            raise DomainError(f"J must be an integer >= 2, got {J!r}")
        grid = uniform_grid(int(J))
    elif J is not None and J != grid.J:
        raise DomainError("J disagrees with the supplied grid")
    if grid.is_uniform:
        A = _assemble_uniform(grid.J, D)
    else:
        A = _assemble_general(grid.nodes, D)
    A.setflags(write=False)
    return NystromOperator(grid=grid, matrix=A, D=D)


def apply(op: NystromOperator, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape[0] != len(op.grid):
        raise DomainError(f"vector length {f.shape[0]} does not match grid size {len(op.grid)}")
    return op.matrix @ f


def inner_product(grid: Grid, f, g) -> float:
    """Composite trapezoid approximation of ``int_0^1 f g dx`` on the grid."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    n = len(grid)
    if f.shape != (n,) or g.shape != (n,):
        raise DomainError("inner_product vectors must match the grid length")
    p = f * g
    h = np.diff(grid.nodes)
    return float(np.sum(h * 0.5 * (p[1:] + p[:-1])))
