"""Periodic collocation grids and Fourier differentiation matrices.

The computational cell is [0, period_y) x [0, period_tau) with equispaced
nodes in both directions.  Differentiation of periodic grid functions is
dense matrix multiplication; the matrices are the classical even-N Fourier
collocation operators (Trefethen, "Spectral Methods in MATLAB", ch. 3),
built on [0, 2*pi) and rescaled to the requested period.  They are exact
on every Fourier mode the grid resolves.

Grid functions on the 2-D cell are stored as flat vectors with the y index
varying fastest: flat = i_tau * n_y + i_y.  Operators acting on the cell
are Kronecker products consistent with that layout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridError

__all__ = [
    "GridSpec",
    "DiffMatrix",
    "first_derivative_matrix",
    "second_derivative_matrix",
    "flatten_index",
    "unflatten_index",
]


def _check_points(n: int) -> None:
    if n < 4 or n % 2 != 0:
        raise GridError(f"need an even number of points >= 4, got {n}")


@dataclass(frozen=True)
class GridSpec:
    """Equispaced periodic grid on the (y, tau) cell.

    Both point counts must be even (the differentiation matrices use the
    even-N entry formulas) and at least 4.  Spacings are derived, never
    stored, so h * n == period holds exactly.
    """

    n_y: int
    n_tau: int
    period_y: float = 1.0
    period_tau: float = 1.0

    def __post_init__(self):
        _check_points(self.n_y)
        _check_points(self.n_tau)
        if not (self.period_y > 0 and self.period_tau > 0):
            raise GridError("grid periods must be positive")

    @property
    def h_y(self) -> float:
        return self.period_y / self.n_y

    @property
    def h_tau(self) -> float:
        return self.period_tau / self.n_tau

    @property
    def size(self) -> int:
        """Total degrees of freedom on the cell."""
        return self.n_y * self.n_tau

    def y_nodes(self) -> np.ndarray:
        return np.arange(self.n_y) * self.h_y

    def tau_nodes(self) -> np.ndarray:
        return np.arange(self.n_tau) * self.h_tau


@dataclass(frozen=True)
class DiffMatrix:
    """Dense periodic differentiation matrix of the given order.

    order 1 is antisymmetric, order 2 symmetric; both annihilate
    constants.  `entries` is read-only.
    """

    order: int
    size: int
    period: float
    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)


def first_derivative_matrix(n: int, period: float = 1.0) -> DiffMatrix:
    """First-derivative collocation matrix for an n-point periodic grid.

    On the canonical cell [0, 2*pi) the entries are 0 on the diagonal and
    0.5 * (-1)**(i-j) * cot((i-j)*h/2) off it, with h = 2*pi/n; the result
    is scaled by 2*pi/period to differentiate period-periodic functions.
    """
    _check_points(n)
    if period <= 0:
        raise GridError("period must be positive")
    h = 2.0 * np.pi / n
    i, j = np.mgrid[0:n, 0:n]
    d = i - j
    with np.errstate(divide="ignore", invalid="ignore"):
        off = 0.5 * (-1.0) ** d / np.tan(d * (h / 2.0))
    mat = np.where(d == 0, 0.0, off) * (2.0 * np.pi / period)
    return DiffMatrix(order=1, size=n, period=period, entries=mat)


def second_derivative_matrix(n: int, period: float = 1.0) -> DiffMatrix:
    """Second-derivative collocation matrix for an n-point periodic grid.

    Diagonal -pi**2/(3*h**2) - 1/6, off-diagonal
    -(-1)**(i-j) / (2*sin((i-j)*h/2)**2) on [0, 2*pi), scaled by
    (2*pi/period)**2.
    """
    _check_points(n)
    if period <= 0:
        raise GridError("period must be positive")
    h = 2.0 * np.pi / n
    i, j = np.mgrid[0:n, 0:n]
    d = i - j
    with np.errstate(divide="ignore", invalid="ignore"):
        off = -((-1.0) ** d) / (2.0 * np.sin(d * (h / 2.0)) ** 2)
    diag = -np.pi**2 / (3.0 * h**2) - 1.0 / 6.0
    mat = np.where(d == 0, diag, off) * (2.0 * np.pi / period) ** 2
    return DiffMatrix(order=2, size=n, period=period, entries=mat)


def flatten_index(grid: GridSpec, i_y: int, i_tau: int) -> int:
    """Map grid indices (i_y, i_tau) to the flat vector index."""
    if not (0 <= i_y < grid.n_y):
        raise IndexError(f"i_y={i_y} out of range [0, {grid.n_y})")
    if not (0 <= i_tau < grid.n_tau):
        raise IndexError(f"i_tau={i_tau} out of range [0, {grid.n_tau})")
    return i_tau * grid.n_y + i_y


def unflatten_index(grid: GridSpec, flat: int) -> tuple[int, int]:
    """Inverse of :func:`flatten_index`; returns (i_y, i_tau)."""
    if not (0 <= flat < grid.size):
        raise IndexError(f"flat index {flat} out of range [0, {grid.size})")
    i_tau, i_y = divmod(flat, grid.n_y)
    return i_y, i_tau
