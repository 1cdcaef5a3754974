"""Space-time periodic shear profiles b(y, tau) and their grid samples.

The built-in parametric family is

    b(y, tau) = delta * sin(2*pi*y) * (1 + sin(2*pi*freq*tau)),

mean zero over the unit cell for every amplitude delta and integer
temporal frequency freq.  Arbitrary shears enter as tabulated grids of
sample values, either constructed directly, converted from a finite list
of Fourier coefficients, or loaded from CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import RecordParseError, ShearError
from .grid import GridSpec, first_derivative_matrix

__all__ = [
    "ShearSpec",
    "ShearField",
    "sample",
    "mean_over_cell",
    "check_nondegenerate",
    "time_average",
    "table_from_fourier",
    "load_table_csv",
]


@dataclass(frozen=True)
class ShearSpec:
    """Definition of a shear profile, parametric or tabulated.

    Parametric specs evaluate the sinusoidal family above at the physical
    node coordinates (exact on unit-period cells).  Tabulated specs carry
    a (n_tau, n_y) table of samples and can only be placed on a grid with
    matching dimensions.
    """

    kind: str
    delta: float = 0.0
    freq: int = 0
    table: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "parametric":
            if self.delta < 0:
                raise ShearError("amplitude delta must be nonnegative")
            if self.freq < 0 or self.freq != int(self.freq):
                raise ShearError("temporal frequency must be a nonnegative integer")
        elif self.kind == "tabulated":
            if self.table is None or np.ndim(self.table) != 2:
                raise ShearError("tabulated spec needs a 2-D (n_tau, n_y) table")
            if not np.all(np.isfinite(self.table)):
                raise ShearError("tabulated shear contains non-finite entries")
            self.table.setflags(write=False)
        else:
            raise ShearError(f"unknown shear kind {self.kind!r}")

    @staticmethod
    def parametric(delta: float, freq: int = 0) -> "ShearSpec":
        return ShearSpec(kind="parametric", delta=float(delta), freq=int(freq))

    @staticmethod
    def tabulated(table: np.ndarray) -> "ShearSpec":
        return ShearSpec(kind="tabulated", table=np.asarray(table, dtype=float))


@dataclass(frozen=True)
class ShearField:
    """Shear samples on a grid, flattened with y varying fastest."""

    values: np.ndarray
    grid: GridSpec
    source: ShearSpec

    def __post_init__(self):
        if self.values.shape != (self.grid.size,):
            raise ShearError(
                f"field length {self.values.shape} does not match grid size {self.grid.size}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ShearError("shear field contains non-finite entries")
        self.values.setflags(write=False)

    def as_table(self) -> np.ndarray:
        """Samples reshaped to (n_tau, n_y)."""
        return self.values.reshape(self.grid.n_tau, self.grid.n_y)


def sample(spec: ShearSpec, grid: GridSpec) -> ShearField:
    """Evaluate a shear spec at the grid nodes.

    Tabulated specs must match the grid dimensions exactly.
    """
    if spec.kind == "parametric":
        y = grid.y_nodes()
        tau = grid.tau_nodes()
        profile = spec.delta * np.sin(2.0 * np.pi * y)
        envelope = 1.0 + np.sin(2.0 * np.pi * spec.freq * tau)
        table = np.outer(envelope, profile)
    else:
        table = np.asarray(spec.table, dtype=float)
        if table.shape != (grid.n_tau, grid.n_y):
            raise ShearError(
                f"table shape {table.shape} does not match grid "
                f"({grid.n_tau}, {grid.n_y})"
            )
    return ShearField(values=table.reshape(-1).copy(), grid=grid, source=spec)


def mean_over_cell(field: ShearField) -> float:
    """Cell average of the samples (the trapezoid rule on a uniform
    periodic grid reduces to the plain mean)."""
    return float(field.values.mean())


def check_nondegenerate(field: ShearField) -> float:
    """Grid approximation of the integral of |d_y b|**2 over the cell.

    Values below ~1e-12 indicate a shear with no y variation, for which
    no speed enhancement can occur.
    """
    grid = field.grid
    dmat = first_derivative_matrix(grid.n_y, grid.period_y)
    db = field.as_table() @ dmat.entries.T
    cell_area = grid.period_y * grid.period_tau
    return float(np.mean(db**2) * cell_area)


def time_average(field: ShearField) -> ShearField:
    """Replace the field by its tau average, replicated across tau.

    Produces the comparison shear: the same spatial profile with the
    oscillating-in-time component removed.
    """
    table = field.as_table()
    if np.all(table == table[0]):
        return field
    profile = table.mean(axis=0)
    averaged = np.tile(profile, (field.grid.n_tau, 1))
    return ShearField(
        values=averaged.reshape(-1),
        grid=field.grid,
        source=ShearSpec.tabulated(averaged),
    )


def table_from_fourier(
    grid: GridSpec,
    y_coeffs: dict[int, float] | None = None,
    tau_coeffs: dict[int, float] | None = None,
) -> ShearSpec:
    """Build a tabulated spec from finite sine-series coefficients.

    `y_coeffs[k]` adds a * sin(2*pi*k*y/period_y) constant in tau, and
    `tau_coeffs[k]` adds a * sin(2*pi*k*tau/period_tau) constant in y;
    both pieces are mean zero over the cell by construction.
    """
    y = grid.y_nodes()
    tau = grid.tau_nodes()
    table = np.zeros((grid.n_tau, grid.n_y))
    for k, a in (y_coeffs or {}).items():
        table += a * np.sin(2.0 * np.pi * k * y / grid.period_y)[np.newaxis, :]
    for k, a in (tau_coeffs or {}).items():
        table += a * np.sin(2.0 * np.pi * k * tau / grid.period_tau)[:, np.newaxis]
    return ShearSpec.tabulated(table)


def load_table_csv(path) -> ShearSpec:
    """Load a tabulated shear from CSV with columns i_y, i_tau, value.

    A header row is required.  Every (i_y, i_tau) pair must appear
    exactly once; dimensions are inferred from the largest indices.
    """
    entries = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:3]] != ["i_y", "i_tau", "value"]:
            raise RecordParseError("expected header 'i_y,i_tau,value'", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise RecordParseError(f"expected 3 columns, got {len(row)}", lineno)
            try:
                i_y, i_tau, value = int(row[0]), int(row[1]), float(row[2])
            except ValueError as exc:
                raise RecordParseError(str(exc), lineno) from exc
            if i_y < 0 or i_tau < 0:
                raise RecordParseError("negative grid index", lineno)
            if (i_y, i_tau) in entries:
                raise RecordParseError(f"duplicate entry for ({i_y}, {i_tau})", lineno)
            entries[(i_y, i_tau)] = value
    if not entries:
        raise RecordParseError("no data rows", 2)
    n_y = max(k[0] for k in entries) + 1
    n_tau = max(k[1] for k in entries) + 1
    if len(entries) != n_y * n_tau:
        raise ShearError(
            f"incomplete table: {len(entries)} entries for a {n_y}x{n_tau} grid"
        )
    table = np.empty((n_tau, n_y))
    for (i_y, i_tau), value in entries.items():
        table[i_tau, i_y] = value
    return ShearSpec.tabulated(table)
