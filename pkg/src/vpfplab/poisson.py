"""Electrostatic field solve on the interval with insulated walls.

Solves -varpi * phi'' = sum_i z_i n_i + background with zero-gradient
(no outward field) conditions at both walls.  The Neumann problem is
singular: the source must have zero total charge, and the potential is
pinned by the zero-mean gauge.  Both are handled by deflation (project
the source onto zero mean, pin one unknown, shift the solution back to
zero mean), so the direct tridiagonal solve stays exact and O(nx).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .grid import PhaseGrid

__all__ = ["NonCompatibleSource", "FieldState", "solve_poisson",
           "electric_field", "cell_field", "field_energy"]

# relative neutrality tolerance for accepting a source
NEUTRALITY_RTOL = 1e-10


class NonCompatibleSource(ValueError):
    """Source charge does not sum to zero: Neumann problem unsolvable."""


@dataclass
class FieldState:
    """Potential on cell centers and field on faces.

    ``e_faces`` holds E = -phi' on the nx+1 cell faces; both boundary
    entries are exactly zero.  ``phi`` has zero discrete mean.
    """

    phi: np.ndarray
    e_faces: np.ndarray
    rho: np.ndarray
    varpi: float

    @property
    def nx(self) -> int:
        return self.phi.shape[0]


def solve_poisson(n: np.ndarray, z: Sequence[int], background: np.ndarray,
                  varpi: float, grid: PhaseGrid) -> FieldState:
    """Second-order cell-centered solve of the insulated-wall problem.

    n: (n_species, nx) densities; z: valences; background: (nx,) fixed
    charge.  Raises NonCompatibleSource when the discrete total charge
    exceeds NEUTRALITY_RTOL relative to the absolute charge scale.
    """
    if not varpi > 0.0:
        raise ValueError(f"varpi must be positive, got {varpi!r}")
    rho = np.zeros(grid.nx)
    scale = 0.0
    for i, zi in enumerate(z):
        rho += zi * n[i]
        scale += abs(zi) * n[i].sum() * grid.dx
    rho = rho + background
    scale += np.abs(background).sum() * grid.dx
    residual = rho.sum() * grid.dx
    if abs(residual) > NEUTRALITY_RTOL * max(scale, 1e-30):
        raise NonCompatibleSource(
            f"total charge {residual:.3e} exceeds {NEUTRALITY_RTOL:g} of "
            f"the charge scale {scale:.3e}")

    # deflate: exact zero-mean source, unknowns phi[1:] with phi[0] pinned
    rho0 = rho - rho.mean()
    nx = grid.nx
    if nx == 1:
        phi = np.zeros(1)
    else:
        a = varpi / grid.dx**2
        diag = np.full(nx - 1, 2.0 * a)
        diag[-1] = a  # insulated right wall: only one interior face
        off = np.full(nx - 2, -a)
        u = kernels.thomas_shared(off, diag, off, rho0[1:][None, :])[0]
        phi = np.concatenate([[0.0], u])
    phi = phi - phi.sum() / nx

    e_faces = np.zeros(nx + 1)
    e_faces[1:-1] = -(phi[1:] - phi[:-1]) / grid.dx
    return FieldState(phi=phi, e_faces=e_faces, rho=rho, varpi=varpi)


def electric_field(field: FieldState) -> np.ndarray:
    """Face-centered field E = -phi'; boundary faces are exactly zero."""
    return field.e_faces


def cell_field(field: FieldState) -> np.ndarray:
    """Cell-centered field, the average of the two adjacent face values."""
    e = field.e_faces
    return 0.5 * (e[:-1] + e[1:])


def field_energy(field: FieldState, grid: PhaseGrid) -> float:
    """(varpi/2) * int |E|^2 dx over the interior faces."""
    e = field.e_faces[1:-1]
    return float(0.5 * field.varpi * (e * e).sum() * grid.dx)
