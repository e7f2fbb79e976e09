"""Grids, species parameters, dimensionless groups, and velocity moments.

Everything downstream (collision operator, transport, field solve, both
drivers) shares the uniform phase-space grid and the species records defined
here.  The spatial domain is the interval [0, lx] with outward normals -1/+1
at the two endpoints; velocities live on a symmetric truncation
[-vmax, vmax].  All reductions fix their summation order so that repeated
runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "SpeciesPhysical",
    "PhysicalScales",
    "SpeciesParams",
    "PhaseGrid",
    "KineticState",
    "MomentFields",
    "derive_scales",
    "default_vmax",
    "density",
    "current",
    "second_moment",
    "check_neutrality",
]


def _require_positive(name: str, value) -> None:
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class SpeciesPhysical:
    """Dimensional per-species inputs: valence, mass, relaxation time."""

    label: str
    z: int
    m: float
    tau: float

    def __post_init__(self):
        _require_positive(f"species {self.label}: m", self.m)
        _require_positive(f"species {self.label}: tau", self.tau)


@dataclass(frozen=True)
class PhysicalScales:
    """Reference quantities of the dimensional problem.

    ``theta_ref`` is the squared thermal velocity of the reference particle
    (thermal energy over reference mass); ``thermal_energy`` is carried
    alongside for echoing into manifests.
    """

    m_ref: float
    tau_ref: float
    theta_ref: float
    q: float
    epsilon0: float
    thermal_energy: float
    L: float
    N0: float
    Phi0: float
    species: tuple[SpeciesPhysical, ...]

    def __post_init__(self):
        for name in ("m_ref", "tau_ref", "theta_ref", "q", "epsilon0",
                     "thermal_energy", "L", "N0", "Phi0"):
            _require_positive(name, getattr(self, name))
        if not self.species:
            raise ValueError("at least one species is required")


@dataclass(frozen=True)
class SpeciesParams:
    """Dimensionless per-species parameters.

    ``z`` is the (integer-valued) valence, ``kappa`` the reference-to-species
    mass ratio (sets the width of the velocity equilibrium), ``zeta`` the
    reference-to-species relaxation-time ratio (sets the collision strength).
    """

    label: str
    z: float
    kappa: float
    zeta: float

    def __post_init__(self):
        _require_positive(f"species {self.label}: kappa", self.kappa)
        _require_positive(f"species {self.label}: zeta", self.zeta)


def derive_scales(scales: PhysicalScales):
    """Collapse dimensional reference quantities to the dimensionless groups.

    Returns ``(epsilon, nu, varpi, species_params)`` with

    * ``V_ref = sqrt(theta_ref)`` the thermal velocity scale,
    * ``U_ref = tau_ref * (q/m_ref) * (Phi0/L)`` the drift velocity scale,
    * ``nu = V_ref/U_ref``, ``epsilon = tau_ref*V_ref/L``,
    * ``varpi = epsilon0*Phi0 / (q*N0*L**2)``,
    * per species ``kappa_i = m_ref/m_i`` and ``zeta_i = tau_ref/tau_i``.
    """
    v_ref = float(np.sqrt(scales.theta_ref))
    u_ref = scales.tau_ref * (scales.q / scales.m_ref) * (scales.Phi0 / scales.L)
    nu = v_ref / u_ref
    epsilon = scales.tau_ref * v_ref / scales.L
    varpi = scales.epsilon0 * scales.Phi0 / (scales.q * scales.N0 * scales.L**2)
    params = [
        SpeciesParams(
            label=s.label,
            z=s.z,
            kappa=scales.m_ref / s.m,
            zeta=scales.tau_ref / s.tau,
        )
        for s in scales.species
    ]
    return epsilon, nu, varpi, params


def default_vmax(species: Sequence[SpeciesParams]) -> float:
    """Velocity truncation leaving equilibrium tail mass below 1e-14."""
    return 8.0 * max(np.sqrt(s.kappa) for s in species)


@dataclass
class PhaseGrid:
    """Uniform midpoint grid on [0, lx] x [-vmax, vmax].

    The velocity grid is built symmetrically (negative half mirrors the
    positive half bit-for-bit) so that even/odd cancellations and specular
    index reversal are exact in floating point.  ``nv`` must be even; no
    cell straddles v = 0.
    """

    nx: int
    lx: float
    nv: int
    vmax: float
    dx: float = field(init=False)
    dv: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False)
    v: np.ndarray = field(init=False, repr=False)
    v_faces: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.nx < 2:
            raise ValueError(f"nx must be at least 2, got {self.nx}")
        if self.nv < 2 or self.nv % 2:
            raise ValueError(f"nv must be even and at least 2, got {self.nv}")
        _require_positive("lx", self.lx)
        _require_positive("vmax", self.vmax)
        self.dx = self.lx / self.nx
        self.dv = 2.0 * self.vmax / self.nv
        self.x = (np.arange(self.nx) + 0.5) * self.dx
        half = (np.arange(self.nv // 2) + 0.5) * self.dv
        self.v = np.concatenate([-half[::-1], half])
        hf = np.arange(self.nv // 2 + 1) * self.dv
        self.v_faces = np.concatenate([-hf[:0:-1], hf])

    @property
    def cell_measure(self) -> float:
        return self.dx * self.dv


@dataclass
class KineticState:
    """Per-species distributions on one shared phase-space grid.

    ``f`` has shape (n_species, nx, nv) and stays nonnegative under every
    operation in the package (scheme property, never enforced by clipping).
    """

    grid: PhaseGrid
    species: tuple[SpeciesParams, ...]
    f: np.ndarray
    t: float
    epsilon: float

    def __post_init__(self):
        expected = (len(self.species), self.grid.nx, self.grid.nv)
        if self.f.shape != expected:
            raise ValueError(f"f has shape {self.f.shape}, expected {expected}")
        _require_positive("epsilon", self.epsilon)

    def copy(self) -> "KineticState":
        return KineticState(self.grid, self.species, self.f.copy(),
                            self.t, self.epsilon)


@dataclass
class MomentFields:
    """Velocity moments of a kinetic state: densities and currents."""

    n: np.ndarray  # (n_species, nx)
    j: np.ndarray  # (n_species, nx)


def density(state: KineticState, i: int | None = None) -> np.ndarray:
    """Velocity quadrature of f: n(x_j) = sum_k f(x_j, v_k) dv."""
    f = state.f if i is None else state.f[i]
    return f.sum(axis=-1) * state.grid.dv


def current(state: KineticState, i: int | None = None,
            epsilon: float | None = None) -> np.ndarray:
    """Rescaled first moment: J(x_j) = (1/epsilon) sum_k v_k f(x_j, v_k) dv."""
    eps = state.epsilon if epsilon is None else epsilon
    _require_positive("epsilon", eps)
    f = state.f if i is None else state.f[i]
    return (f * state.grid.v).sum(axis=-1) * (state.grid.dv / eps)


def second_moment(state: KineticState, i: int) -> float:
    """Phase-space integral of v^2 f for one species (bounds monitor)."""
    g = state.grid
    return float((state.f[i] * g.v**2).sum() * g.cell_measure)


def moments(state: KineticState) -> MomentFields:
    return MomentFields(n=density(state), j=current(state))


def check_neutrality(n: np.ndarray, z: Sequence[int], background: np.ndarray,
                     dx: float) -> float:
    """Signed total charge: sum_i z_i int n_i dx + int background dx.

    Callers assert the returned residual against their own tolerance; the
    field solver rejects sources whose residual is not compatibly small.
    """
    total = 0.0
    for i, zi in enumerate(z):
        total += zi * n[i].sum() * dx
    total += background.sum() * dx
    return float(total)
