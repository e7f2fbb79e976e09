"""Drift-diffusion (Poisson coupled to Nernst-Planck) reference solver.

Densities live on the same cell-centered x grid as the kinetic solver.
Fluxes use the exponential-fitting face formula

    F_{j+1/2} = (D_i/dx) [ B(delta) n_j - B(-delta) n_{j+1} ],
    delta = z_i (phi_{j+1} - phi_j),   B(s) = s/(e^s - 1),

which vanishes identically on discrete Boltzmann equilibria
n_j proportional to e^{-z phi_j} because B(-s) = e^s B(s).  Each step
solves the field from the current densities, then advances every species
with the flux implicit in the new density and the potential lagged.  The
resulting tridiagonal matrix has unit column sums (mass is conserved to
rounding) and nonpositive off-diagonal entries, so the no-pivot solve
keeps densities nonnegative in exact and in floating arithmetic.

The species diffusivity is a run-level choice: "kappa-over-zeta" uses
D_i = kappa_i/zeta_i, "one-over-zeta" uses D_i = 1/zeta_i.  Both are kept
because the limit harness compares kinetic densities against each and
reports which one the kinetic solver actually converges to.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .grid import PhaseGrid, SpeciesParams, check_neutrality
from .kernels import thomas_shared
from .poisson import FieldState, field_energy, solve_poisson
from .util import bernoulli, xlogx

__all__ = [
    "DIFFUSIVITY_MODES",
    "PnpProblem",
    "PnpRecord",
    "PnpSnapshot",
    "PnpResult",
    "diffusivities",
    "sg_flux",
    "pnp_step",
    "pnp_energy",
    "run_pnp",
]

DIFFUSIVITY_MODES = ("kappa-over-zeta", "one-over-zeta")


def diffusivities(species, mode: str) -> np.ndarray:
    """Per-species diffusion coefficients for the given mode."""
    if mode == "kappa-over-zeta":
        return np.array([sp.kappa / sp.zeta for sp in species])
    if mode == "one-over-zeta":
        return np.array([1.0 / sp.zeta for sp in species])
    raise ValueError(f"unknown diffusivity mode {mode!r}")


@dataclass
class PnpProblem:
    """Drift-diffusion run description; uses only the x part of the grid."""

    grid: PhaseGrid
    species: tuple[SpeciesParams, ...]
    varpi: float
    background: np.ndarray
    diffusivity: str = "kappa-over-zeta"
    safety: float = 0.4
    dcoef: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        self.dcoef = diffusivities(self.species, self.diffusivity)
        if not 0.0 < self.safety <= 0.5:
            raise ValueError(f"safety must lie in (0, 0.5], got {self.safety!r}")

    def auto_dt(self) -> float:
        return self.safety * self.grid.dx**2 / float(self.dcoef.max())

    def max_dt(self) -> float:
        return 0.5 * self.grid.dx**2 / float(self.dcoef.max())


@dataclass
class PnpRecord:
    t: float
    dt: float
    mass: np.ndarray
    energy: float
    field_energy: float
    dissipation: float
    neutrality: float
    nmin: float


@dataclass
class PnpSnapshot:
    t: float
    n: np.ndarray
    phi: np.ndarray
    e_faces: np.ndarray
    flux_faces: np.ndarray   # (ns, nx + 1), zero at the walls


@dataclass
class PnpResult:
    records: list[PnpRecord]
    samples: list[PnpSnapshot]
    final: np.ndarray
    t: float


def _face_drops(phi: np.ndarray, z: float) -> np.ndarray:
    """z * (phi_{j+1} - phi_j) on the nx - 1 interior faces."""
    return z * np.diff(phi)


def sg_flux(n_i: np.ndarray, phi: np.ndarray, sp: SpeciesParams,
            dcoef: float, grid: PhaseGrid) -> np.ndarray:
    """Face fluxes of one species, walls included (zero by no-flux walls)."""
    delta = _face_drops(phi, sp.z)
    flux = np.zeros(grid.nx + 1)
    flux[1:-1] = (dcoef / grid.dx) * (bernoulli(delta) * n_i[:-1]
                                      - bernoulli(-delta) * n_i[1:])
    return flux


def pnp_step(n: np.ndarray, problem: PnpProblem, dt: float,
             field: FieldState | None = None):
    """One implicit-density, lagged-potential step; returns (n_new, field).

    dt must not exceed 0.5 dx^2 / max D_i; the accuracy of the lagged
    field coupling is only controlled in that regime.
    """
    g = problem.grid
    if not dt > 0.0:
        raise ValueError(f"nonpositive time step {dt!r}")
    if dt > problem.max_dt() * (1.0 + 1e-12):
        raise ValueError(
            f"time step {dt!r} exceeds the lagged-coupling bound "
            f"{problem.max_dt()!r}")
    if field is None:
        field = solve_poisson(n, [sp.z for sp in problem.species],
                              problem.background, problem.varpi, g)

    n_new = np.empty_like(n)
    for i, sp in enumerate(problem.species):
        lam = problem.dcoef[i] * dt / g.dx**2
        delta = _face_drops(field.phi, sp.z)
        bp = bernoulli(delta)      # weight of the left cell at each face
        bm = bernoulli(-delta)     # weight of the right cell
        diag = np.ones(g.nx)
        diag[:-1] += lam * bp
        diag[1:] += lam * bm
        upper = -lam * bm
        lower = -lam * bp
        n_new[i] = thomas_shared(lower, diag, upper, n[i][None, :])[0]
    return n_new, field


def pnp_energy(n: np.ndarray, field: FieldState,
               problem: PnpProblem) -> tuple[float, float]:
    """Free energy and its discrete dissipation functional.

    energy = sum_i int n_i log n_i dx + (varpi/2) int |d_x phi|^2 dx.
    The dissipation is the face-quadrature version of
    sum_i D_i int n_i |d_x(log n_i + z_i phi)|^2 dx (diagnostic only).
    """
    g = problem.grid
    energy = float(sum(xlogx(n[i]).sum() * g.dx for i in range(len(n))))
    energy += field_energy(field, g)
    dissip = 0.0
    for i, sp in enumerate(problem.species):
        ni = n[i]
        nface = 0.5 * (ni[:-1] + ni[1:])
        ok = (ni[:-1] > 0.0) & (ni[1:] > 0.0)
        dlog = np.where(ok, np.log(np.where(ok, ni[1:] / np.where(
            ok, ni[:-1], 1.0), 1.0)), 0.0)
        slope = (dlog + _face_drops(field.phi, sp.z)) / g.dx
        dissip += problem.dcoef[i] * float((nface * slope**2).sum() * g.dx)
    return energy, dissip


def _record(n: np.ndarray, field: FieldState, problem: PnpProblem,
            t: float, dt: float) -> PnpRecord:
    g = problem.grid
    energy, dissip = pnp_energy(n, field, problem)
    return PnpRecord(
        t=t, dt=dt, mass=n.sum(axis=1) * g.dx,
        energy=energy, field_energy=field_energy(field, g),
        dissipation=dissip,
        neutrality=check_neutrality(n, [sp.z for sp in problem.species],
                                    problem.background, g.dx),
        nmin=float(n.min()))


def _snapshot(n: np.ndarray, problem: PnpProblem, t: float) -> PnpSnapshot:
    g = problem.grid
    field = solve_poisson(n, [sp.z for sp in problem.species],
                          problem.background, problem.varpi, g)
    flux = np.stack([sg_flux(n[i], field.phi, sp, problem.dcoef[i], g)
                     for i, sp in enumerate(problem.species)])
    return PnpSnapshot(t=t, n=n.copy(), phi=field.phi.copy(),
                       e_faces=field.e_faces.copy(), flux_faces=flux)


def run_pnp(problem: PnpProblem, n0: np.ndarray, T: float,
            n_samples: int = 10) -> PnpResult:
    """Integrate densities from n0 to time T, sampling at k*T/n_samples.

    Mirrors the kinetic driver's sampling so limit comparisons line up
    time for time.
    """
    if not T > 0.0:
        raise ValueError(f"T must be positive, got {T!r}")
    n = np.array(n0, dtype=float, copy=True)
    if n.ndim != 2 or n.shape != (len(problem.species), problem.grid.nx):
        raise ValueError(
            f"n0 must have shape (n_species, nx) = "
            f"{(len(problem.species), problem.grid.nx)}, got {n.shape}")
    if n.min() < 0.0:
        raise ValueError("initial densities must be nonnegative")
    t = 0.0
    base_dt = problem.auto_dt()
    records: list[PnpRecord] = []
    samples = [_snapshot(n, problem, t)]
    for k in range(1, n_samples + 1):
        target = T * k / n_samples
        while t < target:
            remaining = target - t
            dt = min(base_dt, remaining)
            field = solve_poisson(n, [sp.z for sp in problem.species],
                                  problem.background, problem.varpi,
                                  problem.grid)
            records.append(_record(n, field, problem, t, dt))
            n, _ = pnp_step(n, problem, dt, field=field)
            t = target if dt >= remaining * (1.0 - 1e-12) else t + dt
        samples.append(_snapshot(n, problem, t))
    field = solve_poisson(n, [sp.z for sp in problem.species],
                          problem.background, problem.varpi, problem.grid)
    records.append(_record(n, field, problem, t, 0.0))
    return PnpResult(records=records, samples=samples, final=n, t=t)
