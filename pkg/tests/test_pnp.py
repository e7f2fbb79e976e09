"""Drift-diffusion reference solver."""

import numpy as np
import pytest
import sympy

from vpfplab.grid import PhaseGrid, SpeciesParams
from vpfplab.pnp import (PnpProblem, diffusivities, pnp_energy, pnp_step,
                         run_pnp, sg_flux)
from vpfplab.poisson import solve_poisson


def salt_problem(nx=16, **kwargs):
    grid = PhaseGrid(nx=nx, lx=1.0, nv=4, vmax=2.0)
    species = (SpeciesParams(label="pos", z=1.0, kappa=1.0, zeta=1.0),
               SpeciesParams(label="neg", z=-1.0, kappa=1.0, zeta=1.0))
    return PnpProblem(grid=grid, species=species, varpi=1.0,
                      background=np.zeros(nx), **kwargs)


class TestDiffusivities:
    def test_both_modes(self):
        sp = (SpeciesParams(label="c", z=1.0, kappa=2.0, zeta=0.5),)
        np.testing.assert_allclose(diffusivities(sp, "kappa-over-zeta"),
                                   [4.0])
        np.testing.assert_allclose(diffusivities(sp, "one-over-zeta"), [2.0])

    def test_unknown_mode_rejected(self):
        sp = (SpeciesParams(label="c", z=1.0, kappa=1.0, zeta=1.0),)
        with pytest.raises(ValueError, match="diffusivity mode"):
            diffusivities(sp, "bogus")


class TestFaceFlux:
    def test_flux_identity_holds_symbolically(self):
        # The exponential-fitting weights satisfy B(-s) = e^s B(s), which
        # is exactly the cancellation that makes Boltzmann profiles
        # discrete steady states.  Check it in exact arithmetic.
        s = sympy.symbols("s")
        bern = s / (sympy.exp(s) - 1)
        identity = bern.subs(s, -s) - sympy.exp(s) * bern
        assert sympy.simplify(identity) == 0

    def test_uniform_density_zero_potential_no_flux(self):
        grid = PhaseGrid(nx=12, lx=1.0, nv=4, vmax=2.0)
        sp = SpeciesParams(label="c", z=1.0, kappa=1.0, zeta=1.0)
        flux = sg_flux(np.ones(12), np.zeros(12), sp, 1.3, grid)
        assert flux.shape == (13,)
        assert np.all(flux == 0.0)

    def test_zero_potential_reduces_to_central_diffusion(self):
        rng = np.random.default_rng(41)
        grid = PhaseGrid(nx=20, lx=1.0, nv=4, vmax=2.0)
        sp = SpeciesParams(label="c", z=1.0, kappa=1.0, zeta=1.0)
        n = rng.uniform(0.5, 2.0, size=20)
        dcoef = 0.7
        flux = sg_flux(n, np.zeros(20), sp, dcoef, grid)
        expected = -dcoef * np.diff(n) / grid.dx
        np.testing.assert_allclose(flux[1:-1], expected, rtol=1e-14)

    def test_wall_faces_carry_no_flux(self):
        rng = np.random.default_rng(42)
        grid = PhaseGrid(nx=20, lx=1.0, nv=4, vmax=2.0)
        sp = SpeciesParams(label="c", z=-1.0, kappa=1.0, zeta=1.0)
        n = rng.uniform(0.5, 2.0, size=20)
        phi = rng.uniform(-0.5, 0.5, size=20)
        flux = sg_flux(n, phi, sp, 1.0, grid)
        assert flux[0] == 0.0
        assert flux[-1] == 0.0


@pytest.fixture(scope="module")
def boltzmann_equilibrium():
    """Self-consistent single-species profile against a cosine background."""
    grid = PhaseGrid(nx=64, lx=1.0, nv=4, vmax=2.0)
    background = -(1.0 + 0.3 * np.cos(np.pi * grid.x))
    species = (SpeciesParams(label="c", z=1.0, kappa=1.0, zeta=1.0),)
    problem = PnpProblem(grid=grid, species=species, varpi=1.0,
                         background=background)
    total = -background.sum() * grid.dx
    n = np.full((1, grid.nx), total / grid.lx)
    for _ in range(200):
        field = solve_poisson(n, [1.0], background, 1.0, grid)
        weight = np.exp(-field.phi)
        n = (total * weight / (weight.sum() * grid.dx))[None]
    field = solve_poisson(n, [1.0], background, 1.0, grid)
    return problem, n, field


class TestEquilibria:
    def test_boltzmann_profile_has_no_flux(self, boltzmann_equilibrium):
        problem, n, field = boltzmann_equilibrium
        flux = sg_flux(n[0], field.phi, problem.species[0], 1.0, problem.grid)
        assert np.abs(flux).max() <= 1e-12

    def test_boltzmann_profile_is_a_fixed_point(self, boltzmann_equilibrium):
        problem, n, _ = boltzmann_equilibrium
        n_next, _ = pnp_step(n.copy(), problem, problem.auto_dt())
        assert np.abs(n_next - n).max() <= 1e-12

    def test_boltzmann_profile_stops_dissipating(self, boltzmann_equilibrium):
        problem, n, field = boltzmann_equilibrium
        _, dissipation = pnp_energy(n, field, problem)
        assert 0.0 <= dissipation <= 1e-20

    def test_uniform_neutral_state(self):
        problem = salt_problem()
        n = np.ones((2, 16))
        field = solve_poisson(n, [1.0, -1.0], problem.background, 1.0,
                              problem.grid)
        energy, dissipation = pnp_energy(n, field, problem)
        assert energy == 0.0
        assert dissipation == 0.0
        n_next, _ = pnp_step(n.copy(), problem, problem.auto_dt())
        assert np.abs(n_next - n).max() <= 1e-14


class TestHeatLimit:
    def test_cosine_mode_decays_at_the_diffusive_rate(self):
        # With z = 0 the system is a pure heat equation; the first
        # insulated cosine mode decays like exp(-pi^2 D t).
        nx = 128
        grid = PhaseGrid(nx=nx, lx=1.0, nv=4, vmax=2.0)
        species = (SpeciesParams(label="n", z=0.0, kappa=1.0, zeta=1.0),)
        problem = PnpProblem(grid=grid, species=species, varpi=1.0,
                             background=np.zeros(nx))
        n0 = (1.0 + 0.1 * np.cos(np.pi * grid.x))[None]
        res = run_pnp(problem, n0, T=0.1, n_samples=2)
        mode = np.cos(np.pi * grid.x)
        amp = 2.0 * (res.final[0] * mode).sum() * grid.dx
        exact = 0.1 * np.exp(-np.pi**2 * 0.1)
        assert amp == pytest.approx(exact, rel=1e-2)


@pytest.fixture(scope="module")
def relax():
    problem = salt_problem()
    x = problem.grid.x
    n0 = np.stack([1.0 + 0.2 * np.cos(np.pi * x),
                   1.0 - 0.2 * np.cos(np.pi * x)])
    return problem, run_pnp(problem, n0, T=0.2, n_samples=4)


class TestRelaxation:
    def test_energy_never_increases(self, relax):
        _, res = relax
        energies = [r.energy for r in res.records]
        assert max(np.diff(energies)) <= 1e-8 * max(1.0, abs(energies[0]))

    def test_dissipation_nonnegative_and_decaying(self, relax):
        _, res = relax
        dis = [r.dissipation for r in res.records]
        assert min(dis) >= 0.0
        assert dis[-1] < 0.05 * dis[0]

    def test_mass_and_neutrality_conserved(self, relax):
        _, res = relax
        mass0 = np.asarray(res.records[0].mass)
        assert max(np.abs(np.asarray(r.mass) - mass0).max()
                   for r in res.records) <= 1e-13
        assert max(abs(r.neutrality) for r in res.records) <= 1e-13

    def test_densities_stay_positive(self, relax):
        _, res = relax
        assert min(np.min(r.nmin) for r in res.records) > 0.0

    def test_samples_land_on_uniform_times(self, relax):
        _, res = relax
        assert len(res.samples) == 5
        for k, snap in enumerate(res.samples):
            assert snap.t == pytest.approx(k * 0.05, abs=1e-14)
        assert res.t == 0.2


class TestGuards:
    def test_overlong_step_rejected(self):
        problem = salt_problem()
        n = np.ones((2, 16))
        with pytest.raises(ValueError, match="lagged-coupling bound"):
            pnp_step(n, problem, problem.max_dt() * 1.01)

    def test_negative_initial_density_rejected(self):
        problem = salt_problem()
        n0 = -np.ones((2, 16))
        with pytest.raises(ValueError, match="nonnegative"):
            run_pnp(problem, n0, T=0.01)

    def test_wrong_shape_rejected(self):
        problem = salt_problem()
        with pytest.raises(ValueError, match="shape"):
            run_pnp(problem, np.ones((1, 16)), T=0.01)
