"""Grids, dimensionless groups, and velocity moments."""

import numpy as np
import pytest

from vpfplab.fokker_planck import build_maxwellians
from vpfplab.grid import (KineticState, PhaseGrid, PhysicalScales,
                          SpeciesParams, SpeciesPhysical, check_neutrality,
                          current, default_vmax, density, derive_scales,
                          second_moment)


def make_scales(**overrides):
    base = dict(m_ref=1.0, tau_ref=1.0, theta_ref=1.0, q=1.0, epsilon0=1.0,
                thermal_energy=1.0, L=1.0, N0=1.0, Phi0=1.0,
                species=(SpeciesPhysical(label="a", z=1, m=1.0, tau=1.0),))
    base.update(overrides)
    return PhysicalScales(**base)


class TestDeriveScales:
    def test_mass_ratio_half(self):
        scales = make_scales(
            species=(SpeciesPhysical(label="heavy", z=1, m=2.0, tau=1.0),))
        _, _, _, params = derive_scales(scales)
        assert params[0].kappa == 0.5

    def test_equal_relaxation_time_gives_unit_zeta(self):
        scales = make_scales(
            species=(SpeciesPhysical(label="a", z=1, m=1.0, tau=1.0),))
        _, _, _, params = derive_scales(scales)
        assert params[0].zeta == 1.0

    def test_epsilon_from_reference_quantities(self):
        # epsilon = tau_ref * sqrt(theta_ref) / L = 1 * 1 / 10
        scales = make_scales(L=10.0)
        epsilon, _, _, _ = derive_scales(scales)
        assert epsilon == pytest.approx(0.1, abs=1e-15)

    def test_varpi_and_nu(self):
        scales = make_scales(epsilon0=2.0, Phi0=3.0, q=1.5, N0=2.0, L=2.0)
        _, nu, varpi, _ = derive_scales(scales)
        assert varpi == pytest.approx(2.0 * 3.0 / (1.5 * 2.0 * 4.0))
        u_ref = 1.0 * (1.5 / 1.0) * (3.0 / 2.0)
        assert nu == pytest.approx(1.0 / u_ref)

    def test_mass_rescaling_leaves_kappa_unchanged(self):
        for factor in (0.5, 3.0, 17.0):
            scaled = make_scales(
                m_ref=factor,
                species=(SpeciesPhysical(label="a", z=1, m=2.0 * factor,
                                         tau=1.0),))
            _, _, _, params = derive_scales(scaled)
            assert params[0].kappa == pytest.approx(0.5, rel=1e-15)

    def test_nonpositive_input_rejected_by_name(self):
        with pytest.raises(ValueError, match="tau_ref"):
            make_scales(tau_ref=0.0)
        with pytest.raises(ValueError, match="m"):
            make_scales(species=(SpeciesPhysical(label="a", z=1, m=-1.0,
                                                 tau=1.0),))


class TestSpeciesParams:
    def test_positivity_enforced(self):
        with pytest.raises(ValueError, match="kappa"):
            SpeciesParams(label="a", z=1.0, kappa=0.0, zeta=1.0)
        with pytest.raises(ValueError, match="zeta"):
            SpeciesParams(label="a", z=1.0, kappa=1.0, zeta=-2.0)

    def test_default_vmax_tracks_widest_species(self):
        species = (SpeciesParams(label="a", z=1.0, kappa=1.0, zeta=1.0),
                   SpeciesParams(label="b", z=-1.0, kappa=4.0, zeta=1.0))
        assert default_vmax(species) == pytest.approx(16.0)


class TestPhaseGrid:
    def test_spacings_and_measures(self):
        grid = PhaseGrid(nx=10, lx=2.0, nv=16, vmax=4.0)
        assert grid.dx == pytest.approx(0.2)
        assert grid.dv == pytest.approx(0.5)
        assert grid.x.size * grid.dx == pytest.approx(grid.lx)
        assert grid.v.size * grid.dv == pytest.approx(2.0 * grid.vmax)

    def test_velocity_grid_is_bitwise_symmetric(self):
        grid = PhaseGrid(nx=4, lx=1.0, nv=32, vmax=7.0)
        assert np.array_equal(grid.v, -grid.v[::-1])
        assert np.array_equal(grid.v_faces, -grid.v_faces[::-1])
        assert grid.v_faces[0] == -grid.vmax
        assert grid.v_faces[-1] == grid.vmax
        assert grid.v_faces.size == grid.nv + 1

    def test_no_cell_straddles_zero(self):
        grid = PhaseGrid(nx=4, lx=1.0, nv=8, vmax=2.0)
        assert np.all(np.abs(grid.v) >= grid.dv / 2.0 - 1e-15)

    def test_invalid_arguments_rejected(self):
        with pytest.raises(ValueError, match="even"):
            PhaseGrid(nx=4, lx=1.0, nv=7, vmax=2.0)
        with pytest.raises(ValueError, match="nx"):
            PhaseGrid(nx=1, lx=1.0, nv=8, vmax=2.0)
        with pytest.raises(ValueError, match="lx"):
            PhaseGrid(nx=4, lx=0.0, nv=8, vmax=2.0)


def small_state(f, epsilon=1.0, kappa=1.0):
    grid = PhaseGrid(nx=f.shape[1], lx=1.0, nv=f.shape[2], vmax=8.0)
    species = tuple(SpeciesParams(label=f"s{i}", z=1.0, kappa=kappa, zeta=1.0)
                    for i in range(f.shape[0]))
    return KineticState(grid, species, f, 0.0, epsilon)


class TestMoments:
    def test_density_of_scaled_maxwellian(self):
        grid = PhaseGrid(nx=5, lx=1.0, nv=64, vmax=8.0)
        species = (SpeciesParams(label="a", z=1.0, kappa=1.0, zeta=1.0),)
        maxw = build_maxwellians(species, grid)
        f = 2.0 * np.tile(maxw.m_tilde[0], (grid.nx, 1))[None]
        state = KineticState(grid, species, f, 0.0, 1.0)
        assert np.abs(density(state, 0) - 2.0).max() < 1e-8

    def test_density_of_zero_and_indicator(self):
        f = np.zeros((1, 3, 8))
        state = small_state(f)
        assert np.all(density(state, 0) == 0.0)
        f[0, 1, 5] = 1.0
        assert density(state, 0)[1] == pytest.approx(state.grid.dv)

    def test_current_vanishes_for_even_distributions(self):
        grid = PhaseGrid(nx=4, lx=1.0, nv=32, vmax=8.0)
        f = np.exp(-grid.v**2)[None, None, :] * np.ones((1, grid.nx, 1))
        state = small_state(f)
        assert np.abs(current(state, 0)).max() < 1e-16

    def test_current_of_shifted_maxwellian_matches_quadrature(self):
        grid = PhaseGrid(nx=3, lx=1.0, nv=64, vmax=8.0)
        species = (SpeciesParams(label="a", z=1.0, kappa=1.0, zeta=1.0),)
        maxw = build_maxwellians(species, grid)
        shifted = np.roll(maxw.m_tilde[0], 1)
        shifted[0] = 0.0
        f = np.tile(shifted, (grid.nx, 1))[None]
        eps = 0.25
        state = KineticState(grid, species, f, 0.0, eps)
        expected = sum(v * fv * grid.dv for v, fv in zip(grid.v, shifted)) / eps
        assert current(state, 0)[0] == pytest.approx(expected, rel=1e-13)

    def test_current_scales_inversely_with_epsilon(self):
        rng = np.random.default_rng(3)
        f = rng.uniform(0.0, 1.0, size=(1, 4, 16))
        state = small_state(f, epsilon=0.5)
        j1 = current(state, 0)
        j2 = current(state, 0, epsilon=1.0)
        np.testing.assert_allclose(2.0 * j2, j1, rtol=1e-15)

    def test_moments_are_linear_in_f(self):
        rng = np.random.default_rng(7)
        fa = rng.uniform(0.0, 1.0, size=(1, 4, 16))
        fb = rng.uniform(0.0, 1.0, size=(1, 4, 16))
        combined = small_state(2.0 * fa + 3.0 * fb)
        parts = 2.0 * density(small_state(fa), 0) + 3.0 * density(small_state(fb), 0)
        np.testing.assert_allclose(density(combined, 0), parts, rtol=1e-13)

    def test_second_moment_of_equilibrium_is_kappa(self):
        grid = PhaseGrid(nx=2, lx=1.0, nv=128, vmax=12.0)
        species = (SpeciesParams(label="a", z=1.0, kappa=2.0, zeta=1.0),)
        maxw = build_maxwellians(species, grid)
        f = np.tile(maxw.m_tilde[0], (grid.nx, 1))[None]
        state = KineticState(grid, species, f, 0.0, 1.0)
        assert second_moment(state, 0) == pytest.approx(2.0, abs=1e-6)


class TestNeutrality:
    def test_opposite_species_cancel(self):
        n = np.ones((2, 8))
        assert check_neutrality(n, [1.0, -1.0], np.zeros(8), 0.125) == 0.0

    def test_background_balances_single_species(self):
        nx, lx = 16, 1.0
        dx = lx / nx
        n = np.full((1, nx), 3.0)          # total mass 3
        background = np.full(nx, -3.0 / lx)
        assert abs(check_neutrality(n, [1.0], background, dx)) < 1e-12

    def test_unbalanced_charge_is_positive(self):
        n = np.ones((1, 8))
        assert check_neutrality(n, [1.0], np.zeros(8), 0.125) > 0.0


class TestKineticState:
    def test_shape_mismatch_rejected(self):
        grid = PhaseGrid(nx=4, lx=1.0, nv=8, vmax=2.0)
        species = (SpeciesParams(label="a", z=1.0, kappa=1.0, zeta=1.0),)
        with pytest.raises(ValueError, match="shape"):
            KineticState(grid, species, np.zeros((1, 4, 6)), 0.0, 1.0)
        with pytest.raises(ValueError, match="epsilon"):
            KineticState(grid, species, np.zeros((1, 4, 8)), 0.0, 0.0)

    def test_copy_is_independent(self):
        grid = PhaseGrid(nx=4, lx=1.0, nv=8, vmax=2.0)
        species = (SpeciesParams(label="a", z=1.0, kappa=1.0, zeta=1.0),)
        state = KineticState(grid, species, np.ones((1, 4, 8)), 0.0, 1.0)
        other = state.copy()
        other.f[0, 0, 0] = 7.0
        assert state.f[0, 0, 0] == 1.0
