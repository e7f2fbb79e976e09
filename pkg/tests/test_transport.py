"""Phase-space sweeps and wall interaction."""

import numpy as np
import pytest

from vpfplab.fokker_planck import build_maxwellians
from vpfplab.grid import PhaseGrid, SpeciesParams
from vpfplab.transport import (apply_diffuse_reflection,
                               apply_specular_reflection,
                               build_wall_quadrature, courant_x,
                               transport_v_step, transport_x_step, wall_flux)


def make_grid(nx=8, nv=16, vmax=4.0):
    return PhaseGrid(nx=nx, lx=1.0, nv=nv, vmax=vmax)


def safe_dt(grid, eps=1.0):
    return 0.9 * eps * grid.dx / grid.vmax


SP = SpeciesParams(label="a", z=1.0, kappa=1.0, zeta=1.0)


class TestSpatialSweep:
    def test_courant_is_signed_and_linear_in_dt(self):
        grid = make_grid()
        c = courant_x(0.01, 0.5, grid)
        np.testing.assert_allclose(c, grid.v * 0.01 / (0.5 * grid.dx),
                                   rtol=1e-15)
        assert c[0] < 0.0 < c[-1]

    def test_uniform_state_unchanged_away_from_inflow(self):
        grid = make_grid()
        dt = safe_dt(grid)
        f = np.full((grid.nx, grid.nv), 2.0)
        out, _, _ = transport_x_step(f.copy(), dt, 1.0, grid)
        pos = grid.v > 0
        assert np.array_equal(out[1:, pos], f[1:, pos])
        assert np.array_equal(out[:-1, ~pos], f[:-1, ~pos])
        # Inflow rows drain by exactly the Courant fraction (vacuum inflow).
        c = courant_x(dt, 1.0, grid)
        np.testing.assert_allclose(out[0, pos], (1.0 - c[pos]) * 2.0,
                                   rtol=1e-14)
        np.testing.assert_allclose(out[-1, ~pos], (1.0 + c[~pos]) * 2.0,
                                   rtol=1e-14)

    def test_single_cell_pulse_splits_upwind(self):
        grid = make_grid()
        dt = safe_dt(grid)
        k = grid.nv - 2                    # a positive velocity column
        f = np.zeros((grid.nx, grid.nv))
        f[3, k] = 1.0
        out, _, _ = transport_x_step(f.copy(), dt, 1.0, grid)
        c = courant_x(dt, 1.0, grid)[k]
        assert out[3, k] == pytest.approx(1.0 - c, rel=1e-15)
        assert out[4, k] == pytest.approx(c, rel=1e-15)
        assert out[:, k].sum() == pytest.approx(1.0, rel=1e-15)

    def test_mass_balance_against_wall_traces(self):
        rng = np.random.default_rng(1)
        grid = make_grid()
        eps = 0.5
        dt = safe_dt(grid, eps)
        f = rng.uniform(0.0, 1.0, size=(grid.nx, grid.nv))
        out, tl, tr = transport_x_step(f.copy(), dt, eps, grid)
        pos = grid.v > 0
        outflux = ((np.abs(grid.v[~pos]) * tl[~pos]).sum()
                   + (grid.v[pos] * tr[pos]).sum()) * grid.dv
        deficit = (f.sum() - out.sum()) * grid.cell_measure
        assert deficit == pytest.approx(dt / eps * outflux, rel=1e-13)

    def test_traces_are_the_upwind_wall_rows(self):
        rng = np.random.default_rng(2)
        grid = make_grid()
        f = rng.uniform(0.0, 1.0, size=(grid.nx, grid.nv))
        _, tl, tr = transport_x_step(f.copy(), safe_dt(grid), 1.0, grid)
        assert np.array_equal(tl, f[0])
        assert np.array_equal(tr, f[-1])

    def test_positivity_under_cfl(self):
        rng = np.random.default_rng(3)
        grid = make_grid()
        f = rng.uniform(0.0, 3.0, size=(grid.nx, grid.nv))
        out, _, _ = transport_x_step(f.copy(), safe_dt(grid), 1.0, grid)
        assert out.min() >= 0.0

    def test_cfl_violation_raises(self):
        grid = make_grid()
        dt = 1.1 * grid.dx / grid.vmax
        with pytest.raises(ValueError, match="x-sweep Courant"):
            transport_x_step(np.ones((grid.nx, grid.nv)), dt, 1.0, grid)


class TestVelocitySweep:
    def test_zero_field_is_bitwise_identity(self):
        rng = np.random.default_rng(4)
        grid = make_grid()
        f = rng.uniform(0.0, 1.0, size=(grid.nx, grid.nv))
        out = transport_v_step(f.copy(), np.zeros(grid.nx), 0.01, SP, 1.0,
                               grid)
        assert np.array_equal(out, f)

    def test_mass_conserved_per_column(self):
        rng = np.random.default_rng(4)
        grid = make_grid()
        f = rng.uniform(0.0, 1.0, size=(grid.nx, grid.nv))
        e_cell = np.array([0.8, -0.5, 0.3, 0.1, -0.9, 0.4, 0.0, 0.6])
        out = transport_v_step(f.copy(), e_cell, 0.4 * grid.dv, SP, 1.0, grid)
        assert np.abs(out.sum(axis=1) - f.sum(axis=1)).max() <= 1e-14
        assert out.min() >= 0.0

    def test_ends_are_closed(self):
        grid = make_grid()
        f = np.zeros((grid.nx, grid.nv))
        f[:, -1] = 1.0
        out = transport_v_step(f.copy(), np.ones(grid.nx), 0.4 * grid.dv, SP,
                               1.0, grid)
        # Accelerating the topmost cell further cannot push mass out.
        np.testing.assert_array_equal(out[:, -1], 1.0)

    def test_mean_velocity_advances_by_field_increment(self):
        grid = PhaseGrid(nx=4, lx=1.0, nv=128, vmax=10.0)
        sp = SpeciesParams(label="a", z=1.0, kappa=1.3, zeta=1.0)
        maxw = build_maxwellians((sp,), grid)
        f = np.tile(maxw.m_tilde[0], (grid.nx, 1))
        e_value, eps, dt = 0.37, 1.0, 0.01
        out = transport_v_step(f.copy(), np.full(grid.nx, e_value), dt, sp,
                               eps, grid)
        shift = ((grid.v * out[0]).sum() / out[0].sum()
                 - (grid.v * f[0]).sum() / f[0].sum())
        assert shift == pytest.approx(sp.kappa * sp.z / eps * e_value * dt,
                                      rel=1e-12)

    def test_charge_mirror_symmetry(self):
        # Flipping the sign of z and reversing velocity is a symmetry of
        # the sweep; deviations are pure roundoff.
        rng = np.random.default_rng(6)
        grid = make_grid(nv=32)
        base = rng.uniform(0.0, 1.0, size=(grid.nx, grid.nv))
        f_even = 0.5 * (base + base[:, ::-1])
        plus = SpeciesParams(label="p", z=1.0, kappa=1.0, zeta=1.0)
        minus = SpeciesParams(label="m", z=-1.0, kappa=1.0, zeta=1.0)
        e_cell = np.full(grid.nx, 0.37)
        dt = 0.01
        out_p = transport_v_step(f_even.copy(), e_cell, dt, plus, 0.5, grid)
        out_m = transport_v_step(f_even.copy(), e_cell, dt, minus, 0.5, grid)
        assert np.abs(out_p - out_m[:, ::-1]).max() <= 1e-14

    def test_cfl_violation_raises(self):
        grid = make_grid()
        dt = 3.0 * grid.dv
        with pytest.raises(ValueError, match="v-sweep Courant"):
            transport_v_step(np.ones((grid.nx, grid.nv)),
                             np.ones(grid.nx), dt, SP, 1.0, grid)


@pytest.fixture(scope="module")
def wall_setup():
    grid = PhaseGrid(nx=4, lx=1.0, nv=16, vmax=4.0)
    sp = SpeciesParams(label="a", z=1.0, kappa=1.7, zeta=1.0)
    maxw = build_maxwellians((sp,), grid)
    return grid, sp, maxw, build_wall_quadrature(0, maxw, grid)


class TestWallQuadrature:
    def test_slices_partition_the_velocity_grid(self, wall_setup):
        grid, _, _, wq = wall_setup
        half = grid.nv // 2
        assert wq["left"].out_slice == slice(0, half)
        assert wq["left"].in_slice == slice(half, grid.nv)
        assert wq["right"].out_slice == slice(half, grid.nv)
        assert wq["right"].in_slice == slice(0, half)

    def test_normalization_is_the_half_range_flux(self, wall_setup):
        grid, _, maxw, wq = wall_setup
        for w in wq.values():
            expected = (w.v_in_abs * w.m_in).sum() * grid.dv
            assert w.phi_norm == pytest.approx(expected, rel=1e-14)
            assert w.phi_norm > 0.0


class TestDiffuseReflection:
    def test_detailed_balance_at_the_wall_equilibrium(self, wall_setup):
        grid, _, maxw, wq = wall_setup
        for w in wq.values():
            t_out = 2.3 * maxw.m_tilde[0][w.out_slice]
            reemitted = apply_diffuse_reflection(t_out, w)
            dev = np.abs(reemitted - 2.3 * maxw.m_tilde[0][w.in_slice]).max()
            assert dev <= 1e-15
            assert wall_flux(t_out, reemitted, w, 0.5, grid) == 0.0

    def test_zero_trace_reemits_nothing(self, wall_setup):
        grid, _, _, wq = wall_setup
        w = wq["left"]
        half = grid.nv // 2
        assert np.all(apply_diffuse_reflection(np.zeros(half), w) == 0.0)
        assert wall_flux(np.zeros(half), np.zeros(half), w, 1.0, grid) == 0.0

    def test_flux_cancels_for_arbitrary_traces(self, wall_setup):
        grid, _, _, wq = wall_setup
        rng = np.random.default_rng(99)
        half = grid.nv // 2
        for trial in range(200):
            w = wq["left"] if trial % 2 else wq["right"]
            t_out = rng.uniform(0.0, 3.0, size=half)
            reemitted = apply_diffuse_reflection(t_out, w)
            assert reemitted.min() >= 0.0
            flux = wall_flux(t_out, reemitted, w, 1.0, grid)
            outflux = (w.v_out_abs * t_out).sum() * grid.dv
            assert abs(flux) <= 1e-14 * max(outflux, 1.0)

    def test_strictly_positive_reemission(self, wall_setup):
        grid, _, _, wq = wall_setup
        t_out = np.full(grid.nv // 2, 0.2)
        assert apply_diffuse_reflection(t_out, wq["left"]).min() > 0.0


class TestSpecularReflection:
    def test_reverses_the_trace(self, wall_setup):
        _, _, _, wq = wall_setup
        t_out = np.arange(1.0, 9.0)
        out = apply_specular_reflection(t_out, wq["left"])
        assert np.array_equal(out, t_out[::-1])

    def test_flux_is_exactly_zero(self, wall_setup):
        grid, _, _, wq = wall_setup
        rng = np.random.default_rng(7)
        for w in wq.values():
            t_out = rng.uniform(0.0, 2.0, size=grid.nv // 2)
            reemitted = apply_specular_reflection(t_out, w)
            assert wall_flux(t_out, reemitted, w, 0.25, grid) == 0.0
