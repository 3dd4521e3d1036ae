"""Duhamel stepper, trajectories, the FD oracle, and cross-validation."""

import numpy as np
import pytest

from axivort import mild_solver as ms
from axivort import semigroup as sg
from axivort.fields import (
    HalfPlaneGrid,
    ScalarField,
    VortexMeasure,
    eta_to_omega,
    norm_2d,
    norm_3d,
    omega_to_eta,
)

from conftest import gaussian_ring


class TestDuhamelStep:
    def test_zero_stays_zero(self, grid):
        z = ScalarField(grid, np.zeros((grid.n_r, grid.n_z)))
        out = ms.duhamel_step(z, 0.2, ms.SolverConfig(dt=0.2))
        assert np.all(out.values == 0.0)

    def test_nonlinear_disabled_is_linear_flow(self, ring):
        cfg = ms.SolverConfig(dt=0.2, include_nonlinear=False)
        out = ms.duhamel_step(ring, 0.2, cfg)
        lin = sg.apply(0.2, ring)
        assert np.array_equal(out.values, lin.values)

    def test_small_ring_contracts_quickly(self, grid):
        f = gaussian_ring(grid, l1_mass=0.1)
        info = {}
        cfg = ms.SolverConfig(dt=0.2, picard_tol=1e-10)
        ms.duhamel_step(f, 0.2, cfg, info=info)
        assert info["iterations"] <= 5
        res = info["residuals"]
        # geometric decrease of successive increments
        assert all(r2 < 0.1 * r1 for r1, r2 in zip(res, res[1:]))

    def test_step_failure_carries_residual(self, grid):
        f = gaussian_ring(grid, l1_mass=300.0)
        cfg = ms.SolverConfig(dt=0.5, picard_max_iter=3, picard_tol=1e-14)
        with pytest.raises(ms.StepFailure) as err:
            ms.duhamel_step(f, 0.5, cfg)
        assert err.value.residual > 0

    def test_odd_parity_preserved_by_nonlinear_step(self, grid):
        # data odd in z keeps its parity under the full dynamics (even data
        # does not: a one-signed ring propels itself along the axis)
        f = grid.sample(
            lambda r, z: 0.05 * z * np.exp(-((r - 2.0) ** 2 + z ** 2) / 0.5)
        )
        out = ms.duhamel_step(f, 0.2, ms.SolverConfig(dt=0.2))
        asym = np.abs(out.values + out.values[:, ::-1]).max()
        assert asym <= 1e-13 * max(1.0, np.abs(out.values).max())

    def test_even_parity_preserved_by_linear_flow(self, grid):
        f = gaussian_ring(grid, l1_mass=0.5)  # even in z
        out = sg.apply(0.5, f)
        assert np.abs(out.values - out.values[:, ::-1]).max() <= 1e-15


class TestEvolve:
    def test_l1_monotone_and_impulse_drift(self):
        grid = HalfPlaneGrid(64, 128)
        f = gaussian_ring(grid, l1_mass=0.1)
        traj = ms.evolve(f, 2.0, ms.SolverConfig(dt=0.2))
        l1 = [rec.l1_2d for rec in traj.records]
        assert all(b < a for a, b in zip(l1, l1[1:]))
        imp = [rec.impulse for rec in traj.records]
        assert max(abs(i / imp[0] - 1.0) for i in imp) <= 5e-3
        tsu = [rec.time ** 0.5 * rec.u_sup for rec in traj.records]
        assert np.isfinite(tsu).all()

    def test_snapshot_schedule(self, grid):
        f = gaussian_ring(grid, l1_mass=0.1)
        traj = ms.evolve(f, 1.0, ms.SolverConfig(dt=0.25), snapshot_times=[0.5, 1.0])
        times = [t for t, _ in traj.snapshots]
        assert times[0] == 0.0
        assert any(abs(t - 0.5) < 1e-9 for t in times)
        assert abs(times[-1] - 1.0) < 1e-9

    def test_measure_data_mollified_first(self):
        grid = HalfPlaneGrid(64, 128, 6.0, 6.0)
        m = VortexMeasure(atoms=((2.0, 0.0, 0.05),))
        traj = ms.evolve(m, 0.5, ms.SolverConfig(dt=0.1), grid=grid)
        assert traj.records[0].time == pytest.approx(0.1)
        assert traj.records[-1].time == pytest.approx(0.5)
        assert all(np.isfinite(rec.l1_2d) for rec in traj.records)

    def test_large_atom_warns(self):
        grid = HalfPlaneGrid(32, 64, 6.0, 6.0)
        m = VortexMeasure(atoms=((2.0, 0.0, 5.0),))
        with pytest.warns(UserWarning):
            ms.evolve(m, 0.2, ms.SolverConfig(dt=0.1, picard_max_iter=40,
                                              picard_tol=1e-8), grid=grid)

    def test_xt_norm_history_recorded(self, grid):
        f = gaussian_ring(grid, l1_mass=0.1)
        traj = ms.evolve(f, 0.6, ms.SolverConfig(dt=0.2))
        assert len(traj.xt_norm_history) == 3
        assert all(v > 0 for _, v in traj.xt_norm_history)


class TestFDOracle:
    def test_linear_limit_matches_semigroup(self):
        grid = HalfPlaneGrid(64, 128)
        ring = gaussian_ring(grid, l1_mass=0.5)
        fd = ms.fd_eta_solve(
            omega_to_eta(ring), 1.0, ms.FDConfig(include_advection=False),
            snapshot_times=[1.0],
        )
        mine = eta_to_omega(fd.field_at(1.0, tol=1e-6))
        exact = sg.apply(1.0, ring)
        gap = norm_2d(mine - exact, 1) / norm_2d(ring, 1)
        assert gap <= 2e-3  # O(h^2 + dt)

    def test_positivity_preserved(self, grid):
        eta0 = omega_to_eta(gaussian_ring(grid, l1_mass=0.5))
        fd = ms.fd_eta_solve(eta0, 0.3, snapshot_times=[0.3])
        assert fd.field_at(0.3, tol=1e-6).values.min() >= 0.0

    def test_explicit_dt_validated(self, grid):
        eta0 = omega_to_eta(gaussian_ring(grid, l1_mass=0.5))
        with pytest.raises(ValueError):
            ms.fd_eta_solve(eta0, 0.5, ms.FDConfig(dt=1.0))

    def test_eta_sup_decay_single_constant(self):
        grid = HalfPlaneGrid(48, 96)
        ring = gaussian_ring(grid, l1_mass=0.5)
        eta0 = omega_to_eta(ring)
        den = norm_3d(eta0, 1)
        fd = ms.fd_eta_solve(eta0, 2.0, snapshot_times=[0.5, 1.0, 2.0])
        ratios = [
            t ** 1.5 * norm_3d(fd.field_at(t, tol=1e-6), np.inf) / den
            for t in (0.5, 1.0, 2.0)
        ]
        assert max(ratios) < 5.0

    def test_requires_eta_tag(self, ring):
        with pytest.raises(ValueError):
            ms.fd_eta_solve(ring, 0.1)

    def test_heun_runs(self, grid):
        eta0 = omega_to_eta(gaussian_ring(grid, l1_mass=0.2))
        fd = ms.fd_eta_solve(eta0, 0.1, ms.FDConfig(stepper="heun"))
        assert np.isfinite(fd.snapshots[-1][1].values).all()


class TestCrossValidate:
    def test_report_structure_and_agreement(self):
        grid = HalfPlaneGrid(64, 128)
        f = gaussian_ring(grid, l1_mass=0.1)
        rep = ms.cross_validate(f, 1.0, ms.SolverConfig(dt=0.1), times=[0.5, 1.0])
        assert rep["times"] == [0.5, 1.0]
        assert rep["l1_rel"][-1] <= 0.02

    def test_linear_reduction_gap_is_pure_discretization(self):
        # with both nonlinear terms disabled the reported gap must equal the
        # directly computed distance between the two linear flows
        grid = HalfPlaneGrid(48, 96)
        f = gaussian_ring(grid, l1_mass=0.1)
        cfg = ms.SolverConfig(dt=0.5, include_nonlinear=False)
        fd_cfg = ms.FDConfig(include_advection=False)
        rep = ms.cross_validate(f, 0.5, cfg, fd_cfg, times=[0.5])
        lin = sg.apply(0.5, f)
        fd = ms.fd_eta_solve(omega_to_eta(f), 0.5, fd_cfg, snapshot_times=[0.5])
        direct = norm_2d(lin - eta_to_omega(fd.field_at(0.5, tol=1e-6)), 1) / norm_2d(lin, 1)
        assert rep["l1_rel"][0] == pytest.approx(direct, rel=1e-10)


class TestPicardHorizon:
    def test_increments_decrease_geometrically(self):
        grid = HalfPlaneGrid(48, 96)
        f = gaussian_ring(grid, l1_mass=0.1)
        traj, increments = ms.picard_horizon(f, 1.0, ms.SolverConfig(picard_max_iter=6))
        assert len(increments) >= 2
        assert increments[1] < 0.2 * increments[0]
        assert all(v > 0 for _, v in traj.xt_norm_history)


class TestConfigs:
    def test_solver_config_validation(self):
        with pytest.raises(ValueError):
            ms.SolverConfig(dt=0.0)
        with pytest.raises(ValueError):
            ms.SolverConfig(picard_tol=-1.0)
        with pytest.raises(ValueError):
            ms.FDConfig(stepper="rk4")

    def test_trajectory_lookup_errors(self):
        traj = ms.Trajectory()
        with pytest.raises(KeyError):
            traj.field_at(1.0)
