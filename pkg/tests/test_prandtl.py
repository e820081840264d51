import numpy as np
import pytest
from pydantic import ValidationError

from singflow import prandtl
from singflow.exceptions import InvalidArgument, StepTooLarge, UpwindBreakdown
from singflow.prandtl import BLState


def _small(factory=prandtl.favorable_config, **kwargs):
    params = dict(nx=21, ny=81, T=0.2, dt=0.005)
    params.update(kwargs)
    return factory(**params)


def _couette(cfg):
    x, y = cfg.x, cfg.y
    u = np.tile(y / cfg.y_max, (x.size, 1))
    return BLState(
        t=0.0, x=x, y=y, u=u, v=np.zeros_like(u), px=np.zeros(x.size), U=np.ones(x.size)
    )


class TestBlasius:
    def setup_method(self):
        self.profile = prandtl.blasius_profile()

    def test_wall_slope(self):
        assert self.profile.wall_slope == pytest.approx(0.332057, abs=1e-5)

    def test_displacement(self):
        assert self.profile.displacement == pytest.approx(prandtl.BLASIUS_DISPLACEMENT, abs=1e-3)

    def test_velocity_saturates(self):
        eta = np.linspace(0.0, 20.0, 201)
        fp = prandtl.blasius_velocity(self.profile, eta)
        assert fp[0] == 0.0
        assert fp[-1] == 1.0
        assert np.all(np.diff(fp) >= 0.0)

    def test_too_coarse(self):
        with pytest.raises(InvalidArgument):
            prandtl.blasius_profile(ny=50)


class TestDataChecks:
    def test_favorable_passes(self):
        report = prandtl.validate_data(_small())
        assert report.passed
        assert report.failed == []

    def test_adverse_flags_pressure_gradient(self):
        report = prandtl.validate_data(_small(prandtl.adverse_config))
        assert report.failed == ['px<=0']
        assert report.offending['px<=0']

    def test_negative_initial_data(self):
        cfg = _small().copy(update={'u0': lambda x, y: np.full((x.size, y.size), -1.0)})
        report = prandtl.validate_data(cfg)
        assert not report.checks['u0>0']
        assert not report.passed

    def test_pressure_gradient_of_retarded_flow(self):
        x = np.linspace(0.0, 1.0, 11)
        px = prandtl.pressure_gradient(lambda x, t: 1.0 - 0.5 * x, x, 0.0)
        assert px == pytest.approx(0.5 * (1.0 - 0.5 * x))

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            _small(nx=2)
        with pytest.raises(ValidationError):
            _small(dt=0.0)


class TestSubsteps:
    def setup_method(self):
        self.cfg = _small(y_max=1.0, nx=11, ny=21)
        self.state = _couette(self.cfg)

    def test_initial_state_boundaries(self):
        state = prandtl.initial_state(self.cfg)
        assert state.u[:, 0] == pytest.approx(np.zeros(self.cfg.nx))
        assert state.u[:, -1] == pytest.approx(state.U)

    def test_continuity(self):
        state = prandtl.initial_state(self.cfg)
        assert prandtl.continuity_residual(state, self.cfg) < 1e-10

    def test_linear_profile_is_steady_under_diffusion(self):
        new = prandtl.diffusion_substep(self.state, self.cfg, 0.1)
        assert new.u == pytest.approx(self.state.u, abs=1e-12)

    def test_diffusion_smooths(self):
        u = self.state.u.copy()
        u[:, 10] += 0.1
        bumped = self.state.copy(update={'u': u})
        new = prandtl.diffusion_substep(bumped, self.cfg, 0.01)
        assert new.u[5, 10] < u[5, 10]
        assert new.u[:, 0] == pytest.approx(np.zeros(self.cfg.nx))

    def test_negative_dt(self):
        with pytest.raises(InvalidArgument):
            prandtl.diffusion_substep(self.state, self.cfg, -0.1)

    def test_transport_of_parallel_flow(self):
        new = prandtl.transport_substep(self.state, self.cfg, 0.01)
        assert new.t == pytest.approx(0.01)
        assert new.u[1:] == pytest.approx(self.state.u[1:], abs=1e-12)
        assert new.u[0] == pytest.approx(self.cfg.u1(self.cfg.y, 0.01))

    def test_step_too_large(self):
        with pytest.raises(StepTooLarge) as exc:
            prandtl.transport_substep(self.state, self.cfg, 1.0)
        assert exc.value.courant > 1.0

    def test_reverse_flow(self):
        u = self.state.u.copy()
        u[5, 3] = -0.01
        with pytest.raises(UpwindBreakdown) as exc:
            prandtl.transport_substep(self.state.copy(update={'u': u}), self.cfg, 0.01)
        assert exc.value.x == pytest.approx(self.cfg.x[5])
        assert exc.value.y == pytest.approx(self.cfg.y[3])


class TestDiagnostics:
    def setup_method(self):
        self.cfg = _small(y_max=1.0, nx=11, ny=21)
        self.state = _couette(self.cfg)

    def test_wall_shear(self):
        assert prandtl.wall_shear(self.state) == pytest.approx(np.ones(self.cfg.nx))

    def test_min_shear(self):
        assert prandtl.min_shear(self.state) == pytest.approx(1.0)

    def test_displacement_thickness(self):
        assert prandtl.displacement_thickness(self.state) == pytest.approx(np.full(self.cfg.nx, 0.5))

    def test_lipschitz_needs_two_states(self):
        with pytest.raises(InvalidArgument):
            prandtl.lipschitz_diagnostics([self.state])

    def test_lipschitz_of_static_flow(self):
        later = self.state.copy(update={'t': 1.0})
        series = prandtl.lipschitz_diagnostics([self.state, later])
        row = series.first()
        assert row['dx_sup'] == 0.0
        assert row['dy_sup'] == pytest.approx(1.0 / (self.cfg.ny - 1) / self.cfg.dy)
        assert row['dt_sup'] == 0.0


class TestRuns:
    def test_favorable_keeps_shear(self):
        run = prandtl.run_boundary_layer(_small())
        assert not run.separated
        assert run.report.passed
        assert np.min(run.history['min_shear']) > 0.0
        assert np.min(run.history['trailing_shear_ratio']) >= 0.8
        assert run.final.t == pytest.approx(0.2)
        assert len(run.lipschitz) >= 1

    def test_adverse_runs_with_flagged_data(self):
        run = prandtl.run_boundary_layer(_small(prandtl.adverse_config))
        assert not run.report.checks['px<=0']
        assert np.all(np.diff(run.history['t']) > 0.0)
        assert run.history['trailing_shear_ratio'][-1] < 1.0

    def test_wall_shear_series_layout(self):
        run = prandtl.run_boundary_layer(_small(T=0.05))
        assert run.wall_shear.columns == ('t', 'x', 'wall_shear')
        assert len(run.wall_shear) == len(run.history) * 21

    def test_adverse_trailing_shear_halves(self):
        run = prandtl.run_boundary_layer(_small(prandtl.adverse_config, ny=161, T=0.3))
        assert np.min(run.history['trailing_shear_ratio']) < 0.5

    def test_maximum_principle(self):
        for factory in (prandtl.favorable_config, prandtl.adverse_config):
            cfg = _small(factory)
            run = prandtl.run_boundary_layer(cfg)
            px = prandtl.pressure_gradient(cfg.U, cfg.x, 0.0)
            bound = np.max(cfg.U(cfg.x, 0.0)) + cfg.T * np.max(np.abs(px))
            assert np.max(run.history['u_max']) <= bound + 1e-12
        assert np.min(prandtl.run_boundary_layer(_small()).history['u_min']) >= 0.0


class TestAdaptiveStep:
    def setup_method(self):
        self.cfg = _small(dt=0.1, T=0.3)

    def test_stable_dt(self):
        state = prandtl.initial_state(self.cfg)
        limit = prandtl.stable_dt(state, self.cfg)
        rate = np.max(state.u) / self.cfg.dx + np.max(np.abs(state.v)) / self.cfg.dy
        assert limit == pytest.approx(self.cfg.cfl / rate)
        assert limit < self.cfg.dt

    def test_oversized_step_is_split(self):
        state = prandtl.advance(prandtl.initial_state(self.cfg), self.cfg)
        assert state.t == pytest.approx(0.1)
        with pytest.raises(StepTooLarge):
            prandtl.transport_substep(prandtl.initial_state(self.cfg), self.cfg, 0.1)

    def test_run_reaches_horizon(self):
        run = prandtl.run_boundary_layer(self.cfg)
        assert run.final.t == pytest.approx(0.3)
        assert np.min(run.history['min_shear']) > 0.0

    def test_cfl_bounds(self):
        cfg = self.cfg.copy()
        with pytest.raises(ValidationError):
            cfg.cfl = 1.5
        with pytest.raises(InvalidArgument):
            prandtl.advance(prandtl.initial_state(self.cfg), self.cfg, 0.0)


class TestBlasiusSteadyData:
    def setup_method(self):
        self.cfg = _small(prandtl.blasius_steady_config)

    def test_inflow_matches_initial_data(self):
        y = self.cfg.y
        u0 = self.cfg.u0(self.cfg.x, y)
        assert self.cfg.u1(y, 0.0) == pytest.approx(u0[0], abs=1e-14)

    def test_inflow_reaches_blasius(self):
        favorable = _small()
        y = self.cfg.y
        assert self.cfg.u1(y, 1.0) == pytest.approx(favorable.u1(y, 1.0), abs=1e-14)
        assert self.cfg.u1(y, 5.0) == pytest.approx(favorable.u1(y, 5.0), abs=1e-14)

    def test_data_and_first_step(self):
        assert prandtl.validate_data(self.cfg).passed
        state = prandtl.initial_state(self.cfg)
        assert prandtl.stable_dt(state, self.cfg) > self.cfg.dt
        assert prandtl.advance(state, self.cfg).t == pytest.approx(self.cfg.dt)

    def test_negative_ramp(self):
        with pytest.raises(InvalidArgument):
            prandtl.blasius_steady_config(ramp=-1.0)
