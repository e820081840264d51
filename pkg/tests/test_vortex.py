import numpy as np
import pytest
from pydantic import ValidationError

from singflow import vortex
from singflow.exceptions import DegenerateSpec, InvalidArgument, NotNMS
from singflow.vortex import BlobCloud2D, SheetSpec


def _pair(g1, g2, d=1.0, delta=0.1):
    return BlobCloud2D(
        positions=[[-0.5 * d, 0.0], [0.5 * d, 0.0]], circulations=[g1, g2], delta=delta
    )


def _random_cloud(n=20, seed=7, delta=0.1):
    rng = np.random.default_rng(seed)
    return BlobCloud2D(
        positions=rng.uniform(-1.0, 1.0, (n, 2)), circulations=rng.uniform(0.5, 1.5, n) / n, delta=delta
    )


def _flat_sheet():
    return SheetSpec(
        curve=lambda s: np.column_stack([2.0 * s - 1.0, np.zeros_like(s)]),
        strength=lambda s: np.sqrt(np.clip(1.0 - (2.0 * s - 1.0) ** 2, 0.0, None)),
    )


def _half_sheet():
    return SheetSpec(
        curve=lambda s: np.column_stack([0.05 + 0.9 * s, np.zeros_like(s)]),
        strength=lambda s: np.ones_like(s),
        sign_pattern='nms',
    )


class TestBlobCloud:
    def test_validation(self):
        with pytest.raises(ValidationError):
            BlobCloud2D(positions=[[0.0, 0.0]], circulations=[1.0, 2.0], delta=0.1)
        with pytest.raises(ValidationError):
            BlobCloud2D(positions=[[0.0, 0.0]], circulations=[1.0], delta=0.0)
        with pytest.raises(ValidationError):
            BlobCloud2D(positions=[[1.0, 0.0]], circulations=[1.0], delta=0.1, mirrored=True)

    def test_empty_cloud(self):
        cloud = BlobCloud2D(positions=[], circulations=[], delta=0.1)
        assert cloud.size == 0
        assert vortex.velocity_field(cloud, [[0.0, 0.0]]) == pytest.approx(np.zeros((1, 2)))

    def test_to_series(self):
        series = _pair(1.0, 2.0).to_series()
        assert series.columns == ('x1', 'x2', 'gamma')
        assert series['gamma'] == pytest.approx([1.0, 2.0])

    def test_total_variation(self):
        assert _pair(1.0, -2.0).total_variation == pytest.approx(3.0)


class TestKernel:
    def test_regular_at_origin(self):
        assert vortex.kernel2d(np.zeros(2), 0.1) == pytest.approx(np.zeros(2))

    def test_odd(self):
        x = np.array([[0.3, -0.2], [-0.3, 0.2]])
        k = vortex.kernel2d(x, 0.1)
        assert k[0] == pytest.approx(-k[1])

    def test_smoothed_magnitude(self):
        k = vortex.kernel2d(np.array([1.0, 0.0]), 0.5)
        assert k == pytest.approx([0.0, 1.0 / (2.0 * np.pi * 1.25)])

    def test_velocity_of_single_blob(self):
        cloud = BlobCloud2D(positions=[[0.0, 0.0]], circulations=[2.0], delta=0.1)
        u = vortex.velocity_field(cloud, [1.0, 0.0])
        assert u[0] == pytest.approx([0.0, 2.0 / (2.0 * np.pi * 1.01)])

    def test_no_self_induction(self):
        cloud = BlobCloud2D(positions=[[0.3, 0.4]], circulations=[1.0], delta=0.1)
        assert vortex.velocity_field(cloud, cloud.positions) == pytest.approx(np.zeros((1, 2)))


class TestTwoBody:
    def test_corotating_period(self):
        d, gamma, delta = 1.0, 1.0, 0.1
        period = 2.0 * np.pi * np.pi * (d * d + delta * delta) / gamma
        cloud = _pair(gamma, gamma, d, delta)
        n = 2000
        for _ in range(n):
            cloud = vortex.step(cloud, period / n)
        assert cloud.positions == pytest.approx(_pair(gamma, gamma, d, delta).positions, abs=1e-3 * d)

    def test_corotating_quarter_turn(self):
        d, gamma, delta = 1.0, 1.0, 0.1
        period = 2.0 * np.pi * np.pi * (d * d + delta * delta) / gamma
        cloud = _pair(gamma, gamma, d, delta)
        for _ in range(500):
            cloud = vortex.step(cloud, 0.25 * period / 500)
        assert cloud.positions == pytest.approx(np.array([[0.0, -0.5], [0.0, 0.5]]), abs=1e-6)

    def test_opposite_pair_translation(self):
        d, gamma, delta = 1.0, 1.0, 1e-3
        cloud = _pair(gamma, -gamma, d, delta)
        u = vortex.velocity_field(cloud, cloud.positions)
        smoothed = gamma * d / (2.0 * np.pi * (d * d + delta * delta))
        assert u[:, 1] == pytest.approx(np.full(2, smoothed))
        assert abs(u[0, 1] / (gamma / (2.0 * np.pi * d)) - 1.0) < 5e-3

    def test_time_reversal(self):
        cloud = _random_cloud()
        forward = vortex.step(cloud, 0.01)
        back = vortex.step(forward, -0.01)
        assert back.positions == pytest.approx(cloud.positions, abs=1e-10)
        assert back.t == pytest.approx(0.0, abs=1e-15)


class TestSheets:
    def test_flat_sheet_circulation(self):
        cloud = vortex.build_sheet(_flat_sheet(), 200, 0.1)
        assert cloud.size == 200
        assert not cloud.mirrored
        assert np.sum(cloud.circulations) == pytest.approx(0.5 * np.pi, rel=5e-3)

    def test_mirror_sheet(self):
        cloud = vortex.build_sheet(_half_sheet(), 50, 0.05)
        assert cloud.mirrored
        assert cloud.size == 100
        assert abs(np.sum(cloud.circulations)) <= 1e-12
        assert vortex.mirror_symmetry_error(cloud) == 0.0
        assert vortex.check_mirror_symmetry(cloud)

    def test_perturbation_atoms(self):
        spec = _half_sheet().copy(
            update={
                'perturbation_positions': np.array([[0.5, 0.2]]),
                'perturbation_circulations': np.array([0.01]),
            }
        )
        cloud = vortex.build_sheet(spec, 10, 0.05)
        assert cloud.size == 22

    def test_too_few_atoms(self):
        with pytest.raises(InvalidArgument):
            vortex.build_sheet(_flat_sheet(), 1, 0.1)

    def test_degenerate_curve(self):
        spec = SheetSpec(curve=lambda s: np.zeros((s.size, 2)), strength=lambda s: np.ones_like(s))
        with pytest.raises(DegenerateSpec):
            vortex.build_sheet(spec, 10, 0.1)

    def test_nms_rejects_left_half(self):
        spec = _flat_sheet().copy(update={'sign_pattern': 'nms'})
        with pytest.raises(NotNMS):
            vortex.build_sheet(spec, 10, 0.1)

    def test_perturbation_shapes(self):
        with pytest.raises(ValidationError):
            SheetSpec(
                curve=lambda s: s,
                strength=lambda s: s,
                perturbation_positions=np.zeros((2, 2)),
                perturbation_circulations=np.zeros(3),
            )


class TestMirror:
    def setup_method(self):
        self.half = BlobCloud2D(positions=[[0.5, 0.0], [0.2, 0.3]], circulations=[1.0, 0.5], delta=0.1)

    def test_symmetrize(self):
        cloud = vortex.mirror_symmetrize(self.half)
        assert cloud.positions[2:] == pytest.approx(self.half.positions * [-1.0, 1.0])
        assert cloud.circulations[2:] == pytest.approx(-self.half.circulations)

    def test_rejects(self):
        with pytest.raises(NotNMS):
            vortex.mirror_symmetrize(vortex.mirror_symmetrize(self.half))
        with pytest.raises(NotNMS):
            vortex.mirror_symmetrize(self.half.copy(update={'circulations': np.array([1.0, -0.5])}))
        with pytest.raises(NotNMS):
            vortex.mirror_symmetrize(self.half.copy(update={'positions': np.array([[0.0, 0.0], [0.2, 0.3]])}))

    def test_error_of_asymmetric_cloud(self):
        assert vortex.mirror_symmetry_error(self.half) > 0.0
        odd = BlobCloud2D(positions=[[0.5, 0.0]], circulations=[1.0], delta=0.1)
        assert vortex.mirror_symmetry_error(odd) == float('inf')

    def test_axis_velocity_cancels(self):
        cloud = vortex.mirror_symmetrize(self.half)
        axis = np.column_stack([np.zeros(5), np.linspace(-1.0, 1.0, 5)])
        u = vortex.velocity_field(cloud, axis)
        assert np.all(u[:, 0] == 0.0)

    def test_symmetry_kept_exactly(self):
        cloud = vortex.mirror_symmetrize(self.half)
        _, series = vortex.run_cloud(cloud, 0.01, 50, every=10)
        assert 'symmetry_error' in series.columns
        assert np.all(series['symmetry_error'] == 0.0)
        assert np.all(np.abs(series['circulation']) <= 1e-12)


class TestFunctionals:
    def test_concentration_single_atom(self):
        cloud = BlobCloud2D(positions=[[0.3, -0.2]], circulations=[-2.0], delta=0.1)
        report = vortex.concentration_sup(cloud, 0.1)
        assert report.sup_mass == pytest.approx(2.0)
        assert report.arg_center == pytest.approx((0.3, -0.2))

    def test_concentration_nesting(self):
        cloud = vortex.build_sheet(_flat_sheet(), 100, 0.1)
        masses = [vortex.concentration_sup(cloud, r, 0.025).sup_mass for r in (0.2, 0.1, 0.05)]
        assert np.all(np.diff(masses) <= 0.0)
        assert masses[0] <= cloud.total_variation

    def test_concentration_arguments(self):
        cloud = _pair(1.0, 1.0)
        with pytest.raises(InvalidArgument):
            vortex.concentration_sup(cloud, 0.0)
        with pytest.raises(InvalidArgument):
            vortex.concentration_sup(cloud, 0.1, sweep_spacing=0.1)

    def test_local_energy_of_single_blob(self):
        gamma, delta, R = 1.0, 0.1, 1.0
        cloud = BlobCloud2D(positions=[[0.0, 0.0]], circulations=[gamma], delta=delta)
        exact = gamma ** 2 / (4.0 * np.pi) * (
            np.log((R * R + delta * delta) / (delta * delta)) + delta * delta / (R * R + delta * delta) - 1.0
        )
        assert vortex.local_energy(cloud, R, n_radial=64) == pytest.approx(exact, rel=1e-4)

    def test_local_energy_arguments(self):
        with pytest.raises(InvalidArgument):
            vortex.local_energy(_pair(1.0, 1.0), 0.0)
        empty = BlobCloud2D(positions=[], circulations=[], delta=0.1)
        assert vortex.local_energy(empty, 1.0) == 0.0

    def test_invariants(self):
        rec = vortex.invariants2d(_pair(1.0, 2.0, d=2.0, delta=1.0))
        assert rec.circulation == pytest.approx(3.0)
        assert rec.impulse == pytest.approx((1.0, 0.0))
        assert rec.angular_impulse == pytest.approx(3.0)
        assert rec.hamiltonian == pytest.approx(-2.0 * np.log(5.0) / (4.0 * np.pi))


class TestRuns:
    def test_conservation(self):
        _, series = vortex.run_cloud(_random_cloud(), 0.01, 200, every=20)
        assert len(series) == 11
        assert np.ptp(series['circulation']) == 0.0
        for column in ('impulse_x', 'impulse_y', 'angular_impulse'):
            values = series[column]
            assert np.max(np.abs(values - values[0])) <= 1e-10 * abs(values[0]) * 200 + 1e-14
        h = series['hamiltonian']
        assert np.max(np.abs(h - h[0])) <= 1e-6 * abs(h[0])

    def test_negative_steps(self):
        with pytest.raises(InvalidArgument):
            vortex.run_cloud(_random_cloud(), 0.01, -1)

    def test_approximation_sequence(self):
        series = vortex.approximation_sequence(
            _half_sheet(), 20, [0.2, 0.1], dt=0.01, t_end=0.05, ball_radius=0.1, R=1.5
        )
        assert series['delta'] == pytest.approx([0.2, 0.1])
        assert np.all(np.abs(series['circulation']) <= 1e-12)
        assert np.all(series['sup_fraction'] <= 1.0)
        assert np.all(series['local_energy'] > 0.0)
