"""Experiment-level checks at reduced resolution; each runs in seconds."""
import numpy as np
import pytest

from singflow import prandtl, vortex
from singflow.harness import compare_runs, run_preset
from singflow.presets import get_preset


def _march(cfg, dt):
    state = prandtl.initial_state(cfg)
    for _ in range(int(round(cfg.T / dt))):
        state = prandtl.advance(state, cfg, dt)
    return state.u


class TestSplitting:
    def test_first_order_in_time(self):
        cfg = prandtl.blasius_steady_config(nx=21, ny=81, T=0.2, dt=0.01)
        u1, u2, u4 = (_march(cfg, dt) for dt in (0.01, 0.005, 0.0025))
        ratio = np.max(np.abs(u1 - u2)) / np.max(np.abs(u2 - u4))
        assert ratio >= 1.8

    def test_favorable_layer_persists(self):
        cfg = prandtl.favorable_config(nx=41, ny=161, T=1.0, dt=0.005)
        run = prandtl.run_boundary_layer(cfg, n_outputs=10)
        assert run.report.passed
        assert np.min(run.history['min_shear']) > 0.0


class TestPrandtlPresets:
    @pytest.mark.parametrize('name', ['prandtl-favorable', 'prandtl-adverse', 'blasius-steady'])
    def test_runs_at_defaults(self, name):
        record = run_preset(name, write=False)
        assert record.failure is None
        assert record.passed, record.failed_assertions

    def test_adverse_separates(self):
        output = get_preset('prandtl-adverse').run(get_preset('prandtl-adverse').effective_params())
        history = output.series['history']
        assert np.min(history['trailing_shear_ratio']) < 0.5
        assert np.max(history['u_max']) <= 1.0 + 1.5 * 0.5 + 1e-12


class TestVortexExperiments:
    def test_corotating_pair_period(self):
        d, delta, gamma = 1.0, 0.1, 1.0
        cloud = vortex.BlobCloud2D(
            positions=[[-0.5 * d, 0.0], [0.5 * d, 0.0]], circulations=[gamma, gamma], delta=delta
        )
        period = 2.0 * np.pi * np.pi * (d * d + delta * delta) / gamma
        n = 2000
        snapshots, _ = vortex.run_cloud(cloud, period / n, n, every=n)
        assert snapshots[-1].positions == pytest.approx(cloud.positions, abs=1e-6)

    def test_sheet_mirror_preset(self):
        record = run_preset('sheet-mirror', {'n': 50, 'T': 0.2}, write=False)
        assert record.failure is None
        assert record.passed, record.failed_assertions


class TestRingExperiments:
    def test_ring_single_preset(self):
        record = run_preset('ring-single', {'steps': 100}, write=False)
        assert record.passed, record.failed_assertions

    def test_leapfrog_passes(self):
        output = get_preset('ring-leapfrog').run(get_preset('ring-leapfrog').effective_params())
        assert len(output.series['passes']) >= 1
        assert all(r.passed for r in output.evaluate())


class TestReproducibility:
    def test_byte_identical_series(self, tmp_path):
        overrides = {'n': 40, 'T': 0.05}
        a = run_preset('sheet-mirror', overrides, seed=4, output_dir=str(tmp_path / 'a'))
        b = run_preset('sheet-mirror', overrides, seed=4, output_dir=str(tmp_path / 'b'))
        assert set(a.outputs) == set(b.outputs)
        for key in a.outputs:
            with open(a.outputs[key], 'rb') as fa, open(b.outputs[key], 'rb') as fb:
                assert fa.read() == fb.read(), key
        assert compare_runs(a, b, rtol=0.0).within_tolerance
