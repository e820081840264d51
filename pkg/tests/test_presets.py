import numpy as np
import pytest

from singflow.exceptions import InvalidArgument, UnknownPreset
from singflow.presets import Assertion, PresetOutput, get_preset, list_presets
from singflow.reductions import Last, Max
from singflow.series import DiagnosticSeries

PRESETS = [
    'blasius-steady',
    'blob-conservation',
    'conical-perturbed',
    'conical-selfsimilar',
    'prandtl-adverse',
    'prandtl-favorable',
    'ring-leapfrog',
    'ring-single',
    'sheet-mirror',
    'sheet-one-sign',
    'sheet-sequence',
]


class TestRegistry:
    def test_list_presets(self):
        assert list_presets() == PRESETS

    def test_unknown_preset(self):
        with pytest.raises(UnknownPreset) as exc:
            get_preset('warp-drive')
        assert 'warp-drive' in str(exc.value)
        assert exc.value.presets == PRESETS

    def test_descriptions(self):
        for name in PRESETS:
            preset = get_preset(name)
            assert preset.name == name
            assert preset.description


class TestEffectiveParams:
    def setup_method(self):
        self.preset = get_preset('blob-conservation')

    def test_defaults(self):
        params = self.preset.effective_params()
        assert params == self.preset.defaults
        assert params is not self.preset.defaults

    def test_overrides_are_cast(self):
        params = self.preset.effective_params({'atoms': 20.0, 'delta': 1})
        assert params['atoms'] == 20
        assert isinstance(params['atoms'], int)
        assert isinstance(params['delta'], float)

    def test_list_overrides(self):
        params = get_preset('sheet-sequence').effective_params({'deltas': (0.3, 0.2)})
        assert params['deltas'] == [0.3, 0.2]

    def test_unknown_keys(self):
        with pytest.raises(InvalidArgument):
            self.preset.effective_params({'atomz': 10})


class TestAssertion:
    def setup_method(self):
        self.outputs = {'h': DiagnosticSeries('h', ('t', 'e'), [(0.0, 1.0), (1.0, 0.5)])}

    def test_pass_and_fail(self):
        passed = Assertion('small', 'h', Max('e'), '<=', 1.0).evaluate(self.outputs)
        assert passed.passed
        assert passed.value == 1.0
        failed = Assertion('strict', 'h', Max('e'), '<', 1.0).evaluate(self.outputs)
        assert not failed.passed

    def test_non_finite_value_fails(self):
        outputs = {'h': DiagnosticSeries('h', ('e',), [(np.nan,)])}
        result = Assertion('nan', 'h', Last('e'), '<=', 1.0).evaluate(outputs)
        assert not result.passed
        inf = {'h': DiagnosticSeries('h', ('e',), [(-np.inf,)])}
        assert not Assertion('inf', 'h', Last('e'), '<=', 1.0).evaluate(inf).passed

    def test_unknown_comparator(self):
        with pytest.raises(InvalidArgument):
            Assertion('eq', 'h', Max('e'), '==', 1.0)

    def test_output_evaluates_all(self):
        output = PresetOutput(
            self.outputs,
            [Assertion('a', 'h', Max('e'), '<=', 1.0), Assertion('b', 'h', Last('e'), '>', 0.6)],
        )
        assert [r.passed for r in output.evaluate()] == [True, False]


class TestCheapRuns:
    def test_blob_conservation(self):
        preset = get_preset('blob-conservation')
        params = preset.effective_params({'atoms': 12, 'steps': 20, 'every': 5})
        output = preset.run(params, seed=3)
        assert len(output.series['invariants']) == 5
        assert all(r.passed for r in output.evaluate())

    def test_seed_is_reproducible(self):
        preset = get_preset('blob-conservation')
        params = preset.effective_params({'atoms': 8, 'steps': 4, 'every': 2})
        a = preset.run(params, seed=11).series['invariants']
        b = preset.run(params, seed=11).series['invariants']
        c = preset.run(params, seed=12).series['invariants']
        assert list(a) == list(b)
        assert list(a) != list(c)

    def test_ring_leapfrog(self):
        preset = get_preset('ring-leapfrog')
        output = preset.run(preset.effective_params({'steps': 50, 'every': 10}))
        assert output.series['order'].columns == ('t', 'r0', 'z0', 'r1', 'z1')
        assert len(output.series['passes']) == 0
        failed = [r.name for r in output.evaluate() if not r.passed]
        assert failed == ['rings leapfrog']

    def test_prandtl_favorable_bounds_every_lipschitz_maximum(self):
        preset = get_preset('prandtl-favorable')
        output = preset.run(preset.effective_params({'nx': 21, 'ny': 81, 'T': 0.2}))
        results = {r.name: r for r in output.evaluate()}
        for axis in ('dx', 'dy', 'dt'):
            assert results[f'{axis} Lipschitz bound'].series == 'lipschitz'
        assert 'lipschitz_growth' not in output.series['history'].meta
