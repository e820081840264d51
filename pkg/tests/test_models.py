import json

import numpy as np
import pytest
from pydantic import ValidationError

from singflow.exceptions import NonFiniteState
from singflow.helpers import chunk_by_length, handle_and_convert_numerical_errors
from singflow.models import SingModel, default_encoder
from singflow.types import FloatArray, PointArray


class Sample(SingModel):
    name: str
    values: FloatArray
    points: PointArray = np.zeros((0, 2))

    @property
    def total(self) -> float:
        return float(np.sum(self.values))


class TestSingModel:
    def setup_method(self):
        self.sample = Sample(name='p', values=[1.0, 2.0], points=[[0.0, 1.0]])

    def test_array_fields(self):
        assert isinstance(self.sample.values, np.ndarray)
        assert self.sample.values.dtype == float
        assert self.sample.points.shape == (1, 2)

    def test_empty_points(self):
        assert Sample(name='e', values=[], points=[]).points.shape == (0, 2)

    def test_properties_in_dict(self):
        data = self.sample.dict()
        assert data['total'] == 3.0
        assert 'total' not in self.sample.dict(with_props=False)
        assert set(self.sample.serialize(['name', 'total'])) == {'name', 'total'}

    def test_json_data(self):
        data = json.loads(self.sample.json_data())
        assert data['values'] == [1.0, 2.0]
        assert data['points'] == [[0.0, 1.0]]
        assert data['total'] == 3.0

    def test_validate_assignment(self):
        with pytest.raises(ValidationError):
            self.sample.values = [1.0, np.inf]

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValidationError):
            Sample(name='b', values=[1.0], points=[1.0, 2.0, 3.0])
        with pytest.raises(ValidationError):
            Sample(name='b', values='abc')

    def test_default_encoder(self):
        assert default_encoder(np.float64(1.5)) == 1.5
        assert default_encoder(np.arange(2)) == [0, 1]
        assert default_encoder(self.sample)['name'] == 'p'
        with pytest.raises(TypeError):
            default_encoder(object())


class TestHelpers:
    def test_chunk_by_length(self):
        assert list(chunk_by_length([1, 2, 3, 4, 5], 2)) == [[1, 2], [3, 4], [5]]

    def test_overflow_is_converted(self):
        @handle_and_convert_numerical_errors
        def blow_up(x):
            return np.exp(np.asarray(x)) * 1e308

        with pytest.raises(NonFiniteState):
            blow_up(1000.0)

    def test_generators_are_wrapped(self):
        @handle_and_convert_numerical_errors
        def ratios(values):
            for v in values:
                yield np.float64(1.0) / np.float64(v)

        gen = ratios([1.0, 0.0])
        assert next(gen) == 1.0
        with pytest.raises(NonFiniteState):
            next(gen)

    def test_wrapped_name(self):
        @handle_and_convert_numerical_errors
        def solver():
            return 1

        assert solver.__name__ == 'solver'
        assert solver() == 1
