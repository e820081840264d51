import numpy as np
import pytest

from singflow.exceptions import InvalidArgument
from singflow.reductions import (
    AbsMax,
    Count,
    First,
    Last,
    Max,
    MaxIncrement,
    Min,
    Ratio,
    RelativeDrift,
    Spread,
)
from singflow.series import DiagnosticSeries


class TestReductions:
    def setup_method(self):
        self.series = DiagnosticSeries(
            'history', ('t', 'value'), [(0.0, 2.0), (1.0, -3.0), (2.0, 1.0), (3.0, 2.5)]
        )

    def test_simple_reductions(self):
        assert Max('value').reduce(self.series) == 2.5
        assert Min('value').reduce(self.series) == -3.0
        assert AbsMax('value').reduce(self.series) == 3.0
        assert First('value').reduce(self.series) == 2.0
        assert Last('value').reduce(self.series) == 2.5
        assert Spread('value').reduce(self.series) == 5.5
        assert Count('t').reduce(self.series) == 4

    def test_relative_drift(self):
        assert RelativeDrift('value').reduce(self.series) == pytest.approx(2.5)
        zero = DiagnosticSeries('z', ('v',), [(0.0,), (0.1,), (-0.2,)])
        assert RelativeDrift('v').reduce(zero) == pytest.approx(0.2)

    def test_max_increment(self):
        assert MaxIncrement('value').reduce(self.series) == pytest.approx(4.0)
        assert MaxIncrement('t').reduce(self.series) == pytest.approx(1.0)
        single = DiagnosticSeries('one', ('v',), [(4.0,)])
        assert MaxIncrement('v').reduce(single) == 0.0

    def test_ratio(self):
        ratio = Ratio(Last('value'), First('value'))
        assert ratio.reduce(self.series) == pytest.approx(1.25)
        assert ratio.label == 'value__last__over__value__first'

    def test_ratio_zero_denominator(self):
        series = DiagnosticSeries('s', ('v',), [(0.0,), (1.0,)])
        with pytest.raises(InvalidArgument):
            Ratio(Last('v'), First('v')).reduce(series)

    def test_labels(self):
        assert Max('value').label == 'value__max'
        assert AbsMax('value').label == 'value__absmax'

    def test_unknown_field(self):
        with pytest.raises(InvalidArgument):
            Max('missing').reduce(self.series)

    def test_empty_series(self):
        empty = DiagnosticSeries('empty', ('v',))
        with pytest.raises(InvalidArgument):
            Max('v').reduce(empty)
        assert Count('v').reduce(empty) == 0

    def test_non_finite_values_pass_through(self):
        series = DiagnosticSeries('nan', ('v',), [(1.0,), (np.nan,)])
        assert np.isnan(Max('v').reduce(series))
