from abc import ABC
from typing import TYPE_CHECKING, Any, Callable

import numpy as np

from .exceptions import InvalidArgument

if TYPE_CHECKING:
    from .series import DiagnosticSeries


__all__ = (
    'Max',
    'Min',
    'AbsMax',
    'First',
    'Last',
    'Spread',
    'RelativeDrift',
    'MaxIncrement',
    'Ratio',
    'Count',
)


class BasicDefaultReduction(ABC):
    """Abstract reduction of one series column to a scalar"""

    _operation: Any = None

    def __init__(self, field: str):
        self.field = field

    @property
    def operation(self) -> Callable:
        if self._operation is None:
            raise NotImplementedError('implement _operation')
        return self._operation

    @property
    def label(self) -> str:
        return f'{self.field}__{type(self).__name__.lower()}'

    def _validate_field(self, series: 'DiagnosticSeries'):
        if self.field not in series.columns:
            raise InvalidArgument(
                f'invalid field "{self.field}" for series {series.name}, field must be one of {list(series.columns)}'
            )

    def _values(self, series: 'DiagnosticSeries') -> np.ndarray:
        self._validate_field(series)
        values = series[self.field]
        if values.size == 0:
            raise InvalidArgument(f'series {series.name} is empty')
        return values

    def reduce(self, series: 'DiagnosticSeries') -> float:
        return float(self.operation(self._values(series)))


class Max(BasicDefaultReduction):
    _operation: Any = staticmethod(np.max)


class Min(BasicDefaultReduction):
    _operation: Any = staticmethod(np.min)


class AbsMax(BasicDefaultReduction):
    _operation: Any = staticmethod(lambda v: np.max(np.abs(v)))


class First(BasicDefaultReduction):
    _operation: Any = staticmethod(lambda v: v[0])


class Last(BasicDefaultReduction):
    _operation: Any = staticmethod(lambda v: v[-1])


class Spread(BasicDefaultReduction):
    _operation: Any = staticmethod(np.ptp)


def _relative_drift(v: np.ndarray) -> float:
    scale = abs(v[0]) if v[0] != 0.0 else 1.0
    return float(np.max(np.abs(v - v[0])) / scale)


class RelativeDrift(BasicDefaultReduction):
    """max |v - v[0]| / |v[0]|, absolute when v[0] == 0"""

    _operation: Any = staticmethod(_relative_drift)


class MaxIncrement(BasicDefaultReduction):
    """largest step between consecutive rows; <= 0 means non-increasing"""

    _operation: Any = staticmethod(lambda v: np.max(np.diff(v)) if v.size > 1 else 0.0)


class Count(BasicDefaultReduction):
    _operation: Any = staticmethod(len)

    def _values(self, series: 'DiagnosticSeries') -> np.ndarray:
        self._validate_field(series)
        return series[self.field]


class Ratio(BasicDefaultReduction):
    """numerator reduction over denominator reduction, e.g. Ratio(Last('x'), First('x'))"""

    def __init__(self, numerator: BasicDefaultReduction, denominator: BasicDefaultReduction):
        self.numerator = numerator
        self.denominator = denominator
        self.field = numerator.field

    @property
    def label(self) -> str:
        return f'{self.numerator.label}__over__{self.denominator.label}'

    def reduce(self, series: 'DiagnosticSeries') -> float:
        den = self.denominator.reduce(series)
        if den == 0.0:
            raise InvalidArgument(f'{self.label}: zero denominator')
        return self.numerator.reduce(series) / den
