from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .exceptions import ShapeError

__all__ = ('DiagnosticSeries',)


class DiagnosticSeries(object):
    """Ordered table of diagnostic records keyed by its first column (time or station)."""

    def __init__(
        self,
        name: str,
        columns: Sequence[str],
        rows: Optional[Iterable[Sequence[float]]] = None,
        meta: Optional[Dict[str, Any]] = None,
    ):
        self.name = name
        self.columns = tuple(columns)
        self._rows: List[Tuple[float, ...]] = []
        self.meta: Dict[str, Any] = dict(meta or {})
        if rows is not None:
            self.extend(rows)

    def append(self, *values: float) -> None:
        if len(values) != len(self.columns):
            raise ShapeError(
                f'{self.name}: expected {len(self.columns)} values, got {len(values)}'
            )
        self._rows.append(tuple(float(v) for v in values))

    def extend(self, rows: Iterable[Sequence[float]]) -> None:
        for row in rows:
            self.append(*row)

    def __len__(self) -> int:
        return len(self._rows)

    def __iter__(self):
        for row in self._rows:
            yield dict(zip(self.columns, row))

    def __getitem__(self, column: str) -> np.ndarray:
        try:
            idx = self.columns.index(column)
        except ValueError:
            raise KeyError(f'invalid column - {column}, expected one of {list(self.columns)}')
        return np.array([row[idx] for row in self._rows], dtype=float)

    @property
    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self._rows, columns=list(self.columns))

    def first(self) -> Dict[str, float]:
        return next(self.__iter__())

    def last(self) -> Dict[str, float]:
        return dict(zip(self.columns, self._rows[-1]))

    def to_csv(self, path: Union[str, Path], float_format: str = '%.12e') -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.frame.to_csv(path, index=False, float_format=float_format, lineterminator='\n')
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path], name: Optional[str] = None) -> 'DiagnosticSeries':
        path = Path(path)
        frame = pd.read_csv(path)
        return cls(name or path.stem, list(frame.columns), frame.to_numpy(dtype=float).tolist())

    @property
    def schema(self) -> Dict[str, Any]:
        return {'name': self.name, 'columns': list(self.columns), 'rows': len(self)}
