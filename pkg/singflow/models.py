import json
from typing import Any, Dict, List, Tuple, Union

import numpy as np
from pydantic import BaseModel as BasePydanticModel

__all__ = ('SingModel', 'default_encoder')


def _encode_array(value: np.ndarray) -> list:
    return value.tolist()


class SingModel(BasePydanticModel):
    """Base for every domain type: numpy-aware, validated on assignment, properties included in dumps."""

    class Config:
        arbitrary_types_allowed = True
        validate_assignment = True
        json_encoders = {
            np.ndarray: _encode_array,
            np.floating: float,
            np.integer: int,
            np.bool_: bool,
        }

    @classmethod
    def _get_properties(cls) -> list:
        return [
            prop
            for prop in dir(cls)
            if not prop.startswith('_')
            and prop != 'data'
            and isinstance(getattr(cls, prop, None), property)
        ]

    def dict(self, *args, with_props: bool = True, **kwargs) -> Dict[str, Any]:  # type: ignore
        data = super().dict(*args, **kwargs)
        if with_props:
            include = kwargs.get('include')
            exclude = kwargs.get('exclude') or ()
            for prop in self._get_properties():
                if (include is None or prop in include) and prop not in exclude:
                    data[prop] = getattr(self, prop)
        return data

    @property
    def data(self) -> Dict[str, Any]:
        return self.dict()

    def serialize(self, fields: Union[Tuple, List]) -> dict:
        data = self.dict(include=set(fields))
        return {f: data[f] for f in fields}

    def json_data(self) -> str:
        return json.dumps(self.data, default=default_encoder)


def default_encoder(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, BasePydanticModel):
        return value.dict()
    raise TypeError(f'{type(value).__name__} is not JSON serializable')
