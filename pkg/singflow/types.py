import numpy as np

__all__ = ('FloatArray', 'PointArray')


class FloatArray(np.ndarray):
    """Field for float64 arrays with finite entries"""

    @classmethod
    def __get_validators__(cls):
        yield cls.validate

    @classmethod
    def validate(cls, v) -> np.ndarray:
        try:
            arr = np.ascontiguousarray(v, dtype=float)
        except (TypeError, ValueError):
            raise ValueError(f"invalid float array - {type(v).__name__}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("array contains non-finite values")
        return arr


class PointArray(FloatArray):
    """Field for (N, 2) arrays of planar points; an empty input gives shape (0, 2)"""

    @classmethod
    def validate(cls, v) -> np.ndarray:
        arr = super().validate(v)
        if arr.size == 0:
            return arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"points must have shape (N, 2), got {arr.shape}")
        return arr
