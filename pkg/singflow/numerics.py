"""Shared numerical kernels: fixed-step RK4, Thomas elimination, bracketing roots,
trapezoid quadrature and log-log slope fits."""
from logging import getLogger
from typing import Callable, Sequence, Tuple, Union

import numpy as np
from pydantic import root_validator, validator
from scipy import integrate, optimize

from .exceptions import (
    DomainError,
    InvalidArgument,
    NoBracket,
    NonFiniteState,
    ShapeError,
    SingularSystem,
)
from .helpers import handle_and_convert_numerical_errors
from .models import SingModel
from .types import FloatArray

__all__ = (
    'Grid1D',
    'TridiagonalSystem',
    'rk4_step',
    'solve_tridiagonal',
    'bisect_root',
    'find_root',
    'fit_loglog_slope',
    'trapezoid',
    'cumulative_trapezoid',
)

logger = getLogger('singflow')

Deriv = Callable[[float, np.ndarray], np.ndarray]


class Grid1D(SingModel):
    nodes: FloatArray

    @validator('nodes')
    def _strictly_increasing(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 1 or v.size < 2:
            raise ValueError('grid needs at least 2 nodes')
        if np.any(np.diff(v) <= 0.0):
            raise ValueError('grid nodes must be strictly increasing')
        return v

    @classmethod
    def uniform(cls, a: float, b: float, n: int) -> 'Grid1D':
        return cls(nodes=np.linspace(a, b, n))

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def size(self) -> int:
        return int(self.nodes.size)


class TridiagonalSystem(SingModel):
    """A x = rhs with A given by its three bands; rhs may hold several columns."""

    lower: FloatArray
    diagonal: FloatArray
    upper: FloatArray
    rhs: FloatArray

    @root_validator(skip_on_failure=True)
    def _consistent_bands(cls, values: dict) -> dict:
        n = values['diagonal'].size
        if values['diagonal'].ndim != 1 or n < 1:
            raise ValueError('diagonal must be a non-empty vector')
        if values['lower'].shape != (n - 1,) or values['upper'].shape != (n - 1,):
            raise ValueError(f'off-diagonal bands must have length {n - 1}')
        if values['rhs'].ndim not in (1, 2) or values['rhs'].shape[0] != n:
            raise ValueError(f'rhs must have leading dimension {n}')
        return values

    @property
    def size(self) -> int:
        return int(self.diagonal.size)


@handle_and_convert_numerical_errors
def rk4_step(deriv: Deriv, state: np.ndarray, t: float, dt: float) -> np.ndarray:
    """classical fourth-order Runge-Kutta step

    Args:
        deriv (Deriv): right-hand side f(t, y)
        state (np.ndarray): y at time t
        t (float): time
        dt (float): step, negative values integrate backwards

    Raises:
        InvalidArgument: if dt is zero or not finite
        NonFiniteState: if a stage derivative is not finite

    Returns:
        np.ndarray: y at time t + dt
    """
    if dt == 0.0 or not np.isfinite(dt):
        raise InvalidArgument(f'step must be nonzero and finite, got {dt}')
    y = np.asarray(state, dtype=float)
    k1 = _stage(deriv, t, y)
    k2 = _stage(deriv, t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = _stage(deriv, t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = _stage(deriv, t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _stage(deriv: Deriv, t: float, y: np.ndarray) -> np.ndarray:
    k = np.asarray(deriv(t, y), dtype=float)
    if k.shape != y.shape:
        raise ShapeError(f'derivative shape {k.shape} does not match state {y.shape}')
    if not np.all(np.isfinite(k)):
        raise NonFiniteState(f'non-finite derivative at t={t}')
    return k


def solve_tridiagonal(sys: TridiagonalSystem) -> np.ndarray:
    """Thomas elimination without pivoting; callers keep the bands diagonally dominant."""
    n = sys.size
    c = np.zeros(n - 1)
    rhs = sys.rhs.astype(float, copy=True)
    b = sys.diagonal
    if b[0] == 0.0:
        raise SingularSystem(0)
    d = np.empty_like(rhs)
    denom = b[0]
    d[0] = rhs[0] / denom
    for i in range(1, n):
        c[i - 1] = sys.upper[i - 1] / denom
        denom = b[i] - sys.lower[i - 1] * c[i - 1]
        if denom == 0.0:
            raise SingularSystem(i)
        d[i] = (rhs[i] - sys.lower[i - 1] * d[i - 1]) / denom
    for i in range(n - 2, -1, -1):
        d[i] = d[i] - c[i] * d[i + 1]
    return d


def bisect_root(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    if tol <= 0.0:
        raise InvalidArgument('tol must be positive')
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if not fa * fb < 0.0:
        raise NoBracket(a, b, fa, fb)
    while abs(b - a) > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if fa * fm < 0.0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def find_root(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-12
) -> float:
    """Brent's method with the bisect_root bracket contract."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if not fa * fb < 0.0:
        raise NoBracket(a, b, fa, fb)
    return float(optimize.brentq(f, a, b, xtol=tol, rtol=4 * np.finfo(float).eps))


def fit_loglog_slope(samples: Sequence[Tuple[float, float]]) -> float:
    pts = np.asarray(samples, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 2:
        raise InvalidArgument('slope fit needs at least 2 samples')
    if np.any(pts <= 0.0) or not np.all(np.isfinite(pts)):
        raise DomainError('log-log fit needs positive finite samples')
    slope, _ = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)
    return float(slope)


def _grid_nodes(grid: Union[Grid1D, np.ndarray]) -> np.ndarray:
    return grid.nodes if isinstance(grid, Grid1D) else np.asarray(grid, dtype=float)


def trapezoid(values: np.ndarray, grid: Union[Grid1D, np.ndarray], axis: int = -1) -> float:
    values = np.asarray(values, dtype=float)
    nodes = _grid_nodes(grid)
    if values.shape[axis] != nodes.size:
        raise ShapeError(f'{values.shape[axis]} samples on a {nodes.size}-node grid')
    return integrate.trapezoid(values, nodes, axis=axis)


def cumulative_trapezoid(
    values: np.ndarray, grid: Union[Grid1D, np.ndarray], axis: int = -1
) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    nodes = _grid_nodes(grid)
    if values.shape[axis] != nodes.size:
        raise ShapeError(f'{values.shape[axis]} samples on a {nodes.size}-node grid')
    return integrate.cumulative_trapezoid(values, nodes, axis=axis, initial=0.0)
