"""Polytropic gas p = A rho^gamma, Bernoulli density law and the potential-flow shock jump."""
from logging import getLogger
from typing import Union

import numpy as np
from pydantic import validator

from .exceptions import NoBracket, NoShockSolution, NonPhysicalDensity, SolverFailure, VacuumReached
from .models import SingModel
from .numerics import find_root

__all__ = (
    'GasModel',
    'Freestream',
    'PostShockState',
    'sound_speed',
    'enthalpy',
    'bernoulli_constant',
    'bernoulli_density',
    'sound_speed_sq_at',
    'rh_downstream',
    'mach_slope',
)

logger = getLogger('singflow')

Real = Union[float, np.ndarray]


class GasModel(SingModel):
    gamma: float = 1.4
    A: float = 1.0

    @validator('gamma')
    def _gamma_range(cls, v: float) -> float:
        if not 1.0 < v < 3.0:
            raise ValueError(f'gamma must lie in (1, 3), got {v}')
        return v

    @validator('A')
    def _positive_constant(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError(f'gas constant must be positive, got {v}')
        return v


class Freestream(SingModel):
    """Uniform upstream state (0, 0, q0) with density rho0; c0 and M0 need a gas."""

    q0: float
    rho0: float = 1.0

    @validator('q0')
    def _positive_speed(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError(f'freestream speed must be positive, got {v}')
        return v

    @validator('rho0')
    def _positive_density(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError(f'freestream density must be positive, got {v}')
        return v

    def c0(self, gas: GasModel) -> float:
        return float(sound_speed(self.rho0, gas))

    def mach(self, gas: GasModel) -> float:
        return self.q0 / self.c0(gas)


class PostShockState(SingModel):
    shock_slope: float
    normal_speed: float
    tangential_speed: float
    density: float

    @property
    def angle(self) -> float:
        return float(np.arctan(self.shock_slope))

    @property
    def u_r(self) -> float:
        sigma = self.angle
        return float(np.cos(sigma) * (self.tangential_speed * np.tan(sigma) - self.normal_speed))

    @property
    def u_z(self) -> float:
        sigma = self.angle
        return float(self.tangential_speed * np.cos(sigma) + self.normal_speed * np.sin(sigma))

    @property
    def velocity(self) -> np.ndarray:
        return np.array([self.u_r, self.u_z])


def _check_density(rho: Real) -> np.ndarray:
    arr = np.asarray(rho, dtype=float)
    if np.any(arr <= 0.0):
        raise NonPhysicalDensity(float(np.min(arr)))
    return arr


def sound_speed(rho: Real, gas: GasModel) -> Real:
    arr = _check_density(rho)
    return np.sqrt(gas.A * gas.gamma * arr ** (gas.gamma - 1.0))


def enthalpy(rho: Real, gas: GasModel) -> Real:
    arr = _check_density(rho)
    return gas.A * gas.gamma / (gas.gamma - 1.0) * arr ** (gas.gamma - 1.0)


def bernoulli_constant(fs: Freestream, gas: GasModel) -> float:
    return 0.5 * fs.q0 ** 2 + float(enthalpy(fs.rho0, gas))


def bernoulli_density(speed_sq: Real, fs: Freestream, gas: GasModel) -> Real:
    """invert h(rho) = B - |grad Phi|^2 / 2

    Args:
        speed_sq (Real): squared speed, scalar or array
        fs (Freestream): upstream state fixing B
        gas (GasModel): polytropic gas

    Raises:
        VacuumReached: if the enthalpy left is not positive

    Returns:
        Real: density
    """
    h = bernoulli_constant(fs, gas) - 0.5 * np.asarray(speed_sq, dtype=float)
    if np.any(h <= 0.0):
        raise VacuumReached()
    return ((gas.gamma - 1.0) * h / (gas.A * gas.gamma)) ** (1.0 / (gas.gamma - 1.0))


def sound_speed_sq_at(speed_sq: Real, fs: Freestream, gas: GasModel) -> Real:
    """c^2 = (gamma - 1) h along the Bernoulli law."""
    h = bernoulli_constant(fs, gas) - 0.5 * np.asarray(speed_sq, dtype=float)
    if np.any(h <= 0.0):
        raise VacuumReached()
    return (gas.gamma - 1.0) * h


def mach_slope(fs: Freestream, gas: GasModel) -> float:
    """tan of the Mach angle arcsin(1/M0)."""
    return float(np.tan(np.arcsin(1.0 / fs.mach(gas))))


def rh_downstream(fs: Freestream, gas: GasModel, shock_slope: float) -> PostShockState:
    """state behind a straight front r = z * shock_slope in the uniform stream

    The tangential velocity is continuous; the normal speed solves the mass balance
    rho(u_n^2 + q_t^2) u_n = rho0 q0 sin(sigma) on its compressive branch.

    Raises:
        NoShockSolution: if the upstream normal Mach number is below one
        SolverFailure: if the compressive root cannot be bracketed
    """
    sigma = float(np.arctan(shock_slope))
    un0 = fs.q0 * np.sin(sigma)
    qt = fs.q0 * np.cos(sigma)
    normal_mach = un0 / fs.c0(gas)
    if normal_mach < 1.0 - 1e-9:
        raise NoShockSolution(normal_mach)
    upstream = PostShockState(
        shock_slope=shock_slope, normal_speed=un0, tangential_speed=qt, density=fs.rho0
    )
    flux0 = fs.rho0 * un0
    B = bernoulli_constant(fs, gas)
    u_star = float(np.sqrt(max(2.0 * (gas.gamma - 1.0) * (B - 0.5 * qt ** 2) / (gas.gamma + 1.0), 0.0)))

    def excess_flux(u: float) -> float:
        return float(bernoulli_density(u * u + qt * qt, fs, gas)) * u - flux0

    if normal_mach <= 1.0 or u_star >= un0 or excess_flux(u_star) <= 1e-14 * flux0:
        return upstream
    try:
        un = find_root(excess_flux, 0.0, u_star, tol=1e-15)
    except NoBracket as e:
        raise SolverFailure(f'Rankine-Hugoniot bracket failed: {e}')
    rho = float(bernoulli_density(un * un + qt * qt, fs, gas))
    return PostShockState(
        shock_slope=shock_slope, normal_speed=un, tangential_speed=qt, density=rho
    )
