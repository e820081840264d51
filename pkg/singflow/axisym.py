"""Axisymmetric vortex rings without swirl.

A ring of radius a at height z0 induces at (r, z), with dz = z - z0,

    rho1^2 = (r - a)^2 + dz^2 + delta^2,   rho2^2 = (r + a)^2 + dz^2 + delta^2,   m = 4 a r / rho2^2
    u_z = G / (2 pi rho2) [K(m) + (2 a^2 - (rho1^2 + rho2^2) / 2) / rho1^2 E(m)]
    u_r = G dz / (2 pi r rho2) [-K(m) + (rho1^2 + rho2^2) / (2 rho1^2) E(m)]

i.e. the circular filament field with dz^2 replaced by dz^2 + delta^2 in the Stokes stream
function. K and E are complete elliptic integrals of parameter m.
"""
from logging import getLogger
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import root_validator, validator
from scipy.special import ellipe, ellipk

from .exceptions import AxisCollision, InvalidArgument
from .helpers import handle_and_convert_numerical_errors
from .models import SingModel
from .numerics import rk4_step
from .series import DiagnosticSeries
from .types import FloatArray, PointArray
from .vortex import InvariantRecord

__all__ = (
    'RingCloudAxi',
    'ring_velocity',
    'center_velocity',
    'step_axisym',
    'axisym_invariants',
    'run_rings',
    'axis_energy_probe',
)

logger = getLogger('singflow')


class RingCloudAxi(SingModel):
    """Coaxial rings at (r_i, z_i), r_i > 0, with circulations Gamma_i."""

    positions: PointArray
    circulations: FloatArray
    delta: float
    t: float = 0.0

    @validator('delta')
    def _positive_width(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError('smoothing width must be positive')
        return v

    @root_validator(skip_on_failure=True)
    def _off_axis(cls, values: dict) -> dict:
        pos = values['positions']
        if values['circulations'].shape != (pos.shape[0],):
            raise ValueError('one circulation per ring is required')
        if np.any(pos[:, 0] <= 0.0):
            raise ValueError('ring radii must be strictly positive')
        return values

    @property
    def size(self) -> int:
        return int(self.positions.shape[0])

    def to_series(self) -> DiagnosticSeries:
        rows = np.column_stack([self.positions, self.circulations])
        return DiagnosticSeries('rings', ('r', 'z', 'gamma'), rows, meta={'t': self.t})


def _ring_induced(
    targets: np.ndarray, rings: np.ndarray, circulations: np.ndarray, delta: float
) -> np.ndarray:
    if targets.shape[0] == 0 or rings.shape[0] == 0:
        return np.zeros_like(targets)
    r = targets[:, 0][:, None]
    a = rings[:, 0][None, :]
    dz = targets[:, 1][:, None] - rings[:, 1][None, :]
    base = dz * dz + delta * delta
    rho1 = (r - a) ** 2 + base
    rho2 = (r + a) ** 2 + base
    m = 4.0 * a * r / rho2
    K, E = ellipk(m), ellipe(m)
    scale = circulations[None, :] / (2.0 * np.pi * np.sqrt(rho2))
    mean = 0.5 * (rho1 + rho2)
    uz = scale * (K + (2.0 * a * a - mean) / rho1 * E)
    ur = scale * dz * (-K + mean / rho1 * E)
    ur = np.divide(ur, r, out=np.zeros_like(ur), where=r > 0.0)
    return np.column_stack([np.sum(ur, axis=1), np.sum(uz, axis=1)])


@handle_and_convert_numerical_errors
def ring_velocity(cloud: RingCloudAxi, target) -> np.ndarray:
    """(u_r, u_z) at one (r, z) target or an (M, 2) array of them; u_r = 0 on the axis"""
    points = np.asarray(target, dtype=float)
    single = points.ndim == 1
    points = PointArray.validate(np.atleast_2d(points))
    if np.any(points[:, 0] < 0.0):
        raise InvalidArgument('targets need r >= 0')
    u = _ring_induced(points, cloud.positions, cloud.circulations, cloud.delta)
    return u[0] if single else u


def center_velocity(radius: float, circulation: float, delta: float) -> float:
    """axial speed at the center of a lone ring, G a^2 / (2 (a^2 + delta^2)^(3/2))"""
    return circulation * radius ** 2 / (2.0 * (radius ** 2 + delta ** 2) ** 1.5)


def step_axisym(cloud: RingCloudAxi, dt: float) -> RingCloudAxi:
    """RK4 advection of the rings with their induced velocity

    Raises:
        AxisCollision: if a ring reaches r <= 0
    """
    gamma, delta = cloud.circulations, cloud.delta

    def deriv(_, y: np.ndarray) -> np.ndarray:
        points = y.reshape(-1, 2)
        return _ring_induced(points, points, gamma, delta).ravel()

    positions = rk4_step(deriv, cloud.positions.ravel(), cloud.t, dt).reshape(-1, 2)
    if np.any(positions[:, 0] <= 0.0):
        raise AxisCollision().at(cloud.t + dt)
    return cloud.copy(update={'positions': positions, 't': cloud.t + dt})


def axisym_invariants(cloud: RingCloudAxi) -> InvariantRecord:
    gamma = cloud.circulations
    return InvariantRecord(
        circulation=float(np.sum(gamma)),
        impulse=(float(np.pi * np.sum(gamma * cloud.positions[:, 0] ** 2)),),
    )


def _ring_row(cloud: RingCloudAxi) -> tuple:
    rec = axisym_invariants(cloud)
    r, z = cloud.positions[:, 0], cloud.positions[:, 1]
    if cloud.size == 0:
        return cloud.t, rec.circulation, rec.impulse[0], 0.0, 0.0, 0.0
    return cloud.t, rec.circulation, rec.impulse[0], float(r.min()), float(r.max()), float(z.mean())


def run_rings(
    cloud: RingCloudAxi, dt: float, n_steps: int, every: Optional[int] = None, name: str = 'rings'
) -> Tuple[List[RingCloudAxi], DiagnosticSeries]:
    if n_steps < 0:
        raise InvalidArgument('n_steps must be nonnegative')
    every = every or max(n_steps // 10, 1)
    series = DiagnosticSeries(
        name,
        ('t', 'circulation', 'impulse', 'r_min', 'r_max', 'z_mean'),
        meta={'rings': cloud.size, 'delta': cloud.delta, 'dt': dt},
    )
    snapshots = [cloud]
    series.append(*_ring_row(cloud))
    for k in range(1, n_steps + 1):
        cloud = step_axisym(cloud, dt)
        if k % every == 0 or k == n_steps:
            snapshots.append(cloud)
            series.append(*_ring_row(cloud))
    return snapshots, series


def _window(cloud: RingCloudAxi) -> Tuple[float, float, float]:
    if cloud.size == 0:
        return 1.0, -1.0, 1.0
    span = float(np.max(cloud.positions[:, 0]))
    z = cloud.positions[:, 1]
    return 2.0 * span, float(z.min()) - 2.0 * span, float(z.max()) + 2.0 * span


def _windowed_energy(
    cloud: RingCloudAxi, rho: float, z_lo: float, z_hi: float, n_radial: int, n_axial: int
) -> float:
    """int_{z_lo}^{z_hi} int_0^rho |u|^2 2 pi r dr dz by tensor Gauss-Legendre"""
    xr, wr = np.polynomial.legendre.leggauss(n_radial)
    xz, wz = np.polynomial.legendre.leggauss(n_axial)
    r = 0.5 * rho * (xr + 1.0)
    z = z_lo + 0.5 * (z_hi - z_lo) * (xz + 1.0)
    rr, zz = np.meshgrid(r, z, indexing='ij')
    u = _ring_induced(
        np.column_stack([rr.ravel(), zz.ravel()]), cloud.positions, cloud.circulations, cloud.delta
    )
    speed2 = np.sum(u * u, axis=1).reshape(n_radial, n_axial)
    weights = np.outer(0.5 * rho * wr * 2.0 * np.pi * r, 0.5 * (z_hi - z_lo) * wz)
    return float(np.sum(weights * speed2))


def axis_energy_probe(
    history: Sequence[RingCloudAxi],
    radii: Sequence[float],
    n_radial: int = 48,
    n_axial: int = 96,
) -> DiagnosticSeries:
    """kinetic energy in {r < rho} of a window around the rings, per snapshot and rho

    The window is r <= 2 max(r_i) and z within 2 max(r_i) of the rings; radii beyond it are
    clipped, so they report the whole windowed energy. meta holds the maxima over time.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0 or np.any(radii <= 0.0) or np.any(np.diff(radii) >= 0.0):
        raise InvalidArgument('radii must be positive and strictly decreasing')
    series = DiagnosticSeries('axis-energy', ('t', 'rho', 'energy', 'total', 'fraction'))
    max_energy = {float(rho): 0.0 for rho in radii}
    max_fraction = 0.0
    for cloud in history:
        r_w, z_lo, z_hi = _window(cloud)
        total = _windowed_energy(cloud, r_w, z_lo, z_hi, n_radial, n_axial)
        for rho in radii:
            energy = _windowed_energy(cloud, min(rho, r_w), z_lo, z_hi, n_radial, n_axial)
            fraction = energy / total if total > 0.0 else 0.0
            series.append(cloud.t, rho, energy, total, fraction)
            max_energy[float(rho)] = max(max_energy[float(rho)], energy)
            max_fraction = max(max_fraction, fraction) if rho < r_w else max_fraction
    series.meta.update({'max_energy': max_energy, 'max_fraction': max_fraction})
    return series
