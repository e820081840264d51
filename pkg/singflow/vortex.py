"""Planar vortex blobs: desingularized Biot-Savart dynamics, sheet discretization,
mirror-symmetric clouds and the concentration and local energy functionals."""
from logging import getLogger
from typing import Callable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import Field, root_validator, validator
from scipy.spatial import cKDTree

from .exceptions import DegenerateSpec, InvalidArgument, NotNMS
from .helpers import chunk_by_length, handle_and_convert_numerical_errors
from .models import SingModel
from .numerics import rk4_step
from .series import DiagnosticSeries
from .types import FloatArray, PointArray

__all__ = (
    'BlobCloud2D',
    'SheetSpec',
    'ConcentrationReport',
    'InvariantRecord',
    'kernel2d',
    'velocity_field',
    'step',
    'build_sheet',
    'mirror_symmetrize',
    'mirror_symmetry_error',
    'check_mirror_symmetry',
    'concentration_sup',
    'local_energy',
    'invariants2d',
    'run_cloud',
    'approximation_sequence',
)

logger = getLogger('singflow')

TARGET_CHUNK = 512
_REFLECT = np.array([-1.0, 1.0])


class BlobCloud2D(SingModel):
    """Atoms x_i with circulations Gamma_i smoothed over a width delta.

    A mirrored cloud stores its x1 > 0 half first and the images (-x1, x2, -Gamma) after it,
    in the same order.
    """

    positions: PointArray
    circulations: FloatArray
    delta: float
    mirrored: bool = False
    t: float = 0.0

    @validator('delta')
    def _positive_width(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError('smoothing width must be positive')
        return v

    @root_validator(skip_on_failure=True)
    def _matching_atoms(cls, values: dict) -> dict:
        n = values['positions'].shape[0]
        if values['circulations'].shape != (n,):
            raise ValueError('one circulation per atom is required')
        if values['mirrored'] and n % 2:
            raise ValueError('a mirrored cloud holds an even number of atoms')
        return values

    @property
    def size(self) -> int:
        return int(self.positions.shape[0])

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.circulations)))

    def to_series(self) -> DiagnosticSeries:
        rows = np.column_stack([self.positions, self.circulations])
        return DiagnosticSeries('cloud', ('x1', 'x2', 'gamma'), rows, meta={'t': self.t})


class SheetSpec(SingModel):
    """curve(s) and strength(s) are sampled on s in [0, 1]; strength is the density per arclength.

    For the 'nms' pattern the curve lives in x1 > 0 and the images are added by build_sheet.
    """

    curve: Callable
    strength: Callable
    sign_pattern: Literal['one-sign', 'nms'] = 'one-sign'
    perturbation_positions: PointArray = Field(default_factory=lambda: np.zeros((0, 2)))
    perturbation_circulations: FloatArray = Field(default_factory=lambda: np.zeros(0))

    @root_validator(skip_on_failure=True)
    def _matching_perturbation(cls, values: dict) -> dict:
        if values['perturbation_circulations'].shape != (values['perturbation_positions'].shape[0],):
            raise ValueError('one circulation per perturbation atom is required')
        return values


class ConcentrationReport(SingModel):
    ball_radius: float
    sup_mass: float
    arg_center: Tuple[float, float]


class InvariantRecord(SingModel):
    """impulse is (sum G x1, sum G x2) for planar clouds and (pi sum G r^2,) for rings"""

    circulation: float
    impulse: Tuple[float, ...]
    angular_impulse: Optional[float] = None
    hamiltonian: Optional[float] = None


def kernel2d(x: np.ndarray, delta: float) -> np.ndarray:
    """K_delta(x) = (-x2, x1) / (2 pi (|x|^2 + delta^2)), with K_delta(0) = 0"""
    x = np.asarray(x, dtype=float)
    denom = np.asarray(2.0 * np.pi * (np.sum(x * x, axis=-1) + delta * delta))
    scale = np.divide(1.0, denom, out=np.zeros_like(denom), where=denom > 0.0)
    return np.stack((-x[..., 1] * scale, x[..., 0] * scale), axis=-1)


def _induced(
    targets: np.ndarray, sources: np.ndarray, circulations: np.ndarray, delta: float
) -> np.ndarray:
    if targets.shape[0] == 0 or sources.shape[0] == 0:
        return np.zeros_like(targets)
    blocks = []
    for chunk in chunk_by_length(targets, TARGET_CHUNK):
        d = chunk[:, None, :] - sources[None, :, :]
        r2 = 2.0 * np.pi * (d[..., 0] ** 2 + d[..., 1] ** 2 + delta * delta)
        w = np.divide(
            np.broadcast_to(circulations, r2.shape), r2, out=np.zeros_like(r2), where=r2 > 0.0
        )
        blocks.append(np.stack((-np.sum(w * d[..., 1], axis=1), np.sum(w * d[..., 0], axis=1)), axis=-1))
    return np.concatenate(blocks)


def _as_points(targets) -> np.ndarray:
    return PointArray.validate(np.atleast_2d(np.asarray(targets, dtype=float)))


@handle_and_convert_numerical_errors
def velocity_field(cloud: BlobCloud2D, targets) -> np.ndarray:
    """u(p) = sum_i Gamma_i K_delta(p - x_i), summed in atom order

    Mirrored clouds sum the half and the images separately, so the x1-component cancels
    exactly on the symmetry axis.
    """
    points = _as_points(targets)
    if not cloud.mirrored:
        return _induced(points, cloud.positions, cloud.circulations, cloud.delta)
    h = cloud.size // 2
    own = _induced(points, cloud.positions[:h], cloud.circulations[:h], cloud.delta)
    images = _induced(points, cloud.positions[h:], cloud.circulations[h:], cloud.delta)
    return own + images


def _with_images(half: np.ndarray) -> np.ndarray:
    return np.vstack([half, half * _REFLECT])


def step(cloud: BlobCloud2D, dt: float) -> BlobCloud2D:
    """one RK4 step of the atom positions; circulations are frozen

    A negative dt integrates backwards. Mirrored clouds advance their half and reflect it.
    """
    gamma, delta = cloud.circulations, cloud.delta
    if cloud.mirrored:
        h = cloud.size // 2

        def deriv(_, y: np.ndarray) -> np.ndarray:
            half = y.reshape(-1, 2)
            full = _with_images(half)
            own = _induced(half, full[:h], gamma[:h], delta)
            return (own + _induced(half, full[h:], gamma[h:], delta)).ravel()

        half = rk4_step(deriv, cloud.positions[:h].ravel(), cloud.t, dt).reshape(-1, 2)
        positions = _with_images(half)
    else:

        def deriv(_, y: np.ndarray) -> np.ndarray:
            points = y.reshape(-1, 2)
            return _induced(points, points, gamma, delta).ravel()

        positions = rk4_step(deriv, cloud.positions.ravel(), cloud.t, dt).reshape(-1, 2)
    return cloud.copy(update={'positions': positions, 't': cloud.t + dt})


def build_sheet(spec: SheetSpec, n: int, delta: float) -> BlobCloud2D:
    """blob discretization of a vortex sheet: one atom per parameter cell, at the midpoint

    Args:
        spec (SheetSpec): sheet curve, strength and sign pattern
        n (int): number of sheet atoms
        delta (float): smoothing width

    Raises:
        InvalidArgument: if n < 2
        DegenerateSpec: if the curve has zero length
        NotNMS: if an 'nms' sheet leaves the right half-plane or changes sign

    Returns:
        BlobCloud2D: the cloud, mirrored for the 'nms' pattern
    """
    if n < 2:
        raise InvalidArgument(f'a sheet needs at least 2 atoms, got {n}')
    s = np.linspace(0.0, 1.0, n + 1)
    nodes = np.asarray(spec.curve(s), dtype=float)
    lengths = np.hypot(*np.diff(nodes, axis=0).T)
    if not np.sum(lengths) > 0.0:
        raise DegenerateSpec('sheet curve has zero length')
    mid = 0.5 * (s[1:] + s[:-1])
    positions = np.vstack([np.asarray(spec.curve(mid), dtype=float), spec.perturbation_positions])
    gamma = np.concatenate(
        [np.asarray(spec.strength(mid), dtype=float) * lengths, spec.perturbation_circulations]
    )
    cloud = BlobCloud2D(positions=positions, circulations=gamma, delta=delta)
    if spec.sign_pattern == 'nms':
        return mirror_symmetrize(cloud)
    return cloud


def mirror_symmetrize(half: BlobCloud2D) -> BlobCloud2D:
    if half.mirrored:
        raise NotNMS()
    if np.any(half.positions[:, 0] <= 0.0) or np.any(half.circulations < 0.0):
        raise NotNMS()
    return BlobCloud2D(
        positions=_with_images(half.positions),
        circulations=np.concatenate([half.circulations, -half.circulations]),
        delta=half.delta,
        mirrored=True,
        t=half.t,
    )


def mirror_symmetry_error(cloud: BlobCloud2D) -> float:
    """largest mismatch of the pairing (x1, x2, G) <-> (-x1, x2, -G); inf if atoms do not pair up"""
    n = cloud.size
    if n == 0:
        return 0.0
    if n % 2:
        return float('inf')
    dist, idx = cKDTree(cloud.positions).query(cloud.positions * _REFLECT, k=1)
    if np.unique(idx).size != n:
        return float('inf')
    gamma = cloud.circulations
    return float(max(np.max(dist), np.max(np.abs(gamma[idx] + gamma))))


def check_mirror_symmetry(cloud: BlobCloud2D, tol: float = 0.0) -> bool:
    return mirror_symmetry_error(cloud) <= tol


def concentration_sup(
    cloud: BlobCloud2D, ball_radius: float, sweep_spacing: Optional[float] = None
) -> ConcentrationReport:
    """sup over centers x0 of sum |G_i| for |x_i - x0| <= ball_radius

    Candidate centers are a sweep grid over the bounding box plus the atoms themselves.
    """
    if ball_radius <= 0.0:
        raise InvalidArgument('ball radius must be positive')
    spacing = 0.5 * ball_radius if sweep_spacing is None else sweep_spacing
    if not 0.0 < spacing <= 0.5 * ball_radius:
        raise InvalidArgument('sweep spacing must be in (0, ball_radius / 2]')
    if cloud.size == 0:
        return ConcentrationReport(ball_radius=ball_radius, sup_mass=0.0, arg_center=(0.0, 0.0))

    pos = cloud.positions
    lo, hi = pos.min(axis=0), pos.max(axis=0)
    g1, g2 = np.meshgrid(
        *(np.arange(lo[k], hi[k] + spacing, spacing) for k in (0, 1)), indexing='ij'
    )
    candidates = np.vstack([np.column_stack([g1.ravel(), g2.ravel()]), pos])
    weights = np.abs(cloud.circulations)
    members = cKDTree(pos).query_ball_point(candidates, ball_radius)

    best, center = -1.0, candidates[0]
    for candidate, idx in zip(candidates, members):
        mass = float(np.sum(weights[np.sort(idx)])) if idx else 0.0
        if mass > best:
            best, center = mass, candidate
    return ConcentrationReport(
        ball_radius=ball_radius, sup_mass=best, arg_center=(float(center[0]), float(center[1]))
    )


def local_energy(
    cloud: BlobCloud2D,
    R: float,
    n_radial: int = 32,
    n_angular: int = 64,
    center: Tuple[float, float] = (0.0, 0.0),
) -> float:
    """int over |x - center| <= R of |u|^2, Gauss-Legendre in radius times uniform angles"""
    if R <= 0.0:
        raise InvalidArgument('radius must be positive')
    if cloud.size == 0:
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(n_radial)
    rho = 0.5 * R * (nodes + 1.0)
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    points = np.column_stack(
        [
            (center[0] + rho[:, None] * np.cos(theta)[None, :]).ravel(),
            (center[1] + rho[:, None] * np.sin(theta)[None, :]).ravel(),
        ]
    )
    speed2 = np.sum(velocity_field(cloud, points) ** 2, axis=1).reshape(n_radial, n_angular)
    return float(2.0 * np.pi * np.sum(0.5 * R * weights * rho * speed2.mean(axis=1)))


def invariants2d(cloud: BlobCloud2D) -> InvariantRecord:
    pos, gamma = cloud.positions, cloud.circulations
    hamiltonian = 0.0
    if cloud.size >= 2:
        i, j = np.triu_indices(cloud.size, k=1)
        d = pos[i] - pos[j]
        r2 = d[:, 0] ** 2 + d[:, 1] ** 2 + cloud.delta ** 2
        hamiltonian = float(-np.sum(gamma[i] * gamma[j] * np.log(r2)) / (4.0 * np.pi))
    return InvariantRecord(
        circulation=float(np.sum(gamma)),
        impulse=(float(np.sum(gamma * pos[:, 0])), float(np.sum(gamma * pos[:, 1]))),
        angular_impulse=float(np.sum(gamma * (pos[:, 0] ** 2 + pos[:, 1] ** 2))),
        hamiltonian=hamiltonian,
    )


def _invariant_row(cloud: BlobCloud2D) -> tuple:
    rec = invariants2d(cloud)
    row = (cloud.t, rec.circulation, *rec.impulse, rec.angular_impulse, rec.hamiltonian)
    if cloud.mirrored:
        row += (mirror_symmetry_error(cloud),)
    return row


def run_cloud(
    cloud: BlobCloud2D, dt: float, n_steps: int, every: Optional[int] = None, name: str = 'cloud'
) -> Tuple[List[BlobCloud2D], DiagnosticSeries]:
    """advance n_steps, storing a snapshot and an invariant row every `every` steps"""
    if n_steps < 0:
        raise InvalidArgument('n_steps must be nonnegative')
    every = every or max(n_steps // 10, 1)
    columns = ('t', 'circulation', 'impulse_x', 'impulse_y', 'angular_impulse', 'hamiltonian')
    if cloud.mirrored:
        columns += ('symmetry_error',)
    series = DiagnosticSeries(name, columns, meta={'atoms': cloud.size, 'delta': cloud.delta, 'dt': dt})
    snapshots = [cloud]
    series.append(*_invariant_row(cloud))
    for k in range(1, n_steps + 1):
        cloud = step(cloud, dt)
        if k % every == 0 or k == n_steps:
            snapshots.append(cloud)
            series.append(*_invariant_row(cloud))
    logger.debug(f'{name}: {n_steps} steps of {cloud.size} atoms to t={cloud.t:.4g}')
    return snapshots, series


def approximation_sequence(
    spec: SheetSpec,
    n: int,
    deltas: Sequence[float],
    dt: float,
    t_end: float,
    ball_radius: float,
    R: float,
    sweep_spacing: Optional[float] = None,
) -> DiagnosticSeries:
    """the same sheet regularized at each delta, probed at t_end for concentration and energy"""
    series = DiagnosticSeries(
        'approximation-sequence',
        ('delta', 'sup_mass', 'sup_fraction', 'local_energy', 'circulation'),
        meta={'n': n, 'dt': dt, 't_end': t_end, 'ball_radius': ball_radius, 'R': R},
    )
    n_steps = int(round(t_end / dt))
    for delta in deltas:
        cloud = build_sheet(spec, n, delta)
        for _ in range(n_steps):
            cloud = step(cloud, dt)
        report = concentration_sup(cloud, ball_radius, sweep_spacing)
        total = cloud.total_variation
        series.append(
            delta,
            report.sup_mass,
            report.sup_mass / total if total > 0.0 else 0.0,
            local_energy(cloud, R),
            float(np.sum(cloud.circulations)),
        )
        logger.info(f'delta={delta:.4g}: sup mass {report.sup_mass:.6g} in r={ball_radius:.4g}')
    return series
