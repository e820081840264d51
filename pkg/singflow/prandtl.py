"""Unsteady 2-D Prandtl boundary layer on [0, L] x [0, y_max], advanced by Lie splitting:
upwind transport, then implicit wall-normal diffusion, then v from continuity."""
from logging import getLogger
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import root_validator, validator
from scipy.special import erf

from .exceptions import InvalidArgument, StepTooLarge, UpwindBreakdown
from .models import SingModel
from .numerics import (
    TridiagonalSystem,
    bisect_root,
    cumulative_trapezoid,
    rk4_step,
    solve_tridiagonal,
    trapezoid,
)
from .series import DiagnosticSeries
from .types import FloatArray

__all__ = (
    'BLConfig',
    'BLState',
    'DataReport',
    'BlasiusProfile',
    'BLRun',
    'pressure_gradient',
    'validate_data',
    'initial_state',
    'reconstruct_v',
    'continuity_residual',
    'transport_substep',
    'diffusion_substep',
    'stable_dt',
    'advance',
    'min_shear',
    'wall_shear',
    'displacement_thickness',
    'blasius_profile',
    'blasius_velocity',
    'lipschitz_diagnostics',
    'run_boundary_layer',
    'favorable_config',
    'adverse_config',
    'blasius_steady_config',
)

logger = getLogger('singflow')

SATURATION = 1e-8
BLASIUS_DISPLACEMENT = 1.7208
MAX_SUBSTEPS = 1000


class BLConfig(SingModel):
    """Samplers take grid vectors: U(x, t), u0(x, y), u1(y, t), v0(x, t)."""

    name: str = 'custom'
    nu: float
    L: float
    T: float
    y_max: float
    nx: int
    ny: int
    dt: float
    U: Callable
    u0: Callable
    u1: Callable
    v0: Callable
    allow_separation: bool = False
    x0: float = 0.0
    cfl: float = 0.8

    @validator('cfl')
    def _cfl_fraction(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError('cfl must lie in (0, 1]')
        return v

    @validator('nu')
    def _nonnegative_viscosity(cls, v: float) -> float:
        if v < 0.0:
            raise ValueError('viscosity must be nonnegative')
        return v

    @validator('L', 'T', 'y_max', 'dt')
    def _positive(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError('extents and time step must be positive')
        return v

    @validator('nx', 'ny')
    def _enough_nodes(cls, v: int) -> int:
        if v < 3:
            raise ValueError('need at least 3 nodes per direction')
        return v

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, self.y_max, self.ny)

    @property
    def dx(self) -> float:
        return self.L / (self.nx - 1)

    @property
    def dy(self) -> float:
        return self.y_max / (self.ny - 1)

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))


class BLState(SingModel):
    t: float
    x: FloatArray
    y: FloatArray
    u: FloatArray
    v: FloatArray
    px: FloatArray
    U: FloatArray

    @root_validator(skip_on_failure=True)
    def _shapes(cls, values: dict) -> dict:
        u = values['u']
        if u.ndim != 2 or values['v'].shape != u.shape:
            raise ValueError('u and v must share an (nx, ny) grid')
        if u.shape != (values['x'].size, values['y'].size):
            raise ValueError('u does not match the x and y nodes')
        if values['px'].shape != (u.shape[0],) or values['U'].shape != (u.shape[0],):
            raise ValueError('px and U must have one value per x station')
        return values


class DataReport(SingModel):
    checks: Dict[str, bool]
    offending: Dict[str, List[Tuple[float, float]]]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def failed(self) -> List[str]:
        return [name for name, ok in self.checks.items() if not ok]


class BlasiusProfile(SingModel):
    eta: FloatArray
    f: FloatArray
    fp: FloatArray
    fpp: FloatArray
    wall_slope: float

    @property
    def displacement(self) -> float:
        return float(self.eta[-1] - self.f[-1])


class BLRun(SingModel):
    history: DiagnosticSeries
    wall_shear: DiagnosticSeries
    lipschitz: DiagnosticSeries
    final: BLState
    report: DataReport
    separated: bool = False


def pressure_gradient(U: Callable, x: np.ndarray, t: float, h: float = 1e-6) -> np.ndarray:
    """px = -(dU/dt + U dU/dx) from the Bernoulli law of the outer flow"""
    x = np.asarray(x, dtype=float)
    Ux = np.asarray(U(x, t), dtype=float) * np.ones_like(x)
    dUdt = (np.asarray(U(x, t + h)) - np.asarray(U(x, t - h))) / (2.0 * h)
    dUdx = np.gradient(Ux, x, edge_order=2)
    return -(dUdt + Ux * dUdx)


def _locations(mask: np.ndarray, x: np.ndarray, y: Optional[np.ndarray] = None, limit: int = 20) -> list:
    idx = np.argwhere(mask)[:limit]
    if y is None:
        return [(float(x[i[0]]), 0.0) for i in idx]
    return [(float(x[i]), float(y[j])) for i, j in idx]


def validate_data(cfg: BLConfig, n_times: int = 5) -> DataReport:
    """itemized sign and monotonicity checks of the data on the grid

    Strict monotonicity in y is required only below (1 - 1e-8) of the far-field value.
    """
    x, y = cfg.x, cfg.y
    times = np.linspace(0.0, cfg.T, n_times)
    checks, offending = {}, {}

    def record(name: str, bad: np.ndarray, xs: np.ndarray, ys: Optional[np.ndarray] = None):
        checks[name] = not bool(np.any(bad))
        offending[name] = _locations(bad, xs, ys)

    U = np.array([np.asarray(cfg.U(x, t)) * np.ones_like(x) for t in times])
    record('U>0', (U <= 0.0).any(axis=0), x)

    u0 = np.asarray(cfg.u0(x, y), dtype=float)
    record('u0>0', u0[:, 1:] <= 0.0, x, y[1:])
    u1 = np.array([cfg.u1(y, t) for t in times])
    record('u1>0', (u1[:, 1:] <= 0.0).any(axis=0)[None, :], np.zeros(1), y[1:])
    v0 = np.array([np.asarray(cfg.v0(x, t)) * np.ones_like(x) for t in times])
    record('v0<=0', (v0 > 0.0).any(axis=0), x)

    dy_u0 = np.gradient(u0, y, axis=1, edge_order=2)
    saturated = u0 >= (1.0 - SATURATION) * U[0][:, None]
    record('dy_u0>0', np.where(saturated, dy_u0 < -1e-12, dy_u0 <= 0.0), x, y)
    dy_u1 = np.gradient(u1, y, axis=1, edge_order=2)
    edge = U[:, :1]
    saturated = u1 >= (1.0 - SATURATION) * edge
    bad = np.where(saturated, dy_u1 < -1e-12, dy_u1 <= 0.0).any(axis=0)
    record('dy_u1>0', bad[None, :], np.zeros(1), y)

    px = np.array([pressure_gradient(cfg.U, x, t) for t in times])
    record('px<=0', (px > 1e-12).any(axis=0), x)
    report = DataReport(checks=checks, offending=offending)
    if not report.passed:
        logger.info(f'{cfg.name}: data hypotheses violated: {report.failed}')
    return report


def initial_state(cfg: BLConfig) -> BLState:
    x, y = cfg.x, cfg.y
    u = np.array(cfg.u0(x, y), dtype=float)
    U = np.asarray(cfg.U(x, 0.0), dtype=float) * np.ones_like(x)
    u[:, 0] = 0.0
    u[:, -1] = U
    u[0, :] = cfg.u1(y, 0.0)
    u[0, -1] = U[0]
    state = BLState(
        t=0.0, x=x, y=y, u=u, v=np.zeros_like(u), px=pressure_gradient(cfg.U, x, 0.0), U=U
    )
    return state.copy(update={'v': reconstruct_v(state, cfg)})


def reconstruct_v(state: BLState, cfg: BLConfig) -> np.ndarray:
    """v = v0 - int_0^y du/dx dy' (trapezoid in y, second-order differences in x)"""
    dudx = np.gradient(state.u, cfg.x, axis=0, edge_order=2)
    v0 = np.asarray(cfg.v0(cfg.x, state.t), dtype=float) * np.ones(cfg.nx)
    return v0[:, None] - cumulative_trapezoid(dudx, cfg.y, axis=1)


def continuity_residual(state: BLState, cfg: BLConfig) -> float:
    """max |du/dx + dv/dy| with the operators used by reconstruct_v"""
    dudx = np.gradient(state.u, cfg.x, axis=0, edge_order=2)
    dvdy = np.diff(state.v, axis=1) / np.diff(cfg.y)[None, :]
    return float(np.max(np.abs(dvdy + 0.5 * (dudx[:, 1:] + dudx[:, :-1]))))


def transport_substep(state: BLState, cfg: BLConfig, dt: float) -> BLState:
    """u_t + u u_x + v u_y + p_x = 0, first-order upwind; inflow column from u1

    Raises:
        StepTooLarge: if dt max(u)/dx + dt max|v|/dy > 1
        UpwindBreakdown: if u <= 0 at an interior node
    """
    u, v = state.u, state.v
    interior = u[1:, 1:-1]
    if np.any(interior <= 0.0):
        i, j = np.argwhere(interior <= 0.0)[0]
        raise UpwindBreakdown(float(cfg.x[i + 1]), float(cfg.y[j + 1])).at(state.t)
    courant = dt * np.max(u) / cfg.dx + dt * np.max(np.abs(v)) / cfg.dy
    if courant > 1.0:
        raise StepTooLarge(courant, 1.0).at(state.t)

    ux = (u[1:, 1:-1] - u[:-1, 1:-1]) / cfg.dx
    back = (u[1:, 1:-1] - u[1:, :-2]) / cfg.dy
    fwd = (u[1:, 2:] - u[1:, 1:-1]) / cfg.dy
    vc = v[1:, 1:-1]
    uy = np.where(vc > 0.0, back, fwd)

    t_new = state.t + dt
    U_new = np.asarray(cfg.U(cfg.x, t_new), dtype=float) * np.ones(cfg.nx)
    new = u.copy()
    new[1:, 1:-1] = interior - dt * (interior * ux + vc * uy + state.px[1:, None])
    new[:, 0] = 0.0
    new[:, -1] = U_new
    new[0, :] = cfg.u1(cfg.y, t_new)
    new[0, 0], new[0, -1] = 0.0, U_new[0]
    return state.copy(update={'u': new, 't': t_new, 'U': U_new})


def diffusion_substep(state: BLState, cfg: BLConfig, dt: float) -> BLState:
    """backward Euler for u_t = nu u_yy in every column but the inflow one"""
    if dt <= 0.0:
        raise InvalidArgument('dt must be positive')
    if cfg.nu == 0.0:
        return state
    r = cfg.nu * dt / cfg.dy ** 2
    m = cfg.ny - 2
    rhs = state.u[1:, 1:-1].T.copy()
    rhs[-1, :] += r * state.U[1:]
    rhs[0, :] += r * state.u[1:, 0]
    system = TridiagonalSystem(
        lower=np.full(m - 1, -r),
        diagonal=np.full(m, 1.0 + 2.0 * r),
        upper=np.full(m - 1, -r),
        rhs=rhs,
    )
    new = state.u.copy()
    new[1:, 1:-1] = solve_tridiagonal(system).T
    return state.copy(update={'u': new})


def stable_dt(state: BLState, cfg: BLConfig) -> float:
    """transport step with Courant number cfg.cfl for the current u and v"""
    rate = np.max(state.u) / cfg.dx + np.max(np.abs(state.v)) / cfg.dy
    return cfg.cfl / rate if rate > 0.0 else np.inf


def _lie_step(state: BLState, cfg: BLConfig, dt: float) -> BLState:
    state = transport_substep(state, cfg, dt)
    state = diffusion_substep(state, cfg, dt)
    state = state.copy(update={'px': pressure_gradient(cfg.U, cfg.x, state.t)})
    return state.copy(update={'v': reconstruct_v(state, cfg)})


def advance(state: BLState, cfg: BLConfig, dt: Optional[float] = None) -> BLState:
    """advance by dt, in equal Lie substeps whenever dt exceeds stable_dt

    Raises:
        StepTooLarge: if more than MAX_SUBSTEPS substeps would be needed
    """
    dt = cfg.dt if dt is None else dt
    if dt <= 0.0:
        raise InvalidArgument('dt must be positive')
    t_end = state.t + dt
    while t_end - state.t > 1e-12 * dt:
        remaining = t_end - state.t
        limit = stable_dt(state, cfg)
        substeps = max(int(np.ceil(remaining / limit)), 1)
        if substeps > MAX_SUBSTEPS:
            raise StepTooLarge(cfg.cfl * remaining / limit, cfg.cfl).at(state.t)
        if substeps > 1:
            logger.debug(f'{cfg.name}: dt={remaining:.4g} split into {substeps} at t={state.t:.4g}')
        state = _lie_step(state, cfg, remaining / substeps)
    return state


def min_shear(state: BLState, saturation: float = SATURATION) -> float:
    """min of du/dy over nodes below (1 - saturation) of the outer velocity"""
    dudy = np.gradient(state.u, state.y, axis=1, edge_order=2)
    active = state.u < (1.0 - saturation) * state.U[:, None]
    if not np.any(active):
        return float(np.min(dudy))
    return float(np.min(dudy[active]))


def wall_shear(state: BLState) -> np.ndarray:
    h = state.y[1] - state.y[0]
    u = state.u
    return (-3.0 * u[:, 0] + 4.0 * u[:, 1] - u[:, 2]) / (2.0 * h)


def displacement_thickness(state: BLState) -> np.ndarray:
    return trapezoid(1.0 - state.u / state.U[:, None], state.y, axis=1)


@lru_cache(maxsize=8)
def blasius_profile(ny: int = 1001, eta_max: float = 10.0, tol: float = 1e-10) -> BlasiusProfile:
    """shooting on f''(0) for f''' + f f'' / 2 = 0, f(0) = f'(0) = 0, f'(eta_max) = 1"""
    if ny < 100:
        raise InvalidArgument('Blasius profile needs at least 100 nodes')
    eta = np.linspace(0.0, eta_max, ny)
    h = eta[1] - eta[0]
    rhs = lambda _, y: np.array([y[1], y[2], -0.5 * y[0] * y[2]])

    def integrate(slope: float) -> np.ndarray:
        out = np.empty((ny, 3))
        out[0] = (0.0, 0.0, slope)
        for i in range(ny - 1):
            out[i + 1] = rk4_step(rhs, out[i], eta[i], h)
        return out

    wall_slope = bisect_root(lambda s: integrate(s)[-1, 1] - 1.0, 0.1, 1.0, tol)
    sol = integrate(wall_slope)
    logger.debug(f'Blasius wall slope {wall_slope:.8f}')
    return BlasiusProfile(
        eta=eta, f=sol[:, 0], fp=sol[:, 1], fpp=sol[:, 2], wall_slope=wall_slope
    )


def blasius_velocity(profile: BlasiusProfile, eta: np.ndarray) -> np.ndarray:
    """monotone, saturated f'(eta); 1 beyond the integration range"""
    fp = np.minimum(np.maximum.accumulate(profile.fp), 1.0)
    return np.interp(eta, profile.eta, fp, right=1.0)


def lipschitz_diagnostics(history: Sequence[BLState]) -> DiagnosticSeries:
    """sup |u_x|, |u_y|, |u_t| per stored state pair with running maxima"""
    if len(history) < 2:
        raise InvalidArgument('need at least 2 stored states')
    series = DiagnosticSeries(
        'lipschitz', ('t', 'dx_sup', 'dy_sup', 'dt_sup', 'dx_run', 'dy_run', 'dt_run')
    )
    running = np.zeros(3)
    for prev, cur in zip(history[:-1], history[1:]):
        sup = np.array(
            [
                np.max(np.abs(np.diff(cur.u, axis=0))) / (cur.x[1] - cur.x[0]),
                np.max(np.abs(np.diff(cur.u, axis=1))) / (cur.y[1] - cur.y[0]),
                np.max(np.abs(cur.u - prev.u)) / (cur.t - prev.t),
            ]
        )
        running = np.maximum(running, sup)
        series.append(cur.t, *sup, *running)
    return series


def run_boundary_layer(cfg: BLConfig, n_outputs: int = 30, trailing: float = 0.9) -> BLRun:
    """march to T recording shear, thickness and Lipschitz diagnostics

    Separation (reverse flow) freezes the run when cfg.allow_separation is set and is
    raised as UpwindBreakdown otherwise.
    """
    report = validate_data(cfg)
    x, y = cfg.x, cfg.y
    state = initial_state(cfg)
    tail = x >= trailing * cfg.L
    tau0 = wall_shear(state)
    every = max(cfg.steps // n_outputs, 1)
    history = DiagnosticSeries(
        cfg.name,
        ('t', 'min_shear', 'wall_shear_min', 'trailing_shear_ratio', 'u_min', 'u_max', 'delta_star_mid'),
        meta={'separated': False, 'separation_t': None, 'separation_x': None},
    )
    shear = DiagnosticSeries(cfg.name + '-wall-shear', ('t', 'x', 'wall_shear'))
    stored = [state]

    def record(s: BLState):
        tau = wall_shear(s)
        history.append(
            s.t,
            min_shear(s),
            float(np.min(tau)),
            float(np.min(tau[tail] / tau0[tail])),
            float(np.min(s.u)),
            float(np.max(s.u)),
            float(displacement_thickness(s)[cfg.nx // 2]),
        )
        for xi, ti in zip(x, tau):
            shear.append(s.t, xi, ti)

    record(state)
    separated = False
    for step in range(1, cfg.steps + 1):
        try:
            state = advance(state, cfg)
        except UpwindBreakdown as e:
            if not cfg.allow_separation:
                raise
            separated = True
            history.meta.update(
                {'separated': True, 'separation_t': state.t, 'separation_x': e.x}
            )
            logger.info(f'{cfg.name}: separation at t={state.t:.4g}, x={e.x:.4g}; run frozen')
            break
        if step % every == 0 or step == cfg.steps:
            record(state)
            stored.append(state)
    if stored[-1] is not state:
        record(state)
        stored.append(state)
    lipschitz = (
        lipschitz_diagnostics(stored)
        if len(stored) >= 2
        else DiagnosticSeries('lipschitz', ('t', 'dx_sup', 'dy_sup', 'dt_sup', 'dx_run', 'dy_run', 'dt_run'))
    )
    return BLRun(
        history=history,
        wall_shear=shear,
        lipschitz=lipschitz,
        final=state,
        report=report,
        separated=separated,
    )


# -- preset configurations ---------------------------------------------------------


def _blasius_sampler(U_edge: Callable, nu: float, x0: float, profile: BlasiusProfile):
    def u0(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        Ue = np.asarray(U_edge(x, 0.0), dtype=float) * np.ones_like(x)
        eta = y[None, :] / np.sqrt(nu * (x[:, None] + x0) / Ue[:, None])
        return Ue[:, None] * blasius_velocity(profile, eta)

    def u1(y: np.ndarray, t: float) -> np.ndarray:
        Ue = float(np.asarray(U_edge(np.zeros(1), t)).ravel()[0])
        return Ue * blasius_velocity(profile, y / np.sqrt(nu * x0 / Ue))

    return u0, u1


def _zero_v0(x: np.ndarray, t: float) -> np.ndarray:
    return np.zeros_like(x)


def favorable_config(
    nu: float = 0.01,
    L: float = 1.0,
    T: float = 3.0,
    y_max: float = 2.0,
    nx: int = 101,
    ny: int = 401,
    dt: float = 0.005,
    x0: float = 0.5,
    profile: Optional[BlasiusProfile] = None,
) -> BLConfig:
    """U = 1, px = 0, Blasius data with virtual origin -x0"""
    U = lambda x, t: np.ones_like(np.asarray(x, dtype=float))
    u0, u1 = _blasius_sampler(U, nu, x0, profile or blasius_profile())
    return BLConfig(
        name='prandtl-favorable', nu=nu, L=L, T=T, y_max=y_max, nx=nx, ny=ny, dt=dt,
        U=U, u0=u0, u1=u1, v0=_zero_v0, x0=x0,
    )


def adverse_config(
    nu: float = 0.01,
    L: float = 1.0,
    T: float = 1.5,
    y_max: float = 2.0,
    nx: int = 101,
    ny: int = 401,
    dt: float = 0.0025,
    x0: float = 0.5,
    deceleration: float = 0.5,
    profile: Optional[BlasiusProfile] = None,
) -> BLConfig:
    """linearly retarded outer flow U = 1 - deceleration x; reverse flow freezes the run"""
    U = lambda x, t: 1.0 - deceleration * np.asarray(x, dtype=float)
    u0, u1 = _blasius_sampler(U, nu, x0, profile or blasius_profile())
    return BLConfig(
        name='prandtl-adverse', nu=nu, L=L, T=T, y_max=y_max, nx=nx, ny=ny, dt=dt,
        U=U, u0=u0, u1=u1, v0=_zero_v0, x0=x0, allow_separation=True,
    )


def blasius_steady_config(
    nu: float = 0.01,
    L: float = 1.0,
    T: float = 6.0,
    y_max: float = 2.0,
    nx: int = 101,
    ny: int = 401,
    dt: float = 0.005,
    x0: float = 0.5,
    ramp: float = 1.0,
    profile: Optional[BlasiusProfile] = None,
) -> BLConfig:
    """U = 1 started from an error-function layer; relaxes to the Blasius layer fed at x = 0

    The inflow column starts on the error-function profile and blends into the Blasius
    profile over the first `ramp` time units, so u0 and u1 agree at t = 0.
    """
    if ramp < 0.0:
        raise InvalidArgument('ramp must be nonnegative')
    U = lambda x, t: np.ones_like(np.asarray(x, dtype=float))
    _, blasius_u1 = _blasius_sampler(U, nu, x0, profile or blasius_profile())

    def u0(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return erf(y[None, :] / (2.0 * np.sqrt(nu * (x[:, None] + x0))))

    def u1(y: np.ndarray, t: float) -> np.ndarray:
        s = min(t / ramp, 1.0) if ramp > 0.0 else 1.0
        s = s * s * (3.0 - 2.0 * s)
        start = erf(y / (2.0 * np.sqrt(nu * x0)))
        return (1.0 - s) * start + s * blasius_u1(y, t)

    return BLConfig(
        name='blasius-steady', nu=nu, L=L, T=T, y_max=y_max, nx=nx, ny=ny, dt=dt,
        U=U, u0=u0, u1=u1, v0=_zero_v0, x0=x0,
    )
