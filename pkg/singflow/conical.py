"""Supersonic flow past a circular cone with an attached shock.

The steady potential is written Phi = q0 z + phi.  The self-similar background has
Phi = z G(s), s = r / z, and is found by shooting on the shock angle.  Perturbed cones
r = b(z) are marched in z on the normalized strip xi = (r - b) / (S - b) between the body
and the fitted shock r = S(z).
"""
from logging import getLogger
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import Field, PrivateAttr, root_validator, validator
from scipy import optimize
from scipy.interpolate import CubicSpline

from .exceptions import (
    DetachedShock,
    GeometryCollapse,
    HyperbolicityLost,
    InadmissibleGeometry,
    InvalidArgument,
    NoBracket,
    NonFiniteState,
    NotSupersonic,
    NumericalError,
    ResolutionError,
    SolverFailure,
    StepTooLarge,
)
from .gas import (
    Freestream,
    GasModel,
    bernoulli_density,
    mach_slope,
    rh_downstream,
    sound_speed_sq_at,
)
from .models import SingModel
from .numerics import (
    cumulative_trapezoid,
    find_root,
    fit_loglog_slope,
    rk4_step,
    trapezoid,
)
from .series import DiagnosticSeries
from .types import FloatArray

__all__ = (
    'ConeGeometry',
    'AdmissibilityReport',
    'SelfSimilarSolution',
    'MarchState',
    'conical_rhs',
    'cone_slope_for_shock',
    'shock_slope_for_cone',
    'solve_self_similar',
    'similarity_residual',
    'polar_cone_angle',
    'polar_shock_angle',
    'check_cone_admissibility',
    'discrete_background',
    'initial_state',
    'suggested_dz',
    'march_step',
    'deviation_norm',
    'shock_mass_flux_jump',
    'body_mass_flux',
    'run_marching',
)

logger = getLogger('singflow')

DEFAULT_CFL = 0.4
CFL_LIMIT = 0.6
DEVIATION_FLOOR = 1e-11


class ConeGeometry(SingModel):
    """Body r = b0 z + db(z); db is a sampled perturbation, cubic in between, constant outside."""

    b0: float
    z_samples: FloatArray = Field(default_factory=lambda: np.zeros(0))
    perturbation: FloatArray = Field(default_factory=lambda: np.zeros(0))
    eps0: float = 0.5
    k1: int = 1
    k2: int = 2
    _spline_cache: Optional[CubicSpline] = PrivateAttr(None)

    @validator('b0')
    def _positive_slope(cls, v: float) -> float:
        if v <= 0.0:
            raise ValueError(f'cone slope must be positive, got {v}')
        return v

    @validator('eps0')
    def _nonnegative_bound(cls, v: float) -> float:
        if v < 0.0:
            raise ValueError('eps0 must be nonnegative')
        return v

    @root_validator(skip_on_failure=True)
    def _consistent_samples(cls, values: dict) -> dict:
        z, db = values['z_samples'], values['perturbation']
        if z.shape != db.shape or z.ndim != 1:
            raise ValueError('z_samples and perturbation must be vectors of equal length')
        if z.size == 1:
            raise ValueError('a sampled perturbation needs at least 2 samples')
        if z.size and (z[0] < 0.0 or np.any(np.diff(z) <= 0.0)):
            raise ValueError('perturbation stations must be nonnegative and increasing')
        if z.size and z[0] == 0.0 and db[0] != 0.0:
            raise ValueError('perturbation must vanish at the tip')
        if not 0 <= values['k1'] <= values['k2']:
            raise ValueError('orders must satisfy 0 <= k1 <= k2')
        return values

    @classmethod
    def exact(cls, b0: float, **kwargs) -> 'ConeGeometry':
        return cls(b0=b0, **kwargs)

    @classmethod
    def from_function(
        cls, b0: float, func: Callable, z_min: float, z_max: float, n: int = 401, **kwargs
    ) -> 'ConeGeometry':
        z = np.linspace(z_min, z_max, n)
        return cls(b0=b0, z_samples=z, perturbation=np.asarray(func(z), dtype=float), **kwargs)

    @classmethod
    def from_csv(cls, path: Union[str, Path], b0: float, **kwargs) -> 'ConeGeometry':
        """read columns ``z`` and ``db`` (perturbation b(z) - b0 z)"""
        frame = pd.read_csv(path)
        missing = {'z', 'db'} - set(frame.columns)
        if missing:
            raise InvalidArgument(f'perturbation CSV lacks columns {sorted(missing)}')
        return cls(
            b0=b0,
            z_samples=frame['z'].to_numpy(dtype=float),
            perturbation=frame['db'].to_numpy(dtype=float),
            **kwargs,
        )

    @property
    def is_exact(self) -> bool:
        return self.z_samples.size == 0 or not np.any(self.perturbation)

    def _spline(self) -> CubicSpline:
        if self._spline_cache is None:
            self._spline_cache = CubicSpline(
                self.z_samples, self.perturbation, bc_type='clamped'
            )
        return self._spline_cache

    def _db(self, z: float, nu: int) -> float:
        if self.is_exact:
            return 0.0
        lo, hi = self.z_samples[0], self.z_samples[-1]
        if z <= lo or z >= hi:
            if nu:
                return 0.0
            return float(self.perturbation[0] if z <= lo else self.perturbation[-1])
        return float(self._spline()(z, nu))

    def b(self, z: float) -> float:
        return self.b0 * z + self._db(z, 0)

    def bp(self, z: float) -> float:
        return self.b0 + self._db(z, 1)

    def bpp(self, z: float) -> float:
        return self._db(z, 2)

    def max_step(self, z: float) -> float:
        """sample spacing inside the perturbed range, inf elsewhere"""
        if self.is_exact or z >= self.z_samples[-1]:
            return np.inf
        return float(np.min(np.diff(self.z_samples)))


class AdmissibilityReport(SingModel):
    orders: List[float]
    eps0: float
    k1: int
    k2: int
    tip_clear: bool

    @property
    def passed(self) -> bool:
        return self.tip_clear and all(v <= self.eps0 for v in self.orders)


class SelfSimilarSolution(SingModel):
    """Conical background on the similarity grid s = r / z in [b0, tan(sigma)]."""

    freestream: Freestream
    gas: GasModel
    b0: float
    shock_slope: float
    s: FloatArray
    dr_phi: FloatArray
    dz_phi: FloatArray
    rho: FloatArray

    @root_validator(skip_on_failure=True)
    def _profiles(cls, values: dict) -> dict:
        s = values['s']
        if s.ndim != 1 or s.size < 3 or np.any(np.diff(s) <= 0.0):
            raise ValueError('similarity grid must be increasing with at least 3 nodes')
        for name in ('dr_phi', 'dz_phi', 'rho'):
            if values[name].shape != s.shape:
                raise ValueError(f'{name} does not match the similarity grid')
        if np.any(values['rho'] <= 0.0):
            raise ValueError('density must stay positive')
        return values

    @property
    def shock_angle(self) -> float:
        return float(np.degrees(np.arctan(self.shock_slope)))

    @property
    def xi(self) -> np.ndarray:
        return (self.s - self.s[0]) / (self.s[-1] - self.s[0])

    @property
    def u_r(self) -> np.ndarray:
        return self.dr_phi

    @property
    def u_z(self) -> np.ndarray:
        return self.dz_phi + self.freestream.q0

    def profiles_at_xi(self, xi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(dr_phi, dz_phi) at normalized positions between body and shock"""
        s = self.s[0] + np.asarray(xi) * (self.s[-1] - self.s[0])
        return (
            CubicSpline(self.s, self.dr_phi)(s),
            CubicSpline(self.s, self.dz_phi)(s),
        )


class MarchState(SingModel):
    z: float
    S: float
    Sp: float
    xi: FloatArray
    dr_phi: FloatArray
    dz_phi: FloatArray
    phi: FloatArray

    @root_validator(skip_on_failure=True)
    def _strip(cls, values: dict) -> dict:
        xi = values['xi']
        if xi.ndim != 1 or xi.size < 3 or xi[0] != 0.0 or xi[-1] != 1.0:
            raise ValueError('xi must run from 0 to 1 with at least 3 nodes')
        for name in ('dr_phi', 'dz_phi', 'phi'):
            if values[name].shape != xi.shape:
                raise ValueError(f'{name} does not match the xi grid')
        if values['z'] <= 0.0 or values['S'] <= 0.0:
            raise ValueError('station and shock radius must be positive')
        return values

    @property
    def n(self) -> int:
        return int(self.xi.size - 1)


# -- self-similar background -------------------------------------------------


def _crossflow(s: float, y: np.ndarray) -> float:
    G, w = y
    return w - s * (G - s * w)


def conical_rhs(s: float, y: np.ndarray, fs: Freestream, gas: GasModel) -> np.ndarray:
    """similarity-reduced potential equation for Phi = z G(s), y = (G, G')"""
    G, w = y
    uz = G - s * w
    c2 = sound_speed_sq_at(w * w + uz * uz, fs, gas)
    crossflow = w - s * uz
    return np.array([w, -c2 * w / (s * (c2 * (1.0 + s * s) - crossflow ** 2))])


def _shock_data(fs: Freestream, gas: GasModel, shock_slope: float) -> np.ndarray:
    post = rh_downstream(fs, gas, shock_slope)
    return np.array([fs.q0, post.u_r])


def cone_slope_for_shock(
    fs: Freestream, gas: GasModel, shock_slope: float, steps: int = 1000
) -> float:
    """body slope reached by inward integration from a front of the given slope

    Returns nan when the integration breaks down before the flow turns parallel to a ray.
    """
    rhs = lambda s, y: conical_rhs(s, y, fs, gas)
    s = float(shock_slope)
    y = _shock_data(fs, gas, s)
    if _crossflow(s, y) >= 0.0:
        return s
    h = s / steps
    try:
        while s > 1.5 * h:
            y_next = rk4_step(rhs, y, s, -h)
            if _crossflow(s - h, y_next) >= 0.0:
                s0, y0 = s, y
                partial = find_root(
                    lambda d: _crossflow(s0 - d, rk4_step(rhs, y0, s0, -d)), 1e-14 * h, h
                )
                return s0 - partial
            s, y = s - h, y_next
    except NumericalError as e:
        logger.debug(f'inward integration stopped at s={s:.6g}: {e}')
        return float('nan')
    return 0.0


def shock_slope_for_cone(
    fs: Freestream, gas: GasModel, b0: float, tol: float = 1e-10, scan: int = 90
) -> float:
    """tan of the weak attached shock angle of the cone r = b0 z

    Scans from the Mach angle towards 90 degrees for the first angle whose inward integration
    reaches the cone, then bisects; breakdowns near the Mach angle count as undershoots.

    Raises:
        NotSupersonic: if M0 <= 1
        DetachedShock: if no attached weak shock turns the flow by the cone angle
    """
    mach = fs.mach(gas)
    if mach <= 1.0:
        raise NotSupersonic(mach)
    if b0 <= 0.0 or tol <= 0.0:
        raise InvalidArgument('cone slope and tolerance must be positive')
    angles = np.linspace(float(np.arcsin(1.0 / mach)), 0.5 * np.pi - 1e-3, scan + 1)

    def miss(sigma: float) -> float:
        return cone_slope_for_shock(fs, gas, float(np.tan(sigma))) - b0

    for lo, hi in zip(angles[:-1], angles[1:]):
        value = miss(hi)
        if not np.isnan(value) and value >= 0.0:
            sigma = _bisect_up(miss, lo, hi, tol)
            logger.info(f'shock angle {np.degrees(sigma):.6f} deg for cone slope {b0:.6g}')
            return float(np.tan(sigma))
    raise DetachedShock(f'no attached shock for cone slope {b0:.6g} at M0={mach:.6g}')


def solve_self_similar(
    fs: Freestream,
    gas: GasModel,
    b0: float,
    tol: float = 1e-10,
    n: int = 401,
    scan: int = 90,
) -> SelfSimilarSolution:
    """shoot on the shock angle until the flow is tangent to the cone r = b0 z

    Args:
        fs (Freestream): upstream state
        gas (GasModel): polytropic gas
        b0 (float): cone slope tan(half angle)
        tol (float, optional): tolerance on the shock angle. Defaults to 1e-10.
        n (int, optional): profile nodes. Defaults to 401.
        scan (int, optional): bracketing samples between the Mach angle and 90 degrees.

    Raises:
        NotSupersonic: if M0 <= 1
        DetachedShock: if no attached weak shock turns the flow by the cone angle

    Returns:
        SelfSimilarSolution: background profiles
    """
    if n < 3:
        raise InvalidArgument('profiles need at least 3 nodes')
    shock_slope = shock_slope_for_cone(fs, gas, b0, tol, scan)
    return _profiles(fs, gas, b0, shock_slope, n)


def _bisect_up(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """bisection for f increasing through zero on [lo, hi]; nan counts as below the root"""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        value = f(mid)
        if np.isnan(value) or value < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _profiles(
    fs: Freestream, gas: GasModel, b0: float, shock_slope: float, n: int
) -> SelfSimilarSolution:
    rhs = lambda s, y: conical_rhs(s, y, fs, gas)
    s = np.linspace(b0, shock_slope, n)
    h = s[1] - s[0]
    ys = np.empty((n, 2))
    ys[-1] = _shock_data(fs, gas, shock_slope)
    for i in range(n - 1, 0, -1):
        ys[i - 1] = rk4_step(rhs, ys[i], s[i], -h)
    G, w = ys[:, 0], ys[:, 1]
    uz = G - s * w
    rho = bernoulli_density(w * w + uz * uz, fs, gas)
    return SelfSimilarSolution(
        freestream=fs,
        gas=gas,
        b0=b0,
        shock_slope=shock_slope,
        s=s,
        dr_phi=w,
        dz_phi=uz - fs.q0,
        rho=rho,
    )


def similarity_residual(solution: SelfSimilarSolution) -> float:
    """max central-difference residual of D w' + c^2 w / s on interior nodes"""
    fs, gas = solution.freestream, solution.gas
    s, w, uz = solution.s, solution.u_r, solution.u_z
    c2 = sound_speed_sq_at(w * w + uz * uz, fs, gas)
    crossflow = w - s * uz
    D = c2 * (1.0 + s * s) - crossflow ** 2
    dw = (w[2:] - w[:-2]) / (s[2:] - s[:-2])
    residual = D[1:-1] * dw + c2[1:-1] * w[1:-1] / s[1:-1]
    return float(np.max(np.abs(residual)))


def _polar_rhs(theta: float, y: np.ndarray, fs: Freestream, gas: GasModel) -> np.ndarray:
    vr, vt = y
    c2 = sound_speed_sq_at(vr * vr + vt * vt, fs, gas)
    cot = np.cos(theta) / np.sin(theta)
    return np.array([vt, (vt * vt * vr - c2 * (2.0 * vr + vt * cot)) / (c2 - vt * vt)])


def polar_cone_angle(fs: Freestream, gas: GasModel, shock_angle: float, steps: int = 2000) -> float:
    """cone half angle (radians) behind a front of the given angle, from the polar form

    Integrates (V_r, V_theta) in the polar angle from the front inward until V_theta = 0;
    nan when the integration breaks down first.
    """
    post = rh_downstream(fs, gas, float(np.tan(shock_angle)))
    rhs = lambda theta, y: _polar_rhs(theta, y, fs, gas)
    y = np.array([post.tangential_speed, -post.normal_speed])
    theta, h = float(shock_angle), shock_angle / steps
    try:
        while theta > 1.5 * h:
            y_next = rk4_step(rhs, y, theta, -h)
            if y_next[1] >= 0.0:
                t0, y0 = theta, y
                return t0 - find_root(lambda d: rk4_step(rhs, y0, t0, -d)[1], 1e-14 * h, h)
            theta, y = theta - h, y_next
    except NumericalError as e:
        logger.debug(f'polar integration stopped at theta={theta:.6g}: {e}')
    return float('nan')


def polar_shock_angle(
    fs: Freestream, gas: GasModel, b0: float, tol: float = 1e-10, scan: int = 90
) -> float:
    """attached shock angle in degrees for the cone r = b0 z, solved in polar variables

    Independent of the similarity-variable shooting of solve_self_similar; used to cross-check it.
    """
    mach = fs.mach(gas)
    if mach <= 1.0:
        raise NotSupersonic(mach)
    cone = float(np.arctan(b0))
    angles = np.linspace(float(np.arcsin(1.0 / mach)), 0.5 * np.pi - 1e-3, scan + 1)
    miss = lambda sigma: polar_cone_angle(fs, gas, sigma) - cone
    prev = angles[0]
    for angle in angles[1:]:
        value = miss(angle)
        if not np.isnan(value) and value >= 0.0:
            return float(np.degrees(_bisect_up(miss, prev, angle, tol)))
        prev = angle
    raise DetachedShock(f'no attached shock for cone slope {b0:.6g} at M0={mach:.6g}')


def check_cone_admissibility(geom: ConeGeometry) -> AdmissibilityReport:
    """max |z^k d^k/dz^k (b - b0 z)| for k <= k2 on the sampled range"""
    if geom.z_samples.size == 0:
        return AdmissibilityReport(
            orders=[0.0] * (geom.k2 + 1), eps0=geom.eps0, k1=geom.k1, k2=geom.k2, tip_clear=True
        )
    if geom.z_samples.size < geom.k2 + 3:
        raise ResolutionError(
            f'{geom.z_samples.size} samples cannot resolve derivatives up to order {geom.k2}'
        )
    z, deriv = geom.z_samples, geom.perturbation.copy()
    orders = []
    for k in range(geom.k2 + 1):
        if k:
            deriv = np.gradient(deriv, z, edge_order=2)
        orders.append(float(np.max(np.abs(z ** k * deriv))))
    tip_clear = bool(geom.perturbation[0] == 0.0)
    return AdmissibilityReport(
        orders=orders, eps0=geom.eps0, k1=geom.k1, k2=geom.k2, tip_clear=tip_clear
    )


# -- z-marching -----------------------------------------------------------------


class _Strip(object):
    """Semi-discrete characteristic form of the potential equation on the xi strip."""

    def __init__(self, fs: Freestream, gas: GasModel, geom: ConeGeometry, xi: np.ndarray):
        self.fs = fs
        self.gas = gas
        self.geom = geom
        self.xi = xi
        self.n = xi.size - 1
        self.dxi = 1.0 / self.n

    def split(self, Y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float, float]:
        m = self.n + 1
        return Y[:m], Y[m : 2 * m], float(Y[-2]), float(Y[-1])

    def characteristics(self, a: np.ndarray, w: np.ndarray) -> dict:
        c2 = sound_speed_sq_at(a * a + w * w, self.fs, self.gas)
        if np.any(w <= 0.0) or np.any(w * w <= c2):
            raise HyperbolicityLost()
        den = w * w - c2
        root = np.sqrt(c2 * (a * a + w * w - c2))
        m22 = 2.0 * a * w / den
        lam_p = (a * w + root) / den
        lam_m = (a * w - root) / den
        return {
            'c2': c2,
            'den': den,
            'lam_p': lam_p,
            'lam_m': lam_m,
            'l_p': m22 - lam_p,
            'l_m': m22 - lam_m,
        }

    def speeds(self, z: float, S: float, Sp: float, ch: dict) -> Tuple[np.ndarray, np.ndarray]:
        b, bp = self.geom.b(z), self.geom.bp(z)
        width = S - b
        if width <= 0.0:
            raise GeometryCollapse()
        kappa = bp + self.xi * (Sp - bp)
        return (ch['lam_p'] - kappa) / width, (ch['lam_m'] - kappa) / width

    def _upwind(self, U: np.ndarray, mu: np.ndarray) -> np.ndarray:
        h = self.dxi
        back = np.empty_like(U)
        fwd = np.empty_like(U)
        back[2:] = (3.0 * U[2:] - 4.0 * U[1:-1] + U[:-2]) / (2.0 * h)
        back[1] = (U[1] - U[0]) / h
        back[0] = (U[1] - U[0]) / h
        fwd[:-2] = (-3.0 * U[:-2] + 4.0 * U[1:-1] - U[2:]) / (2.0 * h)
        fwd[-2] = (U[-1] - U[-2]) / h
        fwd[-1] = (U[-1] - U[-2]) / h
        return np.where(mu > 0.0, back, fwd)

    def family_terms(self, z: float, Y: np.ndarray) -> dict:
        a, w, S, Sp = self.split(Y)
        ch = self.characteristics(a, w)
        mu_p, mu_m = self.speeds(z, S, Sp, ch)
        r = self.geom.b(z) + self.xi * (S - self.geom.b(z))
        F2 = ch['c2'] * a / (r * ch['den'])
        out = {'a': a, 'w': w, 'S': S, 'Sp': Sp, 'mu_p': mu_p, 'mu_m': mu_m}
        for tag, mu, l1 in (('p', mu_p, ch['l_p']), ('m', mu_m, ch['l_m'])):
            da, dw = self._upwind(a, mu), self._upwind(w, mu)
            out[f'W_{tag}'] = F2 - mu * (l1 * da + dw)
            out[f'l_{tag}'] = l1
            out[f'lam_{tag}'] = ch[f'lam_{tag}']
        return out

    def rh_velocity(self, t: float) -> np.ndarray:
        post = rh_downstream(self.fs, self.gas, t)
        return np.array([post.u_r, post.u_z])

    def rh_derivative(self, t: float) -> np.ndarray:
        h = 1e-6 * max(1.0, abs(t))
        return (self.rh_velocity(t + h) - self.rh_velocity(t - h)) / (2.0 * h)

    def rhs(self, z: float, Y: np.ndarray) -> np.ndarray:
        T = self.family_terms(z, Y)
        a, w = T['a'], T['w']
        # r = (1, -lam), l = (m22 - lam, 1), l.r = m22 - 2 lam
        lr_p = T['l_p'] - T['lam_p']
        lr_m = T['l_m'] - T['lam_m']
        cp = T['W_p'] / lr_p
        cm = T['W_m'] / lr_m
        a_z = cp + cm
        w_z = -T['lam_p'] * cp - T['lam_m'] * cm

        bp, bpp = self.geom.bp(z), self.geom.bpp(z)
        l1 = T['l_m'][0]
        w_z[0] = (T['W_m'][0] - l1 * bpp * w[0]) / (l1 * bp + 1.0)
        a_z[0] = bpp * w[0] + bp * w_z[0]

        dU = self.rh_derivative(T['Sp'])
        l1 = T['l_p'][-1]
        t_z = T['W_p'][-1] / (l1 * dU[0] + dU[1])
        a_z[-1], w_z[-1] = dU * t_z
        return np.concatenate([a_z, w_z, [T['Sp'], t_z]])

    def project(self, z: float, Y: np.ndarray) -> np.ndarray:
        """body tangency at xi = 0, jump relations at xi = 1, keeping incoming characteristics"""
        a, w, S, Sp = self.split(Y)
        a, w = a.copy(), w.copy()
        ch = self.characteristics(a, w)
        bp = self.geom.bp(z)
        l1 = ch['l_m'][0]
        w[0] = (l1 * a[0] + w[0]) / (l1 * bp + 1.0)
        a[0] = bp * w[0]

        l1 = ch['l_p'][-1]
        target = l1 * a[-1] + w[-1]

        def mismatch(t: float) -> float:
            u = self.rh_velocity(t)
            return l1 * u[0] + u[1] - target

        t = _expanding_root(mismatch, Sp, mach_slope(self.fs, self.gas))
        a[-1], w[-1] = self.rh_velocity(t)
        return np.concatenate([a, w, [S, t]])


def _expanding_root(f: Callable[[float], float], guess: float, floor: float) -> float:
    width = 1e-4 * max(abs(guess), 1e-3)
    for _ in range(40):
        lo, hi = max(guess - width, floor), guess + width
        try:
            return find_root(f, lo, hi, tol=1e-15)
        except NoBracket:
            width *= 2.0
    raise SolverFailure(f'shock slope projection failed near {guess:.6g}')


def _pack(state: MarchState, q0: float) -> np.ndarray:
    return np.concatenate([state.dr_phi, state.dz_phi + q0, [state.S, state.Sp]])


def _unpack(strip: _Strip, z: float, Y: np.ndarray, q0: float) -> MarchState:
    if not np.all(np.isfinite(Y)):
        raise NonFiniteState(f'non-finite march state at z={z:.6g}')
    a, w, S, Sp = strip.split(Y)
    width = S - strip.geom.b(z)
    if width <= 0.0:
        raise GeometryCollapse().at(z)
    phi = -width * (trapezoid(a, strip.xi) - cumulative_trapezoid(a, strip.xi))
    phi[-1] = 0.0
    return MarchState(z=z, S=S, Sp=Sp, xi=strip.xi, dr_phi=a, dz_phi=w - q0, phi=phi)


def _strip_for(state: MarchState, background: SelfSimilarSolution, geom: ConeGeometry) -> _Strip:
    return _Strip(background.freestream, background.gas, geom, state.xi)


def initial_state(
    background: SelfSimilarSolution, geom: ConeGeometry, z: float, n: Optional[int] = None
) -> MarchState:
    """background profiles placed between b(z) and the conical shock S = z tan(sigma)"""
    if z <= 0.0:
        raise InvalidArgument('marching starts at z > 0')
    n = n or background.s.size - 1
    xi = np.linspace(0.0, 1.0, n + 1)
    if n == background.s.size - 1:
        dr_phi, dz_phi = background.dr_phi.copy(), background.dz_phi.copy()
    else:
        dr_phi, dz_phi = background.profiles_at_xi(xi)
    q0 = background.freestream.q0
    S = z * background.shock_slope
    strip = _Strip(background.freestream, background.gas, geom, xi)
    Y = np.concatenate([dr_phi, dz_phi + q0, [S, background.shock_slope]])
    if geom.b(z) >= S:
        raise GeometryCollapse().at(z)
    Y = strip.project(z, Y)
    return _unpack(strip, z, Y, q0)


def suggested_dz(
    state: MarchState,
    background: SelfSimilarSolution,
    geom: ConeGeometry,
    cfl: float = DEFAULT_CFL,
) -> float:
    strip = _strip_for(state, background, geom)
    a, w = state.dr_phi, state.dz_phi + background.freestream.q0
    try:
        ch = strip.characteristics(a, w)
        mu_p, mu_m = strip.speeds(state.z, state.S, state.Sp, ch)
    except NumericalError as e:
        raise e.at(state.z)
    speed = float(np.max(np.maximum(np.abs(mu_p), np.abs(mu_m))))
    return cfl * strip.dxi / speed


def march_step(
    state: MarchState,
    background: SelfSimilarSolution,
    geom: ConeGeometry,
    dz: float,
    cfl_limit: float = CFL_LIMIT,
) -> MarchState:
    """advance the strip from z to z + dz

    Raises:
        StepTooLarge: if dz breaks the characteristic CFL bound
        HyperbolicityLost: if q0 + dz_phi drops to the sound speed
        GeometryCollapse: if the shock meets the body
    """
    if dz <= 0.0:
        raise InvalidArgument('dz must be positive')
    courant = dz / suggested_dz(state, background, geom, cfl=1.0)
    if courant > cfl_limit:
        raise StepTooLarge(courant, cfl_limit).at(state.z)
    strip = _strip_for(state, background, geom)
    q0 = background.freestream.q0
    z_new = state.z + dz
    try:
        Y = rk4_step(strip.rhs, _pack(state, q0), state.z, dz)
        if Y[-2] <= geom.b(z_new):
            raise GeometryCollapse()
        Y = strip.project(z_new, Y)
        new_state = _unpack(strip, z_new, Y, q0)
        strip.characteristics(new_state.dr_phi, new_state.dz_phi + q0)
    except NumericalError as e:
        raise e.at(e.station if e.station is not None else z_new)
    return new_state


def deviation_norm(state: MarchState, background: SelfSimilarSolution) -> float:
    """max_xi (|d dr_phi| + |d dz_phi|) + |S / z - shock_slope|"""
    dr_bg, dz_bg = background.profiles_at_xi(state.xi)
    fields = np.max(np.abs(state.dr_phi - dr_bg) + np.abs(state.dz_phi - dz_bg))
    return float(fields + abs(state.S / state.z - background.shock_slope))


def shock_mass_flux_jump(state: MarchState, background: SelfSimilarSolution) -> float:
    fs, gas = background.freestream, background.gas
    sigma = np.arctan(state.Sp)
    a, w = state.dr_phi[-1], state.dz_phi[-1] + fs.q0
    un = -a * np.cos(sigma) + w * np.sin(sigma)
    rho = float(bernoulli_density(a * a + w * w, fs, gas))
    return float(rho * un - fs.rho0 * fs.q0 * np.sin(sigma))


def body_mass_flux(
    state: MarchState, background: SelfSimilarSolution, geom: ConeGeometry
) -> float:
    fs, gas = background.freestream, background.gas
    a, w = state.dr_phi[0], state.dz_phi[0] + fs.q0
    bp = geom.bp(state.z)
    rho = float(bernoulli_density(a * a + w * w, fs, gas))
    return float(rho * (a - bp * w) / np.sqrt(1.0 + bp * bp))


# -- discrete background --------------------------------------------------------


def discrete_background(background: SelfSimilarSolution, n: int) -> SelfSimilarSolution:
    """steady state of the marching discretization for the exact cone on n xi-intervals"""
    fs, gas = background.freestream, background.gas
    geom = ConeGeometry.exact(background.b0)
    xi = np.linspace(0.0, 1.0, n + 1)
    strip = _Strip(fs, gas, geom, xi)
    dr_phi, dz_phi = background.profiles_at_xi(xi)
    x0 = np.concatenate([dr_phi, dz_phi + fs.q0, [background.shock_slope]])
    m = n + 1

    def residual(x: np.ndarray) -> np.ndarray:
        sigma = x[-1]
        Y = np.concatenate([x[:-1], [sigma, sigma]])
        T = strip.family_terms(1.0, Y)
        a, w = T['a'], T['w']
        lr_p = T['l_p'] - T['lam_p']
        lr_m = T['l_m'] - T['lam_m']
        cp, cm = T['W_p'] / lr_p, T['W_m'] / lr_m
        a_z = cp + cm
        w_z = -T['lam_p'] * cp - T['lam_m'] * cm
        u_shock = strip.rh_velocity(sigma)
        return np.concatenate(
            [
                a_z[1:-1],
                w_z[1:-1],
                [a[0] - background.b0 * w[0], T['W_m'][0]],
                [a[-1] - u_shock[0], w[-1] - u_shock[1], T['W_p'][-1]],
            ]
        )

    sol = optimize.root(residual, x0, method='hybr', options={'xtol': 1e-14})
    miss = float(np.max(np.abs(residual(sol.x))))
    if miss > 1e-8:
        raise SolverFailure(f'discrete background did not converge (residual {miss:.3g})')
    if not sol.success:
        logger.warning(f'discrete background: {sol.message} (residual {miss:.3g})')
    sigma = float(sol.x[-1])
    a, w = sol.x[:m], sol.x[m : 2 * m]
    s = background.b0 + xi * (sigma - background.b0)
    logger.debug(
        f'discrete background on {n} intervals: shock slope {sigma:.10f} '
        f'(ode {background.shock_slope:.10f})'
    )
    return SelfSimilarSolution(
        freestream=fs,
        gas=gas,
        b0=background.b0,
        shock_slope=sigma,
        s=s,
        dr_phi=a,
        dz_phi=w - fs.q0,
        rho=bernoulli_density(a * a + w * w, fs, gas),
    )


# -- runs ------------------------------------------------------------------------


def _log_stations(z_start: float, z_end: float, per_decade: int) -> np.ndarray:
    decades = np.log10(z_end / z_start)
    count = max(int(np.ceil(decades * per_decade)), 1)
    return z_start * np.logspace(0.0, decades, count + 1)


def run_marching(
    fs: Freestream,
    gas: GasModel,
    geom: ConeGeometry,
    z_start: float = 1.0,
    z_end: float = 1000.0,
    n: int = 40,
    cfl: float = DEFAULT_CFL,
    samples_per_decade: int = 10,
    fit_window: Sequence[float] = (10.0, 1000.0),
    reference: str = 'discrete',
    start_from: Optional[str] = None,
    strict: bool = True,
    background: Optional[SelfSimilarSolution] = None,
) -> DiagnosticSeries:
    """march from z_start to z_end and record the deviation from the conical flow

    Args:
        fs (Freestream): upstream state
        gas (GasModel): polytropic gas
        geom (ConeGeometry): body
        z_start (float, optional): first station. Defaults to 1.0.
        z_end (float, optional): last station. Defaults to 1000.0.
        n (int, optional): xi intervals. Defaults to 40.
        cfl (float, optional): fraction of the characteristic step bound. Defaults to 0.4.
        samples_per_decade (int, optional): log-spaced output stations. Defaults to 10.
        fit_window (Sequence[float], optional): z range of the slope fit.
        reference (str, optional): 'discrete' or 'ode' background for deviations.
        start_from (Optional[str], optional): background used for the initial strip,
            defaults to the reference.
        strict (bool, optional): raise InadmissibleGeometry for a failed smallness check and
            NumericalError from the march; otherwise the first is logged and a march failure
            is stored in meta['failure'] and meta['failure_station'], ending the series.
        background (Optional[SelfSimilarSolution], optional): precomputed ODE background.

    Raises:
        InadmissibleGeometry: if strict and the perturbation fails the smallness check
        NumericalError: if strict, from march_step with the failing station attached

    Returns:
        DiagnosticSeries: columns z, deviation, shock_slope
    """
    if reference not in ('discrete', 'ode'):
        raise InvalidArgument(f'unknown reference - {reference}')
    if not 0.0 < z_start < z_end:
        raise InvalidArgument('need 0 < z_start < z_end')
    report = check_cone_admissibility(geom)
    if not report.passed:
        if strict:
            raise InadmissibleGeometry()
        logger.warning(f'perturbation fails the smallness check: {report.orders}')
    ode_bg = background or solve_self_similar(fs, gas, geom.b0)
    discrete_bg = discrete_background(ode_bg, n)
    ref_bg = discrete_bg if reference == 'discrete' else ode_bg
    start_bg = {'discrete': discrete_bg, 'ode': ode_bg, None: ref_bg}[start_from]

    state = initial_state(start_bg, geom, z_start, n)
    stations = _log_stations(z_start, z_end, samples_per_decade)
    series = DiagnosticSeries(
        'conical',
        ('z', 'deviation', 'shock_slope'),
        meta={
            'shock_angle_deg': ode_bg.shock_angle,
            'reference_shock_slope': ref_bg.shock_slope,
            'initial_discretization_error': deviation_norm(
                initial_state(discrete_bg, geom, z_start, n), ode_bg
            ),
            'fit_window': list(fit_window),
            'n': n,
            'failure': None,
            'failure_station': None,
        },
    )
    series.append(state.z, deviation_norm(state, ref_bg), state.S / state.z)
    steps = 0
    for target in stations[1:]:
        try:
            while state.z < target * (1.0 - 1e-12):
                dz = min(
                    suggested_dz(state, ref_bg, geom, cfl),
                    target - state.z,
                    geom.max_step(state.z),
                )
                state = march_step(state, ref_bg, geom, dz)
                steps += 1
        except NumericalError as e:
            if strict:
                raise
            series.meta.update({'failure': f'{type(e).__name__}: {e}', 'failure_station': e.station})
            logger.warning(f'march stopped at z={e.station}: {series.meta["failure"]}')
            break
        series.append(state.z, deviation_norm(state, ref_bg), state.S / state.z)
    logger.info(f'marched to z={state.z:.6g} in {steps} steps')

    z, dev = series['z'], series['deviation']
    lo, hi = fit_window
    mask = (z >= lo * (1 - 1e-9)) & (z <= hi * (1 + 1e-9)) & (dev > DEVIATION_FLOOR)
    fitted = fit_loglog_slope(list(zip(z[mask], dev[mask]))) if mask.sum() >= 2 else float('nan')
    series.meta['fitted_slope'] = fitted
    series.meta['steps'] = steps
    return series
