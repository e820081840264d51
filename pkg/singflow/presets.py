"""Experiment presets: each runs a module pipeline at a resolution multiplier and returns its
diagnostic series together with the assertions evaluated on them."""
import operator
from logging import getLogger
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import axisym, conical, prandtl, vortex
from .exceptions import InvalidArgument, UnknownPreset
from .gas import Freestream, GasModel, mach_slope
from .models import SingModel
from .reductions import (
    AbsMax,
    BasicDefaultReduction,
    Count,
    First,
    Last,
    Max,
    MaxIncrement,
    Min,
    Ratio,
    RelativeDrift,
    Spread,
)
from .series import DiagnosticSeries

__all__ = (
    'Assertion',
    'AssertionResult',
    'PresetOutput',
    'Preset',
    'register_preset',
    'get_preset',
    'list_presets',
)

logger = getLogger('singflow')

COMPARATORS = {
    '<': operator.lt,
    '<=': operator.le,
    '>': operator.gt,
    '>=': operator.ge,
}

_PRESETS: Dict[str, 'Preset'] = {}


class AssertionResult(SingModel):
    name: str
    series: str
    value: float
    comparator: str
    threshold: float
    passed: bool


class Assertion(object):
    """reduction(series) <comparator> threshold"""

    def __init__(
        self,
        name: str,
        series: str,
        reduction: BasicDefaultReduction,
        comparator: str,
        threshold: float,
    ):
        if comparator not in COMPARATORS:
            raise InvalidArgument(f'unknown comparator - {comparator}')
        self.name = name
        self.series = series
        self.reduction = reduction
        self.comparator = comparator
        self.threshold = float(threshold)

    def evaluate(self, outputs: Dict[str, DiagnosticSeries]) -> AssertionResult:
        value = float(self.reduction.reduce(outputs[self.series]))
        passed = bool(np.isfinite(value) and COMPARATORS[self.comparator](value, self.threshold))
        return AssertionResult(
            name=self.name,
            series=self.series,
            value=value,
            comparator=self.comparator,
            threshold=self.threshold,
            passed=passed,
        )


class PresetOutput(object):
    def __init__(self, series: Dict[str, DiagnosticSeries], assertions: List[Assertion]):
        self.series = series
        self.assertions = assertions

    def evaluate(self) -> List[AssertionResult]:
        return [a.evaluate(self.series) for a in self.assertions]


class Preset(SingModel):
    name: str
    description: str
    defaults: Dict[str, Any]
    runner: Callable

    def effective_params(self, overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        overrides = dict(overrides or {})
        unknown = sorted(set(overrides) - set(self.defaults))
        if unknown:
            raise InvalidArgument(
                f'unknown parameters for {self.name}: {unknown}, expected some of {sorted(self.defaults)}'
            )
        params = dict(self.defaults)
        for key, value in overrides.items():
            default = self.defaults[key]
            if isinstance(default, (list, tuple)):
                value = type(default)(value)
            elif isinstance(default, bool):
                value = bool(value)
            elif isinstance(default, (int, float)):
                value = type(default)(value)
            params[key] = value
        return params

    def run(self, params: Dict[str, Any], resolution: int = 1, seed: int = 12345) -> PresetOutput:
        return self.runner(params, resolution, seed)


def register_preset(name: str, description: str, **defaults) -> Callable:
    def decorator(func: Callable) -> Callable:
        _PRESETS[name] = Preset(name=name, description=description, defaults=defaults, runner=func)
        return func

    return decorator


def get_preset(name: str) -> Preset:
    try:
        return _PRESETS[name]
    except KeyError:
        raise UnknownPreset(name, list_presets())


def list_presets() -> List[str]:
    return sorted(_PRESETS)


# -- conical ---------------------------------------------------------------------------


def _gas_and_stream(p: Dict[str, Any]):
    gas = GasModel(gamma=p['gamma'], A=p['A'])
    return gas, Freestream(q0=p['q0'], rho0=p['rho0'])


def _profile_series(bg: conical.SelfSimilarSolution, name: str) -> DiagnosticSeries:
    return DiagnosticSeries(
        name,
        ('s', 'dr_phi', 'dz_phi', 'rho'),
        np.column_stack([bg.s, bg.dr_phi, bg.dz_phi, bg.rho]),
        meta={'shock_slope': bg.shock_slope, 'shock_angle_deg': bg.shock_angle},
    )


_CONICAL = dict(gamma=1.4, q0=3.0, rho0=1.0, A=1.0 / 1.4, cone_angle_deg=10.0)


@register_preset(
    'conical-selfsimilar',
    'conical background: polar cross-check, residual order, Mach-angle limit, persistence',
    nodes=201,
    z_end=100.0,
    march_n=40,
    mach_limit_slopes=[4e-3, 2e-3, 1e-3],
    **_CONICAL,
)
def conical_selfsimilar(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    gas, fs = _gas_and_stream(p)
    b0 = float(np.tan(np.radians(p['cone_angle_deg'])))
    nodes = (p['nodes'] - 1) * resolution + 1
    bg = conical.solve_self_similar(fs, gas, b0, n=nodes)

    oracle = conical.polar_shock_angle(fs, gas, b0)
    check = DiagnosticSeries(
        'shock-angle',
        ('cone_angle_deg', 'shock_angle_deg', 'polar_angle_deg', 'difference_deg'),
        [(p['cone_angle_deg'], bg.shock_angle, oracle, abs(bg.shock_angle - oracle))],
    )

    residuals = DiagnosticSeries('residual', ('nodes', 'residual'))
    for n in (nodes, 2 * nodes - 1):
        sol = bg if n == nodes else conical.solve_self_similar(fs, gas, b0, n=n)
        residuals.append(n, conical.similarity_residual(sol))

    mu = float(np.degrees(np.arctan(mach_slope(fs, gas))))
    limit = DiagnosticSeries('mach-limit', ('b0', 'shock_angle_deg', 'mach_angle_deg', 'gap_deg'))
    for slope in p['mach_limit_slopes']:
        angle = float(np.degrees(np.arctan(conical.shock_slope_for_cone(fs, gas, slope))))
        limit.append(slope, angle, mu, angle - mu)

    march = conical.run_marching(
        fs,
        gas,
        conical.ConeGeometry.exact(b0),
        z_end=p['z_end'],
        n=p['march_n'] * resolution,
        reference='ode',
        fit_window=(1.0, p['z_end']),
        background=bg,
    )
    floor = march.meta['initial_discretization_error']
    return PresetOutput(
        {
            'background': _profile_series(bg, 'background'),
            'shock-angle': check,
            'residual': residuals,
            'mach-limit': limit,
            'persistence': march,
        },
        [
            Assertion('polar cross-check (deg)', 'shock-angle', Max('difference_deg'), '<=', 0.1),
            Assertion(
                'residual order under grid doubling',
                'residual',
                Ratio(First('residual'), Last('residual')),
                '>=',
                3.0,
            ),
            Assertion('Mach-angle limit (deg)', 'mach-limit', Last('gap_deg'), '<=', 0.05),
            Assertion('monotone approach to the Mach angle', 'mach-limit', MaxIncrement('gap_deg'), '<=', 0.0),
            Assertion('self-similar persistence', 'persistence', Max('deviation'), '<=', 10.0 * floor),
        ],
    )


def _bump(eps: float, z0: float, z1: float) -> Callable:
    def db(z: np.ndarray) -> np.ndarray:
        u = np.clip((z - z0) / (z1 - z0), 0.0, 1.0)
        return eps * np.sin(np.pi * u) ** 4

    return db


@register_preset(
    'conical-perturbed',
    'compactly supported cone perturbation: deviation decay rate over z in [10, 1000]',
    eps=0.002,
    bump_start=1.0,
    bump_end=2.0,
    bump_samples=401,
    eps0=0.5,
    k2=2,
    z_end=1000.0,
    march_n=40,
    fit_start=10.0,
    max_slope=-0.2,
    **_CONICAL,
)
def conical_perturbed(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    gas, fs = _gas_and_stream(p)
    b0 = float(np.tan(np.radians(p['cone_angle_deg'])))
    geom = conical.ConeGeometry.from_function(
        b0,
        _bump(p['eps'], p['bump_start'], p['bump_end']),
        p['bump_start'],
        p['bump_end'],
        n=p['bump_samples'],
        eps0=p['eps0'],
        k2=p['k2'],
    )
    report = conical.check_cone_admissibility(geom)
    admissibility = DiagnosticSeries(
        'admissibility',
        ('order', 'size', 'eps0'),
        [(k, v, report.eps0) for k, v in enumerate(report.orders)],
        meta={'tip_clear': report.tip_clear, 'passed': report.passed},
    )
    bg = conical.solve_self_similar(fs, gas, b0)
    window = (p['fit_start'], p['z_end'])
    runs = {}
    for label, n in (('deviation', p['march_n'] * resolution), ('deviation-fine', 2 * p['march_n'] * resolution)):
        runs[label] = conical.run_marching(
            fs, gas, geom, z_end=p['z_end'], n=n, fit_window=window, background=bg
        )
        runs[label].name = label
    coarse, fine = runs['deviation'].meta['fitted_slope'], runs['deviation-fine'].meta['fitted_slope']
    rate = DiagnosticSeries(
        'rate',
        ('n', 'fitted_slope', 'relative_change'),
        [
            (p['march_n'] * resolution, coarse, 0.0),
            (2 * p['march_n'] * resolution, fine, abs(fine - coarse) / abs(coarse)),
        ],
    )
    logger.info(f'fitted decay slopes {coarse:.4f} (n) and {fine:.4f} (2n)')
    return PresetOutput(
        {'admissibility': admissibility, 'rate': rate, **runs},
        [
            Assertion('perturbation smallness', 'admissibility', Max('size'), '<=', report.eps0),
            Assertion('deviation decay slope', 'rate', First('fitted_slope'), '<=', p['max_slope']),
            Assertion('slope stable across resolutions', 'rate', Last('relative_change'), '<=', 0.2),
        ],
    )


# -- prandtl ---------------------------------------------------------------------------


def _refined(cfg_factory: Callable, p: Dict[str, Any], resolution: int) -> prandtl.BLConfig:
    return cfg_factory(
        nu=p['nu'],
        T=p['T'],
        nx=(p['nx'] - 1) * resolution + 1,
        ny=(p['ny'] - 1) * resolution + 1,
        dt=p['dt'] / resolution,
    )


def _displacement_check(run: prandtl.BLRun, cfg: prandtl.BLConfig, lo: float, hi: float) -> DiagnosticSeries:
    state = run.final
    x = state.x
    mask = (x >= lo * cfg.L) & (x <= hi * cfg.L)
    measured = prandtl.displacement_thickness(state)[mask]
    blasius = prandtl.BLASIUS_DISPLACEMENT * np.sqrt(cfg.nu * (x[mask] + cfg.x0) / state.U[mask])
    return DiagnosticSeries(
        'displacement',
        ('x', 'delta_star', 'blasius', 'rel_error'),
        np.column_stack([x[mask], measured, blasius, np.abs(measured / blasius - 1.0)]),
    )


def _report_series(report: prandtl.DataReport) -> DiagnosticSeries:
    names = list(report.checks)
    return DiagnosticSeries(
        'data-checks',
        names,
        [[1.0 if report.checks[k] else 0.0 for k in names]],
        meta={'offending': report.offending},
    )


def _bl_outputs(run: prandtl.BLRun) -> Dict[str, DiagnosticSeries]:
    return {
        'history': run.history,
        'wall-shear': run.wall_shear,
        'lipschitz': run.lipschitz,
        'data-checks': _report_series(run.report),
    }


_BL = dict(nu=0.01, nx=101, ny=401)


@register_preset(
    'prandtl-favorable',
    'U = 1 with Blasius data: shear stays positive, Lipschitz bounds persist',
    T=3.0,
    dt=0.005,
    **_BL,
)
def prandtl_favorable(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    cfg = _refined(prandtl.favorable_config, p, resolution)
    run = prandtl.run_boundary_layer(cfg)
    return PresetOutput(
        {**_bl_outputs(run), 'displacement': _displacement_check(run, cfg, 0.25, 0.75)},
        [
            Assertion('data hypotheses hold', 'data-checks', Min('px<=0'), '>=', 1.0),
            Assertion('monotone profiles', 'history', Min('min_shear'), '>', 0.0),
            Assertion('trailing wall shear kept', 'history', Min('trailing_shear_ratio'), '>=', 0.9),
            Assertion('dx Lipschitz bound', 'lipschitz', Ratio(Last('dx_sup'), First('dx_sup')), '<=', 1.5),
            Assertion('dy Lipschitz bound', 'lipschitz', Ratio(Last('dy_sup'), First('dy_sup')), '<=', 1.5),
            Assertion('dt Lipschitz bound', 'lipschitz', Ratio(Last('dt_sup'), First('dt_sup')), '<=', 1.5),
            Assertion('Blasius displacement', 'displacement', Max('rel_error'), '<=', 0.02),
        ],
    )


@register_preset(
    'prandtl-adverse',
    'U = 1 - x/2: the pressure gradient check fails and the trailing wall shear collapses',
    T=1.5,
    dt=0.0025,
    **_BL,
)
def prandtl_adverse(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    cfg = _refined(prandtl.adverse_config, p, resolution)
    run = prandtl.run_boundary_layer(cfg)
    return PresetOutput(
        _bl_outputs(run),
        [
            Assertion('adverse gradient flagged', 'data-checks', Min('px<=0'), '<', 1.0),
            Assertion('trailing wall shear drop', 'history', Min('trailing_shear_ratio'), '<', 0.5),
        ],
    )


@register_preset(
    'blasius-steady',
    'error-function layer relaxing to the steady Blasius layer',
    T=6.0,
    dt=0.005,
    tolerance=0.05,
    **_BL,
)
def blasius_steady(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    cfg = _refined(prandtl.blasius_steady_config, p, resolution)
    run = prandtl.run_boundary_layer(cfg)
    return PresetOutput(
        {**_bl_outputs(run), 'displacement': _displacement_check(run, cfg, 0.25, 0.75)},
        [
            Assertion('monotone profiles', 'history', Min('min_shear'), '>', 0.0),
            Assertion('Blasius displacement', 'displacement', Max('rel_error'), '<=', p['tolerance']),
        ],
    )


# -- vortex blobs ----------------------------------------------------------------------


def _concentration(cloud: vortex.BlobCloud2D, radii: List[float]) -> DiagnosticSeries:
    spacing = 0.5 * min(radii)
    total = cloud.total_variation
    series = DiagnosticSeries('concentration', ('radius', 'sup_mass', 'fraction'), meta={'t': cloud.t})
    for r in sorted(radii, reverse=True):
        report = vortex.concentration_sup(cloud, r, spacing)
        series.append(r, report.sup_mass, report.sup_mass / total if total > 0.0 else 0.0)
    return series


def _flat_sheet() -> vortex.SheetSpec:
    return vortex.SheetSpec(
        curve=lambda s: np.column_stack([2.0 * s - 1.0, np.zeros_like(s)]),
        strength=lambda s: np.sqrt(np.clip(1.0 - (2.0 * s - 1.0) ** 2, 0.0, None)),
    )


def _mirror_sheet(p: Dict[str, Any], seed: int) -> vortex.SheetSpec:
    rng = np.random.default_rng(seed)
    k = p['perturbation_atoms']
    positions = np.column_stack([rng.uniform(0.1, 0.9, k), rng.uniform(-0.3, 0.3, k)])
    return vortex.SheetSpec(
        curve=lambda s: np.column_stack([s, np.zeros_like(s)]),
        strength=lambda s: s / np.sqrt(1.0 - s * s),
        sign_pattern='nms',
        perturbation_positions=positions,
        perturbation_circulations=np.full(k, p['perturbation_mass'] / max(k, 1)),
    )


_SHEET = dict(delta=0.1, dt=0.005, T=1.0, radii=[0.2, 0.1, 0.05])


@register_preset(
    'sheet-one-sign',
    'one-sign vortex sheet on [-1, 1]: conservation and concentration nesting',
    n=200,
    **_SHEET,
)
def sheet_one_sign(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    cloud = vortex.build_sheet(_flat_sheet(), p['n'] * resolution, p['delta'])
    dt = p['dt'] / resolution
    snapshots, invariants = vortex.run_cloud(cloud, dt, int(round(p['T'] / dt)), name='invariants')
    final = snapshots[-1]
    return PresetOutput(
        {
            'invariants': invariants,
            'concentration': _concentration(final, p['radii']),
            'cloud-final': final.to_series(),
        },
        [
            Assertion('circulation frozen', 'invariants', Spread('circulation'), '<=', 1e-12),
            Assertion('impulse x1', 'invariants', Spread('impulse_x'), '<=', 1e-9),
            Assertion('impulse x2', 'invariants', Spread('impulse_y'), '<=', 1e-9),
            Assertion('Hamiltonian', 'invariants', RelativeDrift('hamiltonian'), '<=', 1e-6),
            Assertion('concentration nesting', 'concentration', MaxIncrement('sup_mass'), '<=', 0.0),
            Assertion('concentration bounded', 'concentration', Max('fraction'), '<=', 1.0),
        ],
    )


@register_preset(
    'sheet-mirror',
    'non-negative mirror-symmetric sheet: symmetry, zero circulation, no concentration',
    n=100,
    perturbation_atoms=16,
    perturbation_mass=0.02,
    concentration_threshold=0.5,
    **_SHEET,
)
def sheet_mirror(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    cloud = vortex.build_sheet(_mirror_sheet(p, seed), p['n'] * resolution, p['delta'])
    dt = p['dt'] / resolution
    snapshots, invariants = vortex.run_cloud(cloud, dt, int(round(p['T'] / dt)), name='invariants')
    final = snapshots[-1]
    return PresetOutput(
        {
            'invariants': invariants,
            'concentration': _concentration(final, p['radii']),
            'cloud-final': final.to_series(),
        },
        [
            Assertion('mirror symmetry', 'invariants', Max('symmetry_error'), '<=', 1e-12),
            Assertion('zero circulation', 'invariants', AbsMax('circulation'), '<=', 1e-12),
            Assertion('concentration nesting', 'concentration', MaxIncrement('sup_mass'), '<=', 0.0),
            Assertion(
                'no concentration',
                'concentration',
                Last('fraction'),
                '<',
                p['concentration_threshold'],
            ),
        ],
    )


@register_preset(
    'sheet-sequence',
    'mirror sheet regularized at decreasing delta: concentration and local energy',
    n=100,
    deltas=[0.2, 0.1, 0.05],
    dt=0.01,
    T=0.5,
    ball_radius=0.05,
    R=1.5,
    perturbation_atoms=16,
    perturbation_mass=0.02,
    concentration_threshold=0.5,
)
def sheet_sequence(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    series = vortex.approximation_sequence(
        _mirror_sheet(p, seed),
        p['n'] * resolution,
        p['deltas'],
        p['dt'] / resolution,
        p['T'],
        p['ball_radius'],
        p['R'],
    )
    return PresetOutput(
        {'sequence': series},
        [
            Assertion('no concentration', 'sequence', Max('sup_fraction'), '<', p['concentration_threshold']),
            Assertion('finite local energy', 'sequence', Min('local_energy'), '>', 0.0),
            Assertion('zero circulation', 'sequence', AbsMax('circulation'), '<=', 1e-12),
        ],
    )


@register_preset(
    'blob-conservation',
    'random one-sign cloud: conservation of the smoothed invariants',
    atoms=100,
    delta=0.1,
    dt=0.01,
    steps=10000,
    every=100,
)
def blob_conservation(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    rng = np.random.default_rng(seed)
    n = p['atoms']
    radius = np.sqrt(rng.uniform(0.0, 1.0, n))
    angle = rng.uniform(0.0, 2.0 * np.pi, n)
    cloud = vortex.BlobCloud2D(
        positions=np.column_stack([radius * np.cos(angle), radius * np.sin(angle)]),
        circulations=np.full(n, 1.0 / n),
        delta=p['delta'],
    )
    steps = p['steps'] * resolution
    _, invariants = vortex.run_cloud(cloud, p['dt'] / resolution, steps, every=p['every'], name='invariants')
    per_step = 1e-10 * steps
    return PresetOutput(
        {'invariants': invariants},
        [
            Assertion('circulation frozen', 'invariants', Spread('circulation'), '<=', 0.0),
            Assertion('impulse x1', 'invariants', RelativeDrift('impulse_x'), '<=', per_step),
            Assertion('impulse x2', 'invariants', RelativeDrift('impulse_y'), '<=', per_step),
            Assertion('angular impulse', 'invariants', RelativeDrift('angular_impulse'), '<=', per_step),
            Assertion('Hamiltonian', 'invariants', RelativeDrift('hamiltonian'), '<=', 1e-6),
        ],
    )


# -- rings -----------------------------------------------------------------------------


def _axis_fraction(probe: DiagnosticSeries, rho: float) -> DiagnosticSeries:
    rows = [(r['t'], r['fraction']) for r in probe if r['rho'] == rho]
    return DiagnosticSeries('axis-fraction', ('t', 'fraction'), rows, meta={'rho': rho})


@register_preset(
    'ring-single',
    'single ring: impulse and radius conservation, center speed limit, no axis concentration',
    radius=1.0,
    gamma=1.0,
    delta=0.1,
    dt=0.01,
    steps=1000,
    center_deltas=[0.1, 0.05],
    probe_radii=[0.5, 0.25, 0.1],
    axis_threshold=0.05,
)
def ring_single(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    a, gamma = p['radius'], p['gamma']
    cloud = axisym.RingCloudAxi(positions=[[a, 0.0]], circulations=[gamma], delta=p['delta'])
    snapshots, rings = axisym.run_rings(cloud, p['dt'] / resolution, p['steps'] * resolution)
    radii = [rho * a for rho in p['probe_radii']]
    probe = axisym.axis_energy_probe(snapshots, radii)

    exact = gamma / (2.0 * a)
    center = DiagnosticSeries('center-velocity', ('delta', 'center_velocity', 'exact', 'rel_error'))
    for delta in sorted(p['center_deltas'], reverse=True):
        ring = cloud.copy(update={'delta': delta})
        uz = float(axisym.ring_velocity(ring, (0.0, 0.0))[1])
        center.append(delta, uz, exact, abs(uz / exact - 1.0))
    return PresetOutput(
        {
            'rings': rings,
            'axis-energy': probe,
            'axis-fraction': _axis_fraction(probe, min(radii)),
            'center-velocity': center,
        },
        [
            Assertion('impulse', 'rings', RelativeDrift('impulse'), '<=', 1e-8),
            Assertion('radius', 'rings', Spread('r_min'), '<=', 1e-8),
            Assertion('center speed limit', 'center-velocity', Last('rel_error'), '<=', 0.01),
            Assertion('monotone in delta', 'center-velocity', MaxIncrement('rel_error'), '<=', 0.0),
            Assertion('no axis concentration', 'axis-fraction', Max('fraction'), '<', p['axis_threshold']),
        ],
    )


@register_preset(
    'ring-leapfrog',
    'two coaxial rings: leapfrogging with conserved circulation and impulse',
    radius=1.0,
    gap=0.5,
    gamma=1.0,
    delta=0.1,
    dt=0.01,
    steps=3000,
    every=10,
)
def ring_leapfrog(p: Dict[str, Any], resolution: int, seed: int) -> PresetOutput:
    a = p['radius']
    cloud = axisym.RingCloudAxi(
        positions=[[a, 0.0], [a, p['gap']]],
        circulations=[p['gamma'], p['gamma']],
        delta=p['delta'],
    )
    snapshots, rings = axisym.run_rings(
        cloud, p['dt'] / resolution, p['steps'] * resolution, every=p['every'] * resolution
    )
    order = DiagnosticSeries(
        'order',
        ('t', 'r0', 'z0', 'r1', 'z1'),
        [(c.t, *c.positions[0], *c.positions[1]) for c in snapshots],
    )
    lead = np.sign(order['z1'] - order['z0'])
    swaps = np.flatnonzero(np.diff(lead))
    passes = DiagnosticSeries(
        'passes', ('t', 'leader'), [(order['t'][i + 1], 1.0 if lead[i + 1] > 0 else 0.0) for i in swaps]
    )
    logger.info(f'ring-leapfrog: {len(passes)} passes')
    return PresetOutput(
        {'rings': rings, 'order': order, 'passes': passes},
        [
            Assertion('rings leapfrog', 'passes', Count('t'), '>=', 1.0),
            Assertion('circulation frozen', 'rings', Spread('circulation'), '<=', 0.0),
            Assertion('impulse', 'rings', RelativeDrift('impulse'), '<=', 1e-6),
            Assertion('rings stay off the axis', 'rings', Min('r_min'), '>', 0.0),
        ],
    )
