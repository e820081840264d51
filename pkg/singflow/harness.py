"""Running presets into output directories and comparing the results of two runs."""
import json
import time
from datetime import datetime, timezone
from logging import getLogger
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import toml
from pydantic import validator

from . import __version__
from .exceptions import InvalidArgument, NumericalError, UsageError
from .models import SingModel, default_encoder
from .presets import AssertionResult, PresetOutput, get_preset
from .series import DiagnosticSeries
from .settings import get_settings

__all__ = (
    'ExperimentConfig',
    'RunRecord',
    'DiagnosticVerdict',
    'ComparisonReport',
    'run_experiment',
    'run_preset',
    'load_record',
    'compare_runs',
)

logger = getLogger('singflow')

RECORD_FILE = 'run.jsonl'
MANIFEST_FILE = 'manifest.json'


class ExperimentConfig(SingModel):
    name: str
    params: Dict[str, Any] = {}
    resolution: Optional[int] = None
    seed: Optional[int] = None
    output_dir: Optional[str] = None

    @validator('name')
    def _registered(cls, v: str) -> str:
        get_preset(v)
        return v

    @validator('resolution', always=True)
    def _default_resolution(cls, v: Optional[int]) -> int:
        v = get_settings().resolution if v is None else v
        if v < 1:
            raise ValueError('resolution must be >= 1')
        return v

    @validator('seed', always=True)
    def _default_seed(cls, v: Optional[int]) -> int:
        return get_settings().seed if v is None else v

    @validator('output_dir', always=True)
    def _default_output_dir(cls, v: Optional[str]) -> str:
        return get_settings().output_dir if v is None else str(v)

    @classmethod
    def from_toml(cls, path: Union[str, Path], **overrides) -> 'ExperimentConfig':
        """read [experiment] name/resolution/seed and the [params] block of a TOML file

        Keyword overrides that are not None win over the file.
        """
        path = Path(path)
        try:
            data = toml.load(path)
        except (OSError, toml.TomlDecodeError) as exc:
            raise InvalidArgument(f'cannot read config {path}: {exc}')
        experiment = dict(data.get('experiment', {}))
        unknown = sorted(set(experiment) - {'name', 'resolution', 'seed', 'output_dir'})
        if unknown:
            raise InvalidArgument(f'unknown [experiment] keys in {path}: {unknown}')
        experiment.update({k: v for k, v in overrides.items() if v is not None})
        if 'name' not in experiment:
            raise InvalidArgument(f'{path} names no experiment')
        return cls(params=dict(data.get('params', {})), **experiment)


class RunRecord(SingModel):
    experiment: str
    config: Dict[str, Any]
    version: str
    started: str
    wall_clock: float
    outputs: Dict[str, str] = {}
    assertions: List[AssertionResult] = []
    failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failure is None and bool(self.assertions) and all(a.passed for a in self.assertions)

    @property
    def exit_code(self) -> int:
        if self.failure is not None:
            return 3
        return 0 if self.passed else 1

    @property
    def failed_assertions(self) -> List[str]:
        return [a.name for a in self.assertions if not a.passed]


class DiagnosticVerdict(SingModel):
    difference: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.difference <= self.tolerance


class ComparisonReport(SingModel):
    """Convergence verdicts keyed by '<output>.<column>'.

    A tolerance is looked up as '<output>.<column>', then '<output>', then falls back to rtol.
    """

    experiment: str
    resolutions: Tuple[int, int]
    rtol: float
    tolerances: Dict[str, float] = {}
    differences: Dict[str, Dict[str, float]] = {}
    skipped: List[str] = []

    def tolerance_for(self, output: str, column: str) -> float:
        return self.tolerances.get(f'{output}.{column}', self.tolerances.get(output, self.rtol))

    @property
    def verdicts(self) -> Dict[str, DiagnosticVerdict]:
        return {
            f'{output}.{column}': DiagnosticVerdict(
                difference=value, tolerance=self.tolerance_for(output, column)
            )
            for output, columns in self.differences.items()
            for column, value in columns.items()
        }

    @property
    def failed(self) -> List[str]:
        return [key for key, verdict in self.verdicts.items() if not verdict.passed]

    @property
    def max_difference(self) -> float:
        values = [v for cols in self.differences.values() for v in cols.values()]
        return max(values) if values else 0.0

    @property
    def within_tolerance(self) -> bool:
        return not self.failed


def _write_outputs(output: PresetOutput, out_dir: Path, float_format: str) -> Dict[str, str]:
    paths = {}
    for key, series in output.series.items():
        paths[key] = str(series.to_csv(out_dir / f'{key}.csv', float_format=float_format).resolve())
    manifest = {
        key: {'path': f'{key}.csv', **series.schema, 'meta': series.meta}
        for key, series in output.series.items()
    }
    with open(out_dir / MANIFEST_FILE, 'w') as f:
        json.dump(manifest, f, indent=2, sort_keys=True, default=default_encoder)
    return paths


def _append_record(record: RunRecord, out_dir: Path) -> Path:
    path = out_dir / RECORD_FILE
    with open(path, 'a') as f:
        f.write(record.json_data() + '\n')
    return path


def run_experiment(config: ExperimentConfig, write: bool = True) -> RunRecord:
    """run one configured preset, write its series and append its record

    Raises:
        UsageError: for an unknown preset or unknown parameters

    Returns:
        RunRecord: numerical failures are recorded, not raised
    """
    preset = get_preset(config.name)
    params = preset.effective_params(config.params)
    settings = get_settings()
    out_dir = Path(config.output_dir) / config.name
    started = datetime.now(timezone.utc).isoformat(timespec='seconds')
    clock = time.perf_counter()
    logger.info(f'{config.name}: start (resolution={config.resolution}, seed={config.seed})')

    output, results, failure = None, [], None
    try:
        output = preset.run(params, config.resolution, config.seed)
        results = output.evaluate()
    except NumericalError as exc:
        failure = f'{type(exc).__name__}: {exc}'
        logger.error(f'{config.name}: {failure}')

    paths: Dict[str, str] = {}
    if write:
        out_dir.mkdir(parents=True, exist_ok=True)
        if output is not None:
            paths = _write_outputs(output, out_dir, settings.float_format)
    record = RunRecord(
        experiment=config.name,
        config={
            'name': config.name,
            'params': params,
            'resolution': config.resolution,
            'seed': config.seed,
            'output_dir': config.output_dir,
        },
        version=__version__,
        started=started,
        wall_clock=time.perf_counter() - clock,
        outputs=paths,
        assertions=results,
        failure=failure,
    )
    for result in results:
        level = 'info' if result.passed else 'warning'
        getattr(logger, level)(
            f'{config.name}: {result.name}: {result.value:.6g} {result.comparator} {result.threshold:.6g}'
            f' -> {"pass" if result.passed else "FAIL"}'
        )
    if write:
        _append_record(record, out_dir)
    logger.info(f'{config.name}: exit code {record.exit_code} after {record.wall_clock:.2f}s')
    return record


def run_preset(
    name: str,
    overrides: Optional[Dict[str, Any]] = None,
    resolution: Optional[int] = None,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
    write: bool = True,
) -> RunRecord:
    """run a registered preset with parameter overrides

    Args:
        name (str): preset name
        overrides (Optional[Dict[str, Any]], optional): parameter overrides. Defaults to None.
        resolution (Optional[int], optional): resolution multiplier. Defaults to the settings.
        seed (Optional[int], optional): random seed. Defaults to the settings.
        output_dir (Optional[str], optional): output root. Defaults to the settings.
        write (bool, optional): write CSVs, manifest and record. Defaults to True.

    Raises:
        UnknownPreset: if the name is not registered
        InvalidArgument: for unknown parameters

    Returns:
        RunRecord: run record
    """
    config = ExperimentConfig(
        name=name,
        params=overrides or {},
        resolution=resolution,
        seed=seed,
        output_dir=output_dir,
    )
    return run_experiment(config, write=write)


def load_record(path: Union[str, Path]) -> RunRecord:
    """last record of a run directory or run.jsonl file, or a single-record JSON file"""
    path = Path(path)
    if path.is_dir():
        path = path / RECORD_FILE
    if not path.exists():
        raise InvalidArgument(f'no run record at {path}')
    if path.suffix == '.jsonl':
        lines = [line for line in path.read_text().splitlines() if line.strip()]
        if not lines:
            raise InvalidArgument(f'{path} holds no records')
        data = json.loads(lines[-1])
    else:
        data = json.loads(path.read_text())
    return RunRecord.parse_obj(data)


def _relative_difference(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b)))) if a.size else 0.0
    diff = float(np.max(np.abs(a - b))) if a.size else 0.0
    return diff / scale if scale > 0.0 else diff


def compare_runs(
    a: RunRecord, b: RunRecord, rtol: float = 1e-6, tolerances: Optional[Dict[str, float]] = None
) -> ComparisonReport:
    """per-column max relative differences between the common outputs of two runs

    Outputs whose columns or lengths differ (e.g. grid-sized profiles at two resolutions) are
    listed as skipped.

    Args:
        a (RunRecord): first run
        b (RunRecord): second run
        rtol (float, optional): tolerance of every diagnostic without its own. Defaults to 1e-6.
        tolerances (Optional[Dict[str, float]], optional): per-diagnostic tolerances keyed by
            '<output>' or '<output>.<column>'.

    Raises:
        UsageError: if the records belong to different experiments
        InvalidArgument: for a negative tolerance or one naming an unknown output

    Returns:
        ComparisonReport: differences and a verdict per diagnostic
    """
    if a.experiment != b.experiment:
        raise UsageError(f'cannot compare {a.experiment} with {b.experiment}')
    tolerances = dict(tolerances or {})
    if rtol < 0.0 or any(v < 0.0 for v in tolerances.values()):
        raise InvalidArgument('tolerances must be nonnegative')
    outputs = set(a.outputs) | set(b.outputs)
    unknown = sorted(k for k in tolerances if k.split('.', 1)[0] not in outputs)
    if unknown:
        raise InvalidArgument(f'tolerances for unknown outputs: {unknown}, expected some of {sorted(outputs)}')
    differences: Dict[str, Dict[str, float]] = {}
    skipped: List[str] = []
    for key in sorted(set(a.outputs) & set(b.outputs)):
        left = DiagnosticSeries.from_csv(a.outputs[key], key)
        right = DiagnosticSeries.from_csv(b.outputs[key], key)
        if left.columns != right.columns or len(left) != len(right):
            skipped.append(key)
            continue
        differences[key] = {c: _relative_difference(left[c], right[c]) for c in left.columns}
    skipped.extend(sorted(set(a.outputs) ^ set(b.outputs)))
    report = ComparisonReport(
        experiment=a.experiment,
        resolutions=(a.config.get('resolution', 1), b.config.get('resolution', 1)),
        rtol=rtol,
        tolerances=tolerances,
        differences=differences,
        skipped=skipped,
    )
    logger.info(
        f'{a.experiment}: max relative difference {report.max_difference:.3e} over '
        f'{len(differences)} outputs, {len(skipped)} skipped'
    )
    for key in report.failed:
        verdict = report.verdicts[key]
        logger.info(f'{a.experiment}: {key} differs by {verdict.difference:.3e} > {verdict.tolerance:.1e}')
    return report
