"""Command line: ``singflow <preset|run|list|compare> ...``

Exit codes: 0 all assertions pass, 1 an assertion failed, 2 usage error, 3 numerical failure.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from . import __version__
from .exceptions import UsageError
from .harness import ExperimentConfig, RunRecord, compare_runs, load_record, run_experiment
from .presets import get_preset, list_presets
from .settings import get_settings

__all__ = ('build_parser', 'main')

EXIT_PASS = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2


def _run_options(parser: argparse.ArgumentParser, config_required: bool = False) -> None:
    parser.add_argument('--config', type=Path, required=config_required, help='TOML experiment file')
    parser.add_argument('--out', help='output root directory')
    parser.add_argument('--resolution', type=int, help='resolution multiplier')
    parser.add_argument('--seed', type=int, help='random seed')
    parser.add_argument(
        '--assert-only',
        action='store_true',
        help='evaluate the assertions without writing any file',
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='singflow', description='singular-flow experiments with pass/fail assertions'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('-v', '--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    sub.add_parser('list', help='list the registered presets')

    run = sub.add_parser('run', help='run the preset named in a config file')
    _run_options(run, config_required=True)

    compare = sub.add_parser('compare', help='compare the outputs of two runs')
    compare.add_argument('a', type=Path, help='run directory, run.jsonl or record file')
    compare.add_argument('b', type=Path, help='run directory, run.jsonl or record file')
    compare.add_argument('--rtol', type=float, default=1e-6, help='default relative tolerance')
    compare.add_argument(
        '--tol',
        action='append',
        metavar='OUTPUT[.COLUMN]=VALUE',
        help='tolerance of one diagnostic, repeatable',
    )

    for name in list_presets():
        preset = sub.add_parser(name, help=get_preset(name).description)
        _run_options(preset)
    return parser


def _print_record(record: RunRecord, assert_only: bool) -> None:
    for result in record.assertions:
        verdict = 'pass' if result.passed else 'FAIL'
        print(
            f'[{verdict}] {result.name}: {result.value:.6g} {result.comparator} {result.threshold:.6g}'
        )
    if record.failure:
        print(f'[ERROR] {record.failure}')
    if not assert_only:
        for key, path in sorted(record.outputs.items()):
            print(f'  {key}: {path}')
    print(f'{record.experiment}: exit code {record.exit_code} ({record.wall_clock:.2f}s)')


def _execute(args: argparse.Namespace, name: Optional[str]) -> int:
    options = dict(name=name, resolution=args.resolution, seed=args.seed, output_dir=args.out)
    if args.config is not None:
        config = ExperimentConfig.from_toml(args.config, **options)
    else:
        config = ExperimentConfig(**options)
    record = run_experiment(config, write=not args.assert_only)
    _print_record(record, args.assert_only)
    return record.exit_code


def _list() -> int:
    for name in list_presets():
        preset = get_preset(name)
        print(f'{name:22s} {preset.description}')
    return EXIT_PASS


def _tolerances(items: Optional[List[str]]) -> Dict[str, float]:
    tolerances = {}
    for item in items or []:
        key, _, value = item.partition('=')
        try:
            tolerances[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f'--tol expects OUTPUT[.COLUMN]=VALUE, got {item!r}')
        if not key.strip():
            raise UsageError(f'--tol expects OUTPUT[.COLUMN]=VALUE, got {item!r}')
    return tolerances


def _compare(args: argparse.Namespace) -> int:
    report = compare_runs(
        load_record(args.a), load_record(args.b), rtol=args.rtol, tolerances=_tolerances(args.tol)
    )
    for key, verdict in sorted(report.verdicts.items()):
        mark = 'pass' if verdict.passed else 'FAIL'
        print(f'[{mark}] {key}: {verdict.difference:.3e} (tolerance {verdict.tolerance:.1e})')
    for output in report.skipped:
        print(f'{output}: skipped')
    print(
        f'max relative difference {report.max_difference:.3e}, '
        f'{len(report.failed)} of {len(report.verdicts)} diagnostics over tolerance'
    )
    return EXIT_PASS if report.within_tolerance else EXIT_ASSERTION


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    level = 'DEBUG' if args.verbose else get_settings().log_level
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        if args.command == 'list':
            return _list()
        if args.command == 'compare':
            return _compare(args)
        return _execute(args, None if args.command == 'run' else args.command)
    except (UsageError, ValidationError) as exc:
        print(f'usage error: {exc}', file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
