__version__ = '0.1.0'

from .exceptions import NumericalError, UsageError
from .harness import compare_runs, load_record, run_preset
from .presets import get_preset, list_presets
from .series import DiagnosticSeries
from .settings import (
    configure,
    get_settings,
    get_settings_env,
    set_settings_env,
)

__all__ = (
    'NumericalError',
    'UsageError',
    'DiagnosticSeries',
    'compare_runs',
    'load_record',
    'run_preset',
    'get_preset',
    'list_presets',
    'configure',
    'get_settings',
    'get_settings_env',
    'set_settings_env',
)
