import os
from typing import Optional

from pydantic import validator

from .models import SingModel

__all__ = (
    'Settings',
    'configure',
    'set_settings_env',
    'get_settings_env',
    'get_settings',
)

DEFAULT_SETTINGS_NAME = 'default'
SETTINGS_ENV_VAR = 'SINGFLOW_ENV'
_settings: dict = {}


class Settings(SingModel):
    output_dir: str = 'singflow-out'
    float_format: str = '%.12e'
    log_level: str = 'INFO'
    seed: int = 12345
    resolution: int = 1

    @validator('resolution')
    def _positive_resolution(cls, v: int) -> int:
        if v < 1:
            raise ValueError('resolution must be >= 1')
        return v

    @validator('log_level')
    def _known_level(cls, v: str) -> str:
        v = v.upper()
        if v not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ValueError(f'unknown log level - {v}')
        return v


def configure(
    output_dir: str = 'singflow-out',
    float_format: str = '%.12e',
    log_level: str = 'INFO',
    seed: int = 12345,
    resolution: int = 1,
    env_name: Optional[str] = None,
) -> Settings:
    """store a settings block for an environment

    Args:
        output_dir (str, optional): default output directory. Defaults to 'singflow-out'.
        float_format (str, optional): printf format of CSV floats. Defaults to '%.12e'.
        log_level (str, optional): level used by the command line. Defaults to 'INFO'.
        seed (int, optional): default seed of randomized presets. Defaults to 12345.
        resolution (int, optional): default resolution multiplier. Defaults to 1.
        env_name (Optional[str], optional): settings env name. Defaults to None.

    Returns:
        Settings: the stored block
    """
    set_settings_env(env_name)
    settings = Settings(
        output_dir=output_dir,
        float_format=float_format,
        log_level=log_level,
        seed=seed,
        resolution=resolution,
    )
    _settings[get_settings_env()] = settings
    return settings


def set_settings_env(name: Optional[str] = None):
    os.environ[SETTINGS_ENV_VAR] = name or DEFAULT_SETTINGS_NAME


def get_settings_env() -> str:
    return os.environ.get(SETTINGS_ENV_VAR, DEFAULT_SETTINGS_NAME)


def get_settings(env_name: Optional[str] = None) -> Settings:
    env_name = env_name or get_settings_env()
    settings = _settings.get(env_name)
    if settings is None:
        settings = Settings()
        _settings[env_name] = settings
    return settings
