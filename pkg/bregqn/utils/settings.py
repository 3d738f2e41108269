"""
Configuration handling for bregqn

Two layers:
- package defaults in ``bregqn/config.ini`` (INI sections), read with
  configparser and falling back to ``constants`` for missing keys;
- user config files in flat ``key=value`` form whose keys are the long CLI
  flag names. They become click ``default_map`` entries, so flags given on
  the command line always win.
"""
import configparser
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from bregqn.utils import constants
from bregqn.utils.errors import ValidationError
from bregqn.utils.logging_config import get_logger

logger = get_logger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / 'config.ini'
FLAT_SECTION = 'qn'


@dataclass(frozen=True)
class Settings:
    """Package-wide defaults"""
    c1: float = constants.DEFAULT_C1
    c2: float = constants.DEFAULT_C2
    tol_x: float = constants.DEFAULT_TOL_X
    bracket_cap: float = constants.DEFAULT_BRACKET_CAP
    max_evals: int = constants.DEFAULT_MAX_EVALS
    grad_tol_per_dim: float = constants.DEFAULT_GRAD_TOL_PER_DIM
    max_iter: int = constants.DEFAULT_MAX_ITER
    noise_advance: str = 'perturbed'
    grid_min: float = constants.DEFAULT_GRID_MIN
    grid_max: float = constants.DEFAULT_GRID_MAX
    grid_points: int = constants.DEFAULT_GRID_POINTS
    trials: int = constants.DEFAULT_TRIALS
    runs: int = constants.DEFAULT_RUNS
    seed: int = constants.DEFAULT_SEED
    eps_range: float = constants.DEFAULT_EPS_RANGE
    resample_cap: int = constants.RESAMPLE_CAP
    min_cosine: float = constants.DEFAULT_MIN_COSINE
    probe_eps: float = constants.DEFAULT_PROBE_EPS
    growth_factor: float = constants.GROWTH_FACTOR


def load_settings(config_path: Optional[Union[str, Path]] = None) -> Settings:
    """
    Load package defaults from an INI file.

    Args:
        config_path: INI file (default: the packaged config.ini)

    Returns:
        Settings with every missing key taken from ``constants``
    """
    config = configparser.ConfigParser()
    path = Path(config_path) if config_path else DEFAULT_CONFIG_PATH
    if path.exists():
        config.read(path)
    else:
        logger.warning(f"Config file not found: {path}, using built-in defaults")

    base = Settings()
    try:
        return Settings(
            c1=config.getfloat('LINESEARCH', 'c1', fallback=base.c1),
            c2=config.getfloat('LINESEARCH', 'c2', fallback=base.c2),
            tol_x=config.getfloat('LINESEARCH', 'tol_x', fallback=base.tol_x),
            bracket_cap=config.getfloat('LINESEARCH', 'bracket_cap', fallback=base.bracket_cap),
            max_evals=config.getint('LINESEARCH', 'max_evals', fallback=base.max_evals),
            grad_tol_per_dim=config.getfloat('SOLVER', 'grad_tol_per_dim', fallback=base.grad_tol_per_dim),
            max_iter=config.getint('SOLVER', 'max_iter', fallback=base.max_iter),
            noise_advance=config.get('SOLVER', 'noise_advance', fallback=base.noise_advance),
            grid_min=config.getfloat('VALIDATION', 'grid_min', fallback=base.grid_min),
            grid_max=config.getfloat('VALIDATION', 'grid_max', fallback=base.grid_max),
            grid_points=config.getint('VALIDATION', 'grid_points', fallback=base.grid_points),
            trials=config.getint('EXPERIMENTS', 'trials', fallback=base.trials),
            runs=config.getint('EXPERIMENTS', 'runs', fallback=base.runs),
            seed=config.getint('EXPERIMENTS', 'seed', fallback=base.seed),
            eps_range=config.getfloat('EXPERIMENTS', 'eps_range', fallback=base.eps_range),
            resample_cap=config.getint('EXPERIMENTS', 'resample_cap', fallback=base.resample_cap),
            min_cosine=config.getfloat('EXPERIMENTS', 'min_cosine', fallback=base.min_cosine),
            probe_eps=config.getfloat('PROBE', 'eps', fallback=base.probe_eps),
            growth_factor=config.getfloat('PROBE', 'growth_factor', fallback=base.growth_factor),
        )
    except ValueError as e:
        raise ValidationError(f"Invalid value in {path}: {e}")


def worker_count() -> int:
    """Worker cap from QN_THREADS, defaulting to the CPU count."""
    raw = os.getenv(constants.THREADS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValidationError(f"{constants.THREADS_ENV} must be an integer, got {raw!r}")
        if value < 1:
            raise ValidationError(f"{constants.THREADS_ENV} must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


def parse_flat_config(text: str) -> Dict[str, str]:
    """
    Parse flat ``key=value`` text. Keys are normalized to lower case with
    dashes; ``#`` and ``;`` start comment lines.

    Raises:
        ValidationError: On malformed lines
    """
    parser = configparser.ConfigParser(interpolation=None, delimiters=('=',))
    parser.optionxform = lambda option: option.strip().lower().replace('_', '-')
    try:
        parser.read_string(f"[{FLAT_SECTION}]\n" + text)
    except configparser.Error as e:
        raise ValidationError(f"Malformed config file: {e}")
    return dict(parser.items(FLAT_SECTION))


def load_flat_config(path: Union[str, Path]) -> Dict[str, str]:
    """Read a flat ``key=value`` config file."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ValidationError(f"Cannot read config file {path}: {e}")
    return parse_flat_config(text)


def dump_flat_config(mapping: Mapping[str, object]) -> str:
    """Write a mapping in the flat ``key=value`` format read by parse_flat_config."""
    lines = []
    for key in sorted(mapping):
        value = mapping[key]
        if isinstance(value, (list, tuple)):
            value = ','.join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    return '\n'.join(lines) + '\n'


def default_map_for(command, flat: Mapping[str, str]) -> Dict[str, object]:
    """
    Build a click ``default_map`` for ``command`` from flat config values.

    Each subcommand receives the keys that name one of its options; groups
    are handled recursively.
    """
    result: Dict[str, object] = {}
    names: Dict[str, str] = {}
    for param in getattr(command, 'params', []):
        names[param.name.replace('_', '-')] = param.name
        for opt in getattr(param, 'opts', []):
            if opt.startswith('--'):
                names.setdefault(opt[2:], param.name)
    for key, value in flat.items():
        if key in names:
            result[names[key]] = value

    for sub_name, sub in getattr(command, 'commands', {}).items():
        sub_map = default_map_for(sub, flat)
        if sub_map:
            result[sub_name] = sub_map
    return result
