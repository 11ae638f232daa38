"""
Run configuration: defaults, a flat JSON config file, one environment
override, and command-line flags (flags win over the file, the file wins
over the defaults).
"""

from dataclasses import InitVar, dataclass, field, fields, asdict
from typing import Any, Dict, List, Optional, Tuple
import json
import os

from errors import ConfigError
from spectrum import GRIDS, GRID_NS_EVEN, DEFAULT_MAX_SITES

ENGINE_VERSION = '1.1.0'
CACHE_DIR_ENV = 'MACRO_TFIM_CACHE_DIR'

# size lists each subcommand evaluates on the configured grid (None: every one)
GRID_SIZE_KEYS = {
    None: ('sizes', 'fit_sizes', 'collapse_sizes', 'pindex_sizes'),
    'sweep': ('sizes',),
    'scaling': ('fit_sizes', 'collapse_sizes', 'asymptotic_size'),
}


@dataclass
class RunConfig:
    sizes: List[int] = field(default_factory=lambda: [128, 256, 512, 1024, 1280, 1536, 1792, 2048, 4096])
    lambdas: Optional[List[float]] = None  # explicit grid; replaces the coarse/fine grid
    lambda_coarse: float = 0.01
    lambda_fine: float = 0.0005
    fine_range: Tuple[float, float] = (0.8, 1.1)
    lambda_max: float = 2.0
    grid: str = GRID_NS_EVEN
    workers: int = 1
    cache_dir: str = '.macro_cache'
    output_dir: str = 'results'
    use_cache: bool = True
    quiet: bool = False

    fit_sizes: List[int] = field(default_factory=lambda: [128, 256, 512, 1024, 2048])
    collapse_sizes: List[int] = field(default_factory=lambda: [256, 512, 1024, 2048])
    collapse_window: Optional[float] = 10.0
    pindex_sizes: List[int] = field(default_factory=lambda: [1024, 1280, 1536, 1792, 2048])
    asymptotic_size: int = 4096
    asymptotic_window: Tuple[float, float] = (0.90, 0.98)

    tol_pivot: float = 1e-10
    check_tol: float = 1e-8
    check_stride: Optional[int] = None
    max_sites: int = DEFAULT_MAX_SITES

    validate_sizes: List[int] = field(default_factory=lambda: [4, 6, 8, 10, 12])
    validate_lambdas: List[float] = field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5, 3.0])
    bench_sizes: List[int] = field(default_factory=lambda: [64, 256, 1024])

    command: InitVar[Optional[str]] = None

    def __post_init__(self, command: Optional[str] = None):
        self.fine_range = tuple(self.fine_range)
        self.asymptotic_window = tuple(self.asymptotic_window)
        self.validate(command)

    def validate(self, command: Optional[str] = None):
        """
        Check invariants.

        Parity and max_sites are only checked for the size lists the given
        subcommand evaluates on the configured grid (GRID_SIZE_KEYS).

        Raises:
            ConfigError: With the offending key named
        """
        if self.grid not in GRIDS:
            raise ConfigError(f"grid must be one of {GRIDS}, got {self.grid!r}")
        for key in ('sizes', 'fit_sizes', 'collapse_sizes', 'pindex_sizes', 'bench_sizes'):
            values = getattr(self, key)
            if any(int(n) != n or n < 2 for n in values):
                raise ConfigError(f"{key} must hold integers >= 2, got {values}")
        for key in GRID_SIZE_KEYS.get(command, ()):
            values = getattr(self, key)
            if not isinstance(values, list):
                values = [values] if values else []
            if any(n > self.max_sites for n in values):
                raise ConfigError(f"{key} has sizes above max_sites={self.max_sites}: {values}")
            wrong = [n for n in values if (n % 2 == 1) == (self.grid == GRID_NS_EVEN)]
            if wrong:
                parity = 'even' if self.grid == GRID_NS_EVEN else 'odd'
                raise ConfigError(f"grid '{self.grid}' needs {parity} sizes; {key} has {wrong}")
        if self.lambda_coarse <= 0 or self.lambda_fine <= 0:
            raise ConfigError("lambda_coarse and lambda_fine steps must be > 0")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.check_stride is not None and self.check_stride < 0:
            raise ConfigError(f"check_stride must be >= 0, got {self.check_stride}")
        if self.collapse_window is not None and self.collapse_window <= 0:
            raise ConfigError(f"collapse_window must be > 0, got {self.collapse_window}")
        lo, hi = self.asymptotic_window
        if not 0 <= lo < hi < 1:
            raise ConfigError(f"asymptotic_window must satisfy 0 <= lo < hi < 1, got {self.asymptotic_window}")

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values['fine_range'] = list(self.fine_range)
        values['asymptotic_window'] = list(self.asymptotic_window)
        return values


def config_keys() -> List[str]:
    return [f.name for f in fields(RunConfig)]


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Read a flat JSON object of RunConfig keys.

    Raises:
        ConfigError: If the file is unreadable, not an object, or has unknown keys
    """
    try:
        with open(path, 'r') as f:
            values = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}")

    if not isinstance(values, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(values) - set(config_keys()))
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
    return values


def build_config(file_path: Optional[str] = None,
                 overrides: Optional[Dict[str, Any]] = None,
                 environ: Optional[Dict[str, str]] = None,
                 command: Optional[str] = None) -> RunConfig:
    """
    Merge defaults, config file, environment and flag overrides.

    Args:
        file_path: Optional JSON config file
        overrides: Values set on the command line (None entries are ignored)
        environ: Environment mapping (defaults to os.environ)
        command: Subcommand the config is for (decides which size lists must match the grid)

    Returns:
        Validated RunConfig
    """
    environ = os.environ if environ is None else environ
    values: Dict[str, Any] = {}
    if file_path:
        values.update(load_config_file(file_path))
    if environ.get(CACHE_DIR_ENV):
        values['cache_dir'] = environ[CACHE_DIR_ENV]
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    try:
        return RunConfig(**values, command=command)
    except TypeError as e:
        raise ConfigError(f"invalid configuration: {e}")
