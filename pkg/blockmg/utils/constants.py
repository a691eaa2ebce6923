"""blockmg.constants contains general information for all modules"""
from importlib.metadata import version, PackageNotFoundError
import os

BLOCKMG_NAME = __name__.split(".")[0]
try:
    BLOCKMG_VERSION = version(BLOCKMG_NAME)
except PackageNotFoundError:
    BLOCKMG_VERSION = "0.0.0+local"
BLOCKMG_SOURCE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
BLOCKMG_DATA_DIR = os.path.join(BLOCKMG_SOURCE_DIR, "data")
EXPECTED_TABLES_PATH = os.path.join(BLOCKMG_DATA_DIR, "expected_tables.json")

# Published experiment settings
DEFAULT_TOLERANCE = 1e-7
DEFAULT_MAX_ITER = 4000
DEFAULT_Z_VALUES = (1., 2., 3., 4., 5.)

# Grid sizes for sup-norms and zero detection
NORM_GRID_1D = 4096
NORM_GRID_2D = 256

# Desk-scale caps; each can be overridden through the environment
_CAP_DEFAULTS = {
    "BLOCKMG_MAX_T_1D": 13,
    "BLOCKMG_MAX_T_2D": 8,
    "BLOCKMG_MAX_T_DG": 8,
    "BLOCKMG_DENSE_CAP": 4096,
}


def get_cap(name: str) -> int:
    """Returns the cap `name` (e.g. 'BLOCKMG_MAX_T_1D'), read from the
    environment on every call so that overrides apply without re-import."""
    if name not in _CAP_DEFAULTS:
        raise KeyError(f"Unknown cap: `{name}`")
    value = os.environ.get(name, "")
    try:
        return int(value) if value.strip() else _CAP_DEFAULTS[name]
    except ValueError:
        raise ValueError(f"Environment variable {name} must be an integer, got: `{value}`")


def default_norm_grid(levels: int) -> int:
    """Number of grid points per frequency variable used for sup-norms"""
    return NORM_GRID_1D if levels == 1 else NORM_GRID_2D
