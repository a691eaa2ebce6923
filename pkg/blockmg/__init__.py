from .wrapper import BlockMG, BlockMGParameters
from .utils.constants import BLOCKMG_VERSION as __version__
