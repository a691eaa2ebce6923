from .wrapper import BlockMG, BlockMGParameters
