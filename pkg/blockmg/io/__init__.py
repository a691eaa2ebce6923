from .reader import SymbolReader
from .writer import ResultsWriter, write_symbol, write_matrix_market
