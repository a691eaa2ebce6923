"""blockmg.reader contains the reader interface to read symbol files"""

from .rstrategies import ReaderABC, JsonSymbolReader, NpzSymbolReader, SymbolFileError
from ..calc.symbols import MatrixSymbol


class SymbolReader:
    """Interface class for the symbol file reader strategies. This is the only
    class a user should interact with.

    Attributes:
    -----------
        filetype_str : str {`auto`, `json`, `npz`}
            A string to indicate which reader strategy should be used.

    Methods:
    --------
        readFile(input_file)
            Reads a MatrixSymbol from the input file.
        get_strategy(filetype, input_file)
            Returns a reader strategy based on the `filetype_str` or guessing.
        guess_strategy(input_file)
            Guesses a reader strategy based on the file content.
    """
    STRATEGIES = {
        "json": JsonSymbolReader,
        "npz": NpzSymbolReader,
    }

    def __init__(self, filetype_str: str = "auto"):
        self.filetype_str = filetype_str

    def readFile(self, input_file: str) -> MatrixSymbol:
        """Reads the coefficients of a symbol from `input_file`.

        Raises:
        -------
            SymbolFileError
                If no appropriate reader strategy was found or the file is
                malformed.
        """
        strategy = self.get_strategy(self.filetype_str, input_file)
        return strategy.readFile(input_file)

    def get_strategy(self, filetype: str, input_file: str) -> ReaderABC:
        filetype = (filetype or "").lower()
        if filetype in self.STRATEGIES:
            return self.STRATEGIES[filetype]()
        elif filetype in ("auto", "guess", ""):
            return self.guess_strategy(input_file)
        else:
            raise ValueError(f"Unknown symbol file format: `{filetype}`")

    @classmethod
    def guess_strategy(cls, input_file: str) -> ReaderABC:
        for Reader in cls.STRATEGIES.values():
            reader = Reader()
            if reader.checkFileFormat(input_file):
                return reader
        else:
            raise SymbolFileError(f"Symbol file `{input_file}` corresponds to no known format.")
