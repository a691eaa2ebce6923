import abc, json, os
import numpy as np

from ..calc.symbols import MatrixSymbol


class SymbolFileError(ValueError):
    """Raised if a symbol file is unreadable, malformed or of unknown structure"""
    pass


class ReaderABC(metaclass=abc.ABCMeta):
    """Base class for all symbol file reader strategies"""

    @abc.abstractmethod
    def checkFileFormat(self, input_file: str) -> bool:
        """Checks if the file provided adheres to the given format."""
        pass

    @abc.abstractmethod
    def readFile(self, input_file: str) -> MatrixSymbol:
        """Reads the Fourier coefficients from the input file and returns them
        as a MatrixSymbol"""
        pass


class JsonSymbolReader(ReaderABC):
    """A reader strategy for JSON symbol files of the form:

        {"levels": 1, "d": 2, "hermitian": true,
         "coeffs": [{"offset": [0], "re": [[...]], "im": [[...]]}, ...]}

    `im` may be omitted for real coefficients. If `hermitian` is true or
    missing, a_{-j} = a_j^H is enforced.

    Methods:
    --------
        checkFileFormat(input_file)
            Checks if the file provided adheres to the given format.
        readFile(input_file)
            Reads the symbol from the input file.
    """
    REQUIRED_KEYS = {"levels", "d", "coeffs"}

    def checkFileFormat(self, input_file: str) -> bool:
        try:
            with open(input_file, "r") as f:
                content = json.load(f)
        except (OSError, UnicodeDecodeError, json.JSONDecodeError):
            return False
        return isinstance(content, dict) and self.REQUIRED_KEYS.issubset(content)

    def readFile(self, input_file: str) -> MatrixSymbol:
        """Reads the symbol from a JSON file.

        Parameters:
        -----------
            input_file : str

        Returns:
        --------
            sym : MatrixSymbol

        Raises:
        -------
            SymbolFileError
                If the file cannot be parsed, keys are missing, coefficient
                blocks are mis-sized or the Hermitian property is violated.
        """
        try:
            with open(input_file, "r") as f:
                content = json.load(f)
        except (OSError, json.JSONDecodeError) as err:
            raise SymbolFileError(f"Cannot read symbol file `{input_file}`: {err}")
        try:
            return self._parse(content, input_file)
        except SymbolFileError:
            raise
        except (ValueError, TypeError) as err:
            # SymbolError, NonFiniteError (NaN literals), ragged or non-numeric blocks
            raise SymbolFileError(f"Invalid symbol in `{input_file}`: {err}")

    @staticmethod
    def _integer(value, what: str, input_file: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SymbolFileError(f"`{what}` in `{input_file}` must be an integer, got {value!r}")
        return value

    def _parse(self, content, input_file: str) -> MatrixSymbol:
        if not isinstance(content, dict):
            raise SymbolFileError(f"Symbol file `{input_file}` does not contain a JSON object")
        missing = self.REQUIRED_KEYS - set(content)
        if missing:
            raise SymbolFileError(f"Symbol file `{input_file}` misses the key(s): {sorted(missing)}")
        if not isinstance(content["coeffs"], list):
            raise SymbolFileError(f"`coeffs` in `{input_file}` must be a list")

        levels = self._integer(content["levels"], "levels", input_file)
        d = self._integer(content["d"], "d", input_file)
        coeffs = {}
        for i, entry in enumerate(content["coeffs"]):
            if not isinstance(entry, dict) or "offset" not in entry or "re" not in entry:
                raise SymbolFileError(f"Coefficient #{i} in `{input_file}` needs `offset` and `re`")
            if not isinstance(entry["offset"], list):
                raise SymbolFileError(f"Offset of coefficient #{i} in `{input_file}` must be a list")
            offset = tuple(self._integer(o, "offset", input_file) for o in entry["offset"])
            if len(offset) != levels:
                raise SymbolFileError(f"Offset {offset} in `{input_file}` does not have {levels} component(s)")
            if offset in coeffs:
                raise SymbolFileError(f"Offset {offset} appears twice in `{input_file}`")
            re = np.asarray(entry["re"], dtype=float)
            im = np.asarray(entry.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != (d, d) or im.shape != (d, d):
                raise SymbolFileError(f"Coefficient at offset {offset} in `{input_file}` is not {d}x{d}")
            coeffs[offset] = re + 1j * im
        return MatrixSymbol(coeffs, block_size=d, levels=levels, hermitian=bool(content.get("hermitian", True)))


class NpzSymbolReader(ReaderABC):
    """A reader strategy for numpy archives holding the arrays `offsets`
    (m x levels, int), `coeffs` (m x d x d) and optionally `hermitian`."""

    def checkFileFormat(self, input_file: str) -> bool:
        if os.path.splitext(input_file)[1].lower() != ".npz":
            return False
        try:
            with np.load(input_file) as archive:
                return {"offsets", "coeffs"}.issubset(archive.files)
        except (OSError, ValueError):
            return False

    def readFile(self, input_file: str) -> MatrixSymbol:
        try:
            with np.load(input_file) as archive:
                offsets = np.atleast_2d(archive["offsets"]).astype(int)
                blocks = np.asarray(archive["coeffs"])
                hermitian = bool(archive["hermitian"]) if "hermitian" in archive.files else True
        except (OSError, KeyError, ValueError) as err:
            raise SymbolFileError(f"Cannot read symbol archive `{input_file}`: {err}")
        if blocks.ndim != 3 or blocks.shape[1] != blocks.shape[2] or len(blocks) != len(offsets):
            raise SymbolFileError(f"Archive `{input_file}` needs `coeffs` of shape (m, d, d) matching `offsets`")
        coeffs = {tuple(j): a for j, a in zip(offsets.tolist(), blocks)}
        try:
            return MatrixSymbol(coeffs, block_size=blocks.shape[1], levels=offsets.shape[1], hermitian=hermitian)
        except (ValueError, TypeError) as err:
            raise SymbolFileError(f"Invalid symbol in `{input_file}`: {err}")
