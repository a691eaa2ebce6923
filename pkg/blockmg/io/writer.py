"""blockmg.writer contains classes that write the output to different data
formats, and exporters for symbols and operators."""

import os
import sys
import json
from typing import Any, List
import numpy as np
from scipy.io import mmwrite

from .wstrategies import JsonWriter, CsvWriter, TsvWriter
from ..calc.structured import StructuredOperator
from ..calc.symbols import MatrixSymbol
from ..utils.logging import logging

logger = logging.getLogger("BlockMG")


class ResultsWriter:
    """Writes result objects to a file (or stdout if `filename` is None).

    Attributes:
    -----------
        filename : str or None
        format : str {`auto`, `json`, `csv`, `tsv`}
            `auto` infers the format from the file extension (csv on stdout).
        float_precision : int
            Significant digits of floating point values.
    """

    STRATEGIES = {
        "json": JsonWriter,
        "csv": CsvWriter,
        "tsv": TsvWriter,
    }

    def __init__(self, filename: str = None, format: str = "auto", float_precision: int = 6):
        self.filename = filename
        self.format = format
        self.float_precision = float_precision
        self._strategy = self.get_strategy()

    def __setattr__(self, __name: str, __value: Any) -> None:
        super().__setattr__(__name, __value)
        # Update the strategy
        if __name in ("filename", "format", "float_precision") and hasattr(self, "_strategy"):
            super().__setattr__("_strategy", self.get_strategy())

    def get_strategy(self):
        if (self.format or "").lower() in ["auto", "guess", ""]:
            __fmt = os.path.splitext(self.filename)[1].lstrip(".").lower() if self.filename else "csv"
        else:
            __fmt = self.format.lower()
        if __fmt in self.STRATEGIES:
            return self.STRATEGIES[__fmt](self.float_precision)
        else:
            raise ValueError(f"Unknown output file format: `{__fmt}`")

    def write_results(self, results: List):
        """Writes one or more results (anything with `to_dict`/`to_frame`)"""
        if not isinstance(results, (list, tuple)):
            results = [results]
        if self.filename is None:
            self._strategy.write_results(sys.stdout, results)
            return
        logger.info(f"Writing results to: {self.filename}")
        with open(self.filename, "w") as fhandle:
            self._strategy.write_results(fhandle, results)


def write_symbol(sym: MatrixSymbol, filename: str):
    """Writes `sym` in the JSON symbol format read by JsonSymbolReader"""
    content = {
        "levels": sym.levels,
        "d": sym.block_size,
        "hermitian": bool(sym.hermitian),
        "coeffs": [{"offset": list(j), "re": np.real(sym.coeffs[j]).tolist(),
                    "im": np.imag(sym.coeffs[j]).tolist()} for j in sym.offsets],
    }
    with open(filename, "w") as fhandle:
        json.dump(content, fhandle, indent=1)


def write_matrix_market(op: StructuredOperator, filename: str):
    """Exports the operator matrix in Matrix Market format"""
    logger.info(f"Writing {op} to: {filename}")
    mmwrite(filename, op.matrix, comment=f"{op.kind} sizes={op.sizes} d={op.block_size} cut={op.cut}",
            symmetry="symmetric" if op.hermitian and not np.iscomplexobj(op.matrix.data) else "general")
