import abc
import json
from datetime import datetime
from typing import List, TextIO
import numpy as np
import pandas as pd
from ..utils.constants import BLOCKMG_NAME, BLOCKMG_VERSION


class WriterABC(metaclass=abc.ABCMeta):
    """Abstract base class for result writers. Results are any of the report
    classes in blockmg.utils.results (they provide `to_dict` and `to_frame`)."""
    def __init__(self, float_precision: int = 6):
        self.float_precision = float_precision

    @abc.abstractmethod
    def write_results(self, fhandle: TextIO, results: List):
        pass


class JsonWriter(WriterABC):
    """Writer strategy for writing Json files"""

    def _round(self, value):
        if isinstance(value, float):
            return float(np.format_float_positional(value, precision=self.float_precision,
                                                    unique=False, fractional=False, trim="-")) \
                if np.isfinite(value) else None
        if isinstance(value, dict):
            return {k: self._round(v) for k, v in value.items()}
        if isinstance(value, list):
            return [self._round(v) for v in value]
        return value

    def write_results(self, fhandle: TextIO, results: List):
        __dict = {
            "tool": BLOCKMG_NAME,
            "version": BLOCKMG_VERSION,
            "creation_date": datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
            "results": [self._round(result.to_dict()) for result in results],
        }
        json.dump(__dict, fhandle, indent=2)
        fhandle.write("\n")


class CsvWriter(WriterABC):
    """Writer strategy for writing CSV files"""

    csvdialect = {"sep": ","}

    def write_results(self, fhandle: TextIO, results: List):
        frame = pd.concat([result.to_frame() for result in results], axis=0, ignore_index=True)
        frame.to_csv(fhandle, index=False, float_format=f"%.{self.float_precision:d}g",
                     **self.csvdialect)


class TsvWriter(CsvWriter):
    """Writer strategy for writing TSV files (based on CsvWriter)"""
    csvdialect = {"sep": "\t"}
