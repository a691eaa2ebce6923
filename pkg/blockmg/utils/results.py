""" blockmg.results contains classes that hold output information.

SolveReport describes a single multigrid solve, ConditioningReport the
conditioning of the coarse symbols over the levels, ConditionCheckReport
the numeric check of the two-grid conditions, ConjectureReport the level
ratios of the second derivatives at the origin, and TableResult a full
reproduction sweep against the published values.

All of them can be turned into a dictionary (JSON output) or a
pandas.DataFrame (CSV/TSV output).
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple
import numpy as np
import pandas as pd


def _plain(value):
    """Converts numpy scalars/arrays into JSON-serializable python values"""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


@dataclass
class SolveReport:
    """Result of a multigrid solve.

    Attributes:
    -----------
        iterations : int
            Number of cycles applied.
        residual_history : Array[iterations+1]
            Relative 2-norm residuals, starting with the initial guess.
        converged : bool
        final_error_A_norm : float or None
            A-norm of the final error (when the exact solution is known).
        solution : Array[N]
            The final iterate (not serialized).
        context : Dict
            Setup information (app, t, z, ...) added by the caller.
    """
    iterations: int
    residual_history: np.ndarray
    converged: bool
    final_error_A_norm: Optional[float] = None
    solution: Optional[np.ndarray] = field(default=None, repr=False)
    context: Dict[str, Any] = field(default_factory=dict)

    def __repr__(self):
        return f"SolveReport(iterations={self.iterations}, converged={self.converged}, {self.context})"

    @property
    def relative_residual(self) -> float:
        return float(self.residual_history[-1])

    def to_dict(self) -> Dict:
        return {
            **{k: _plain(v) for k, v in self.context.items()},
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "relative_residual": self.relative_residual,
            "final_error_A_norm": _plain(self.final_error_A_norm),
            "residual_history": _plain(np.asarray(self.residual_history, dtype=float)),
        }

    def to_frame(self) -> pd.DataFrame:
        row = {**self.context, "iterations": self.iterations, "converged": self.converged,
               "relative_residual": self.relative_residual,
               "final_error_A_norm": self.final_error_A_norm}
        return pd.DataFrame([row])


@dataclass
class ConditioningRow:
    j: int
    lambda_pp0: float
    lambda_max_sup: float
    kappa: float


@dataclass
class ConditioningReport:
    """Conditioning of the coarse symbols f_hat_{z,j}, j = 1..levels.

    Attributes:
    -----------
        z : float
        rows : List[ConditioningRow]
            kappa = lambda_max_sup / lambda_pp0 per level.
        limit_flag : str {'vanishing', 'bounded_away'}
            Whether lambda''_min at the origin vanishes over the levels.
    """
    z: float
    rows: List[ConditioningRow] = field(default_factory=list)
    limit_flag: str = "bounded_away"

    @property
    def kappas(self) -> np.ndarray:
        return np.array([row.kappa for row in self.rows])

    def to_dict(self) -> Dict:
        return {"z": self.z, "limit_flag": self.limit_flag,
                "levels": [{k: _plain(v) for k, v in vars(row).items()} for row in self.rows]}

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame([vars(row) for row in self.rows],
                             columns=["j", "lambda_pp0", "lambda_max_sup", "kappa"])
        frame.insert(0, "z", self.z)
        frame["limit_flag"] = self.limit_flag
        return frame


@dataclass
class ConditionCheckReport:
    """Numeric check of the two-grid conditions.

    Attributes:
    -----------
        theta0 : List[Array[levels]]
            Located zeros of lambda_min(f).
        cond2_sup : float
            sup of the trace norm |f^{-1/2}(theta) p(theta+pi)^H|_1 on the fine grid.
        cond2_sup_coarse : float
            The same supremum on a grid four times coarser.
        cond3_min : float
            min of lambda_min(p^H p(theta) + p^H p(theta+pi)).
        cond4_max : float
            max commutator norm ||p(theta)p(theta+pi) - p(theta+pi)p(theta)||.
        passed : Tuple[bool, bool, bool]
            Verdicts for the three conditions.
        grid : int
    """
    theta0: List[np.ndarray]
    cond2_sup: float
    cond2_sup_coarse: float
    cond3_min: float
    cond4_max: float
    passed: Tuple[bool, bool, bool]
    grid: int = 4096
    context: Dict[str, Any] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(self.passed)

    def to_dict(self) -> Dict:
        return {
            **{k: _plain(v) for k, v in self.context.items()},
            "theta0": [_plain(np.asarray(t)) for t in self.theta0],
            "cond2_sup": self.cond2_sup,
            "cond2_sup_coarse": self.cond2_sup_coarse,
            "cond3_min": self.cond3_min,
            "cond4_max": self.cond4_max,
            "passed": [bool(p) for p in self.passed],
            "grid": self.grid,
        }

    def to_frame(self) -> pd.DataFrame:
        rows = [
            ("cond2_sup", self.cond2_sup, self.passed[0]),
            ("cond3_min", self.cond3_min, self.passed[1]),
            ("cond4_max", self.cond4_max, self.passed[2]),
        ]
        frame = pd.DataFrame(rows, columns=["condition", "value", "passed"])
        for key, value in reversed(list(self.context.items())):
            frame.insert(0, key, value)
        return frame


@dataclass
class ConjectureReport:
    """Ratios lambda''_min(f_hat_{z,j})|_0 / (z^2/2)^j over the levels"""
    deg: int
    z: float
    rows: List[Tuple[int, float, float]] = field(default_factory=list)
    constant: float = float("nan")
    level_constant: bool = False

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    def to_dict(self) -> Dict:
        return {"deg": self.deg, "z": self.z, "constant": self.constant,
                "level_constant": bool(self.level_constant),
                "levels": [{"j": j, "lambda_pp0": lpp, "ratio": ratio} for j, lpp, ratio in self.rows]}

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.rows, columns=["j", "lambda_pp0", "ratio"])
        frame.insert(0, "z", self.z)
        frame.insert(0, "deg", self.deg)
        frame["level_constant"] = self.level_constant
        return frame


@dataclass
class TableResult:
    """A reproduced table.

    Attributes:
    -----------
        key : str
            Table key (e.g. '2' or 'q3-vcycle').
        title : str
        frame : pandas.DataFrame
            Measured values (and diff columns against the expected values).
        passed : bool
            Whether every compared cell lies within tolerance.
    """
    key: str
    title: str
    frame: pd.DataFrame
    passed: bool = True

    def to_dict(self) -> Dict:
        records = [{k: _plain(v) for k, v in rec.items()} for rec in self.frame.to_dict(orient="records")]
        return {"table": self.key, "title": self.title, "passed": bool(self.passed), "rows": records}

    def to_frame(self) -> pd.DataFrame:
        return self.frame
