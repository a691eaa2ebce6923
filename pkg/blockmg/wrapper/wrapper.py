from typing import List, Tuple
import numpy as np

from ..utils.logging import logging
from .params import BlockMGParameters
from ..io import ResultsWriter, SymbolReader, write_matrix_market
from ..calc.analysis import check_conjecture, check_tgm_conditions, conditioning_sweep
from ..calc.apps import APPS, ApplicationError, application_problem, application_projector, fem_symbols_1d
from ..calc.multigrid import build_hierarchy, make_rhs_sine, solve
from ..calc.reproduce import run_table
from ..calc.smoothers import METHOD_ALIASES, SmootherConfig, SmootherError, default_omegas
from ..calc.structured import StructuredOperator, build_operator
from ..calc.symbols import MatrixSymbol, projector_symbol_pz, projector_symbol_pz_multilevel

# The logger for the wrapper
logger = logging.getLogger("BlockMG")

COMMANDS = ("solve", "analyze", "conditions", "reproduce")


def cache_operator(func):
    """Decorator for caching fine operators between runs"""

    def __inner(self: "BlockMG", *args, **kwargs):
        names = ("app", "deg", "t", "kind", "cut", "symbol_file", "coefficient_file")
        values = dict(zip(names, args))
        values.update(kwargs)
        new_ophash = hash(tuple(values.get(name) for name in names))
        if self._ophash == new_ophash:
            logger.info("No change to operator parameters. Using prebuilt operator.")
        else:
            self._operator, self._ophash = func(self, *args, **kwargs), new_ophash
        return self._operator

    return __inner


class BlockMG:
    """Interface class for all functionalities of BlockMG: multigrid solvers
    for block-Toeplitz and block-circulant systems generated by matrix-valued
    symbols, the numeric checks of the two-grid theory, and the reproduction
    of the published iteration tables.

    Methods:
    --------
        run() -> int
            Runs the configured command and writes the results. Returns the
            exit status (nonzero if a solve did not converge or a check failed).

        # Methods to adjust parameters
        set_param(parameter, value)
            Sets a parameter to a given value. Refer to `help(BlockMGParameters)`.
        get_param(parameter) -> value
            Returns the current value of the given parameter.
        unset_param(parameter)
            Sets the specified parameter to None.
        show_params() -> str
            Returns the current set of parameters as a string.

        # Methods to access sub-functionalities
        initialize_reader(format="auto")
        initialize_writer(outfile=None, format="auto", float_precision=6)
        fine_operator(app, deg, t, kind, cut, symbol_file, coefficient_file)
        projector(z)
        solve() / analyze() / check_conditions() / reproduce()

    Example:
    --------
        ```python
        bmg = BlockMG(app="q-fem-1d", deg=2, t=6, z=[2., 3.], cycle="vcycle")
        reports = bmg.solve()
        bmg.set_param("command", "reproduce")
        bmg.set_param("table", "2")
        status = bmg.run()
        ```
    """

    def __init__(self, parameters: BlockMGParameters = None, **kwargs):
        """Initializes the python interface for BlockMG. Parameters can be
        provided as a BlockMGParameters object (kwargs are then ignored) or as
        keyword arguments."""
        logger.info("BlockMG: Initializing python interface...")
        if parameters is None:
            parameters = BlockMGParameters(**kwargs)
        parameters._blockmg = self
        self.parameters = parameters
        self.results = None
        self._operator = None  # Prebuilt fine operator
        self._ophash = None  # Hashed parameters of the operator

    def get_param(self, parameter: str):
        """Returns the current value of the given parameter"""
        return getattr(self.parameters, parameter)

    def set_param(self, parameter: str, value):
        """Sets a parameter to a given value"""
        logger.info(f"Setting `{parameter} = {value}`")
        setattr(self.parameters, parameter, value)
        logger.debug(f"New parameters: {self.show_params()}")

    def unset_param(self, parameter: str):
        """Sets a parameter to None"""
        setattr(self.parameters, parameter, None)

    def show_params(self) -> str:
        """Returns a string with all currently set parameters"""
        return repr(self.parameters)

    def run(self) -> int:
        """Runs the configured command, writes the results and returns the exit
        status."""
        self.results = None
        command = self.get_param("command")
        if command not in COMMANDS:
            raise ValueError(f"Unknown command: `{command}` (choose from: {', '.join(COMMANDS)})")

        writer = self.initialize_writer(
            outfile=self.get_param("output_file"),
            format=self.get_param("output_format"),
            float_precision=self.get_param("precision"))

        if command == "solve":
            self.results = self.solve()
            status = int(not all(r.converged for r in self.results))
        elif command == "analyze":
            self.results = self.analyze()
            if self.get_param("conjecture"):
                status = int(not all(r.level_constant for r in self.results))
            else:
                status = 0
        elif command == "conditions":
            self.results = self.check_conditions()
            status = int(not all(r.all_passed for r in self.results))
        else:
            self.results = [self.reproduce()]
            status = int(not self.results[0].passed)

        writer.write_results(self.results)
        if self.get_param("export_matrix") and command != "reproduce":
            write_matrix_market(self._current_operator(), self.get_param("export_matrix"))
        return status

    def initialize_reader(self, format: str = "auto") -> SymbolReader:
        """Initializes a SymbolReader.

        Parameters:
        -----------
            format: str
                File format of the symbol file. {'auto', 'json', 'npz'}
        """
        logger.info("Initializing reader for symbol file...")
        logger.debug(f"... setting reader parameters: {format=}")
        return SymbolReader(filetype_str=format)

    def initialize_writer(self, outfile: str = None, format: str = "auto",
                          float_precision: int = 6) -> ResultsWriter:
        """Initializes a ResultsWriter.

        Parameters:
        -----------
            outfile: str
                The file path to write results to (stdout if None). The file
                extension is used to infer the output format, if not provided.
            format: str
                {'auto', 'csv', 'json', 'tsv'}
            float_precision: int
                Significant digits of floating point values.
        """
        logger.info("Initializing writer for results...")
        logger.debug(f"... setting writer parameters: {outfile=}, {format=}, {float_precision=}")
        return ResultsWriter(outfile, format=format, float_precision=float_precision)

    def _read_symbol(self) -> MatrixSymbol:
        symbol_file = self.get_param("symbol_file")
        if symbol_file is None:
            raise ApplicationError("The application `symbol-file` requires a symbol file")
        logger.info(f"Reading symbol from: {symbol_file}")
        return self.initialize_reader().readFile(symbol_file)

    @cache_operator
    def fine_operator(self, app: str, deg: int = 2, t: int = 5, kind: str = "toeplitz",
                      cut: bool = False, symbol_file: str = None,
                      coefficient_file: str = None) -> StructuredOperator:
        """Builds the fine operator of the application (cached as long as the
        parameters do not change).

        Parameters:
        -----------
            app : str {'q-fem-1d', 'q-fem-2d', 'dg', 'symbol-file'}
            deg : int
                FEM degree.
            t : int
                Level exponent.
            kind : str {'toeplitz', 'circulant'}
                Only for 'symbol-file'.
            cut : bool
                Cut 1D FEM stiffness or cut 'symbol-file' Toeplitz operator.
            symbol_file, coefficient_file : str
        """
        if app == "symbol-file":
            sym = self._read_symbol()
            if cut and sym.levels > 1:
                raise ApplicationError(f"Cut operators are only built from 1-level symbol files; "
                                       f"`{symbol_file}` has {sym.levels} levels")
            n = 2 ** t if kind == "circulant" else 2 ** t - 1
            return build_operator(sym, (n,) * sym.levels, kind, cut=cut)
        if app not in APPS:
            raise ApplicationError(f"Unknown application: `{app}`")
        fine, _ = application_problem(app, deg, t, 1., cut=cut, coefficient_file=coefficient_file)
        return fine

    def _current_operator(self) -> StructuredOperator:
        return self.fine_operator(
            self.get_param("app"), self.get_param("deg"), self.get_param("t"),
            self.get_param("kind"), self.get_param("cut"),
            self.get_param("symbol_file"), self.get_param("coefficient_file"))

    def projector(self, z: float) -> MatrixSymbol:
        """Projector symbol p_z matching the current application"""
        app = self.get_param("app")
        if app == "symbol-file":
            op = self._current_operator()
            if op.symbol.levels == 1:
                return projector_symbol_pz(op.block_size, z)
            return projector_symbol_pz_multilevel(op.block_size, z, op.symbol.levels)
        return application_projector(app, self.get_param("deg"), z)

    def _smoother_config(self, op: StructuredOperator) -> SmootherConfig:
        method = METHOD_ALIASES.get(str(self.get_param("smoother")).lower())
        if method is None:
            raise SmootherError(f"Unknown smoother: `{self.get_param('smoother')}`")
        omega_pre, omega_post = self.get_param("omega_pre"), self.get_param("omega_post")
        if method == "gauss_seidel":
            omega_pre = 1. if omega_pre is None else omega_pre
        elif omega_pre is None:
            omega_pre, default_post = default_omegas(op, method)
            omega_post = default_post if omega_post is None else omega_post
        elif omega_post is None:
            omega_post = 2 * omega_pre / 3
        logger.info(f"Smoother: {method} ({omega_pre=}, {omega_post=})")
        return SmootherConfig(method=method, omega=omega_pre, omega_post=omega_post)

    def solve(self) -> List:
        """Runs one multigrid solve (sine right-hand side, zero initial guess)
        per value of `z`.

        Returns:
        --------
            reports : List[SolveReport]
        """
        op = self._current_operator()
        config = self._smoother_config(op)
        x_true, b = make_rhs_sine(op)
        x0 = None
        if self.get_param("seed") is not None:
            x0 = np.random.default_rng(self.get_param("seed")).standard_normal(op.dim)
        reports = []
        for z in self.get_param("z"):
            hierarchy = build_hierarchy(op, self.projector(z), config, self.get_param("cycle"))
            report = solve(hierarchy, b, tol=self.get_param("tol"), max_iter=self.get_param("max_iter"),
                           x0=x0, x_true=x_true)
            report.context = {"app": self.get_param("app"), "deg": self.get_param("deg"),
                              "t": self.get_param("t"), "N": op.dim, "z": z,
                              "cycle": hierarchy.cycle, "smoother": config.method}
            reports.append(report)
        return reports

    def _one_level_symbol(self) -> Tuple[MatrixSymbol, int]:
        app = self.get_param("app")
        if app == "q-fem-1d":
            f, _ = fem_symbols_1d(self.get_param("deg"))
        elif app == "symbol-file":
            f = self._read_symbol()
        else:
            raise ApplicationError(f"The symbol analysis works on 1-level symbols (q-fem-1d, symbol-file), not `{app}`")
        if f.levels != 1:
            raise ApplicationError(f"The symbol analysis works on 1-level symbols, got {f}")
        return f, f.block_size

    def analyze(self) -> List:
        """Conditioning of the coarse symbols over `levels` levels for every
        `z` (or the level ratios of lambda''_min if `conjecture` is set).

        Returns:
        --------
            reports : List[ConditioningReport] or List[ConjectureReport]
        """
        levels = self.get_param("levels")
        if self.get_param("conjecture"):
            if self.get_param("app") != "q-fem-1d":
                raise ApplicationError("The level-ratio check is defined for the q-fem-1d application")
            return [check_conjecture(self.get_param("deg"), z, levels) for z in self.get_param("z")]
        f, d = self._one_level_symbol()
        return [conditioning_sweep(f, d, z, levels, grid=self.get_param("grid")) for z in self.get_param("z")]

    def check_conditions(self) -> List:
        """Checks the two-grid conditions for (f, p_z) for every `z`.

        Returns:
        --------
            reports : List[ConditionCheckReport]
        """
        f, d = self._one_level_symbol()
        reports = []
        for z in self.get_param("z"):
            report = check_tgm_conditions(f, projector_symbol_pz(d, z), grid=self.get_param("grid"))
            report.context = {"app": self.get_param("app"), "deg": d, "z": z}
            reports.append(report)
        return reports

    def reproduce(self):
        """Runs the sweep of the published table `table`.

        Returns:
        --------
            result : TableResult
        """
        table = self.get_param("table")
        if table is None:
            raise ValueError("No table given for `reproduce`")
        return run_table(table, t_min=self.get_param("t_min"), t_max=self.get_param("t_max"),
                         z_values=self.get_param("z") or None,
                         coefficient_file=self.get_param("coefficient_file"),
                         show_progress=self.get_param("show_progress"),
                         tol=self.get_param("tol"), max_iter=self.get_param("max_iter"))
