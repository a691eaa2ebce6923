from dataclasses import dataclass, field
import typing
from ..utils.constants import DEFAULT_MAX_ITER, DEFAULT_TOLERANCE, DEFAULT_Z_VALUES, NORM_GRID_1D
from ..utils.logging import logging

logger = logging.getLogger("BlockMG")

def set_logger_level(func):
    """Set logger.level while modifying verbose-attribute"""
    def _inner_(self, __attr, __value):
        rvalue = func(self, __attr, __value)
        if __attr == "verbose":
            if not __value:
                logger.setLevel(logging.WARNING)
            elif __value == 1:
                logger.setLevel(logging.INFO)
            else:
                logger.setLevel(logging.DEBUG)
        return rvalue
    return _inner_

def set_single_as_list(func):
    """Allows list-attributes (e.g., z) to be set with a single value"""
    def _inner_(self, __attr, __value):
        dtype = typing.get_type_hints(self).get(__attr, None)
        if typing.get_origin(dtype) is list:
            if __value is None:
                __value = []
            elif not isinstance(__value, typing.Iterable) or isinstance(__value, str):
                __value = [__value]
            else:
                __value = list(__value)
        return func(self, __attr, __value)
    return _inner_


@dataclass
class BlockMGParameters:
    """The parameters that govern the function of BlockMG

    Parameters:
    -----------
        command : str
            What `run()` does:
            - 'solve': multigrid solve of the chosen application (default).
            - 'analyze': conditioning of the coarse symbols over `levels` levels
              (or the level ratios of lambda''_min if `conjecture` is set).
            - 'conditions': numeric check of the two-grid conditions.
            - 'reproduce': sweep of a published table.
        app : str
            The application:
            - 'q-fem-1d': Q_deg Lagrange FEM stiffness, 1D (default).
            - 'q-fem-2d': Q_deg Lagrange FEM stiffness K x M + M x K, 2D.
            - 'dg': staggered DG Toeplitz system (needs `coefficient_file`).
            - 'symbol-file': operator generated by the symbol in `symbol_file`.
        deg : int
            FEM polynomial degree (1..6). Default: 2.
        t : int
            Level exponent, n = 2^t - 1 blocks per direction (Toeplitz) or
            n = 2^t (circulant `symbol-file` problems). Default: 5.
        z : List[float] or float
            Parameters of the projector p_z (default: 1..5). Multiple values
            run one solve or analysis each.
        kind : str
            'toeplitz' (default) or 'circulant' (only for 'symbol-file').
        cycle : str
            'tgm' (two-grid, default) or 'vcycle'.
        smoother : str
            'gs' (Gauss-Seidel, default), 'jacobi' or 'richardson'.
        omega_pre, omega_post : float
            Relaxation parameters. Default: the admissible bound and 2/3 of it
            (1 for Gauss-Seidel).
        tol : float
            Relative residual tolerance. Default: 1e-7.
        max_iter : int
            Maximum number of cycles. Default: 4000.
        seed : int
            Seed of a random initial guess (zero initial guess if not given).
        output_file : str
            The file to write the output to (stdout if not given).
        output_format : str
            'auto' (from the file extension, default), 'csv', 'json' or 'tsv'.
        symbol_file : str
            JSON symbol of the 'symbol-file' application.
        coefficient_file : str
            JSON symbol with the DG coefficients.
        table : str
            Table key for 'reproduce' ('1'..'10', 'q3-vcycle', 'q4-vcycle').
        t_min, t_max : int
            Row range of 'reproduce' (default: the published rows).
        levels : int
            Number of coarse levels of 'analyze'. Default: 4.
        cut : bool
            Use the cut 1D stiffness matrix (size deg*n - 1) instead of T_n(f).
        grid : int
            Grid points per variable for sup-norms and condition checks.
        precision : int
            Significant digits of floating point values in the output.
        export_matrix : str
            Write the fine operator in Matrix Market format to this file.
        conjecture : bool
            Make 'analyze' report the level ratios of lambda''_min.
        show_progress : bool
            Show a progress bar during table sweeps.
        verbose : int
            0: warnings only, 1: info, 2: debug.
    """
    command : str = "solve"
    app : str = "q-fem-1d"
    deg : int = 2
    t : int = 5
    z : typing.List[float] = field(default_factory=lambda: list(DEFAULT_Z_VALUES))
    kind : str = "toeplitz"

    # Multigrid Options
    cycle : str = "tgm"
    smoother : str = "gs"
    omega_pre : float = None
    omega_post : float = None
    tol : float = DEFAULT_TOLERANCE
    max_iter : int = DEFAULT_MAX_ITER
    seed : int = None

    # Input/Output Options
    output_file : str = None
    output_format : str = "auto"
    symbol_file : str = None
    coefficient_file : str = None
    export_matrix : str = None

    # Analysis and Reproduction Options
    table : str = None
    t_min : int = None
    t_max : int = None
    levels : int = 4
    cut : bool = False
    grid : int = NORM_GRID_1D
    conjecture : bool = False

    # Miscellaneous Options
    precision : int = 6
    show_progress : bool = False
    verbose : int = 0

    # References to the owning BlockMG object, not to be set by user
    _blockmg = None

    @set_logger_level
    @set_single_as_list
    def __setattr__(self, __attr, __value) -> None:
        """Custom function to set attributes, to catch certain special behaviours"""
        super().__setattr__(__attr, __value)
