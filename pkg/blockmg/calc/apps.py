"""blockmg.apps generates the application operators: Q_deg Lagrange FEM
stiffness and mass symbols assembled from the reference element, the 1D
(cut) stiffness matrices, the 2D tensor stiffness K x M + M x K, and the
2-level staggered DG Toeplitz systems built from ingested coefficients.
"""

from dataclasses import dataclass
from typing import Tuple
import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.legendre import leggauss
from scipy import sparse

from .structured import GridTransfer, StructuredOperator, build_operator, build_transfer
from .symbols import MatrixSymbol, projector_symbol_pz, projector_symbol_pz_multilevel
from ..utils.logging import logging

logger = logging.getLogger("BlockMG")

SUPPORTED_DEGREES = range(1, 7)
DG_BLOCK_SIZE = 9
DG_OFFSETS = {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}


class ApplicationError(ValueError):
    """Raised on unsupported FEM degrees, dimensions or level exponents"""
    pass


class DgCoefficientError(ValueError):
    """Raised if DG coefficients violate the structure or the order-two zero
    of the minimal eigenvalue at the origin"""
    pass


@dataclass(frozen=True)
class FemSpec:
    """Q_deg Lagrange FEM problem on a uniform mesh with n = 2^t - 1 blocks"""
    deg: int
    dimension: int = 1
    t: int = 3

    def __post_init__(self):
        if self.deg not in SUPPORTED_DEGREES:
            raise ApplicationError(f"Unsupported FEM degree: {self.deg} (supported: 1..6)")
        if self.dimension not in (1, 2):
            raise ApplicationError(f"FEM dimension must be 1 or 2, got {self.dimension}")
        if self.t < 2:
            raise ApplicationError(f"The level exponent must be at least 2, got t={self.t}")

    @property
    def n(self) -> int:
        return 2 ** self.t - 1


@dataclass(frozen=True)
class DgSpec:
    """Staggered DG problem: coefficient file (9x9 blocks at the offsets
    (0,0), (+-1,0), (0,+-1)) and level exponent t, n = 2^t - 1"""
    coefficient_file: str
    t: int = 3

    def __post_init__(self):
        if self.t < 2:
            raise ApplicationError(f"The level exponent must be at least 2, got t={self.t}")

    @property
    def n(self) -> int:
        return 2 ** self.t - 1


def _reference_element(deg: int) -> Tuple[np.ndarray, np.ndarray]:
    """Stiffness and mass matrices of the Q_deg element on [0, 1] with
    equispaced nodes, integrated exactly by Gauss-Legendre quadrature."""
    nodes = np.linspace(0., 1., deg + 1)
    basis = []
    for a, xa in enumerate(nodes):
        others = np.delete(nodes, a)
        basis.append(Polynomial.fromroots(others) / np.prod(xa - others))
    gx, gw = leggauss(deg + 1)
    x, w = (gx + 1) / 2, gw / 2
    values = np.array([phi(x) for phi in basis])
    slopes = np.array([phi.deriv()(x) for phi in basis])
    stiffness = (slopes * w) @ slopes.T
    mass = (values * w) @ values.T
    return stiffness, mass


def _assemble_symbol(element: np.ndarray, deg: int) -> MatrixSymbol:
    """Accumulates an element matrix into the coefficients a_-1, a_0, a_1.

    Unknowns per period are the deg - 1 interior nodes, left to right, then
    the right endpoint. The left endpoint of an element is the right endpoint
    of the previous period."""
    local = [(-1, deg - 1)] + [(0, a - 1) for a in range(1, deg + 1)]
    coeffs = {j: np.zeros((deg, deg)) for j in (-1, 0, 1)}
    for a, (oa, pa) in enumerate(local):
        for b, (ob, pb) in enumerate(local):
            coeffs[oa - ob][pa, pb] += element[a, b]
    coeffs[0] = .5 * (coeffs[0] + coeffs[0].T)
    coeffs[-1] = coeffs[1].T.copy()
    return MatrixSymbol({(j,): c for j, c in coeffs.items()}, block_size=deg, levels=1, hermitian=True)


def fem_symbols_1d(deg: int) -> Tuple[MatrixSymbol, MatrixSymbol]:
    """Stiffness symbol f and mass symbol h of the Q_deg Lagrange FEM on a
    uniform 1D mesh (mesh width 1).

    For deg = 2: a_0 = 1/3 [[16, -8], [-8, 14]], a_1 = 1/3 [[0, -8], [0, 1]].
    For deg = 1: f(theta) = 2 - 2 cos(theta).

    Returns:
    --------
        f, h : MatrixSymbol
            deg x deg Hermitian symbols.
    """
    if deg not in SUPPORTED_DEGREES:
        raise ApplicationError(f"Unsupported FEM degree: {deg} (supported: 1..6)")
    stiffness, mass = _reference_element(deg)
    return _assemble_symbol(stiffness, deg), _assemble_symbol(mass, deg)


def fem_matrix_1d(spec: FemSpec, cut: bool = True) -> StructuredOperator:
    """K_n = T_n(f)_-, of size deg*n - 1 (deg*n for `cut=False`)"""
    f, _ = fem_symbols_1d(spec.deg)
    return build_operator(f, spec.n, "toeplitz", cut=cut)


def fem_mass_1d(spec: FemSpec, cut: bool = True) -> StructuredOperator:
    """M_n = T_n(h)_-"""
    _, h = fem_symbols_1d(spec.deg)
    return build_operator(h, spec.n, "toeplitz", cut=cut)


def fem_matrix_2d(spec: FemSpec) -> StructuredOperator:
    """A_N = K_n x M_n + M_n x K_n of size (deg*n - 1)^2"""
    k = fem_matrix_1d(spec).matrix
    m = fem_mass_1d(spec).matrix
    matrix = (sparse.kron(k, m) + sparse.kron(m, k)).tocsr()
    matrix.sort_indices()
    logger.debug(f"... built 2D Q{spec.deg} stiffness: N={matrix.shape[0]}, nnz={matrix.nnz}")
    return StructuredOperator(kind="toeplitz", sizes=(spec.n, spec.n), block_size=spec.deg,
                              matrix=matrix, symbol=None, cut=(True, True), hermitian=True)


def validate_dg_symbol(sym: MatrixSymbol) -> MatrixSymbol:
    """Checks the structure of DG coefficients and the order-two zero of
    lambda_min at the origin."""
    from .analysis import check_order_two_zero

    if sym.levels != 2 or sym.block_size != DG_BLOCK_SIZE:
        raise DgCoefficientError(f"DG coefficients must be 2-level 9x9 blocks, got {sym}")
    extra = {j for j, a in sym.coeffs.items() if np.any(a != 0)} - DG_OFFSETS
    if extra:
        raise DgCoefficientError(f"DG coefficients only use the offsets {sorted(DG_OFFSETS)}, found {sorted(extra)}")
    if not sym.hermitian:
        raise DgCoefficientError("DG coefficients must form a Hermitian symbol")
    ok, reason = check_order_two_zero(sym)
    if not ok:
        raise DgCoefficientError(f"Invalid DG symbol: {reason}")
    return sym


def load_dg_symbol(coefficient_file: str) -> MatrixSymbol:
    """Reads and validates DG coefficients from a symbol file"""
    from ..io.reader import SymbolReader

    logger.info(f"Reading DG coefficients from: {coefficient_file}")
    return validate_dg_symbol(SymbolReader().readFile(coefficient_file))


def dg_system(spec: DgSpec, symbol: MatrixSymbol = None) -> StructuredOperator:
    """2-level block-Toeplitz T_n(f), d = 9, N = 9 n^2. If `symbol` is not
    given, it is read from `spec.coefficient_file`."""
    sym = validate_dg_symbol(symbol) if symbol is not None else load_dg_symbol(spec.coefficient_file)
    return build_operator(sym, (spec.n, spec.n), "toeplitz")


def dg_transfer(spec: DgSpec, z: float) -> GridTransfer:
    """(T_n(p_z) x T_n(p_z)) (K_n^T x I_9) with the bivariate projector
    (1 + cos theta_1)(1 + cos theta_2)(I_9 + (z-1)/9 ee^T)"""
    p = projector_symbol_pz_multilevel(DG_BLOCK_SIZE, z, levels=2)
    return build_transfer(p, (spec.n, spec.n), "toeplitz")


def synthetic_dg_symbol(c: float = 1.) -> MatrixSymbol:
    """A valid DG-shaped symbol with an order-two zero at the origin:

        f(theta) = (4 - 2 cos theta_1 - 2 cos theta_2) I_9 + c (I_9 - ee^T/9)
    """
    d = DG_BLOCK_SIZE
    eye = np.eye(d)
    coeffs = {(0, 0): 4 * eye + c * (eye - np.ones((d, d)) / d)}
    for j in DG_OFFSETS - {(0, 0)}:
        coeffs[j] = -eye
    return MatrixSymbol(coeffs, block_size=d, levels=2, hermitian=True)


APPS = ("q-fem-1d", "q-fem-2d", "dg")


def application_problem(app: str, deg: int = 2, t: int = 3, z: float = 2., cut: bool = False,
                        coefficient_file: str = None,
                        symbol: MatrixSymbol = None) -> Tuple[StructuredOperator, MatrixSymbol]:
    """Fine operator and projector symbol of one application.

    Parameters:
    -----------
        app : str {'q-fem-1d', 'q-fem-2d', 'dg'}
        deg : int
            FEM degree (ignored for 'dg').
        t : int
            Level exponent, n = 2^t - 1.
        z : float
            Parameter of the projector p_z.
        cut : bool
            1D only: use the cut stiffness matrix (size deg*n - 1) instead of
            T_n(f). The 2D operator is always cut.
        coefficient_file : str
            DG coefficients (unless `symbol` is given).
        symbol : MatrixSymbol
            Explicit DG symbol.

    Returns:
    --------
        fine : StructuredOperator
        p : MatrixSymbol
    """
    if app == "q-fem-1d":
        fine = fem_matrix_1d(FemSpec(deg, 1, t), cut=cut)
    elif app == "q-fem-2d":
        fine = fem_matrix_2d(FemSpec(deg, 2, t))
    elif app == "dg":
        fine = dg_system(DgSpec(coefficient_file, t), symbol)
    else:
        raise ApplicationError(f"Unknown application: `{app}` (choose from: {', '.join(APPS)})")
    return fine, application_projector(app, deg, z)


def application_projector(app: str, deg: int, z: float) -> MatrixSymbol:
    """p_z of the application: 1-level d = deg for FEM (tensorized over the
    2D levels by the transfer), bivariate d = 9 for DG"""
    if app == "dg":
        return projector_symbol_pz_multilevel(DG_BLOCK_SIZE, z, levels=2)
    return projector_symbol_pz(deg, z)
