"""blockmg.symbols contains the matrix-valued trigonometric polynomials
(symbols) that generate the structured matrices, together with their
evaluation, eigendecomposition and coefficient arithmetic.

A symbol f of block size d in k frequency variables is stored by its Fourier
coefficients:

    f(theta) = sum_j  a_j * exp(i <j, theta>)

where j runs over integer multi-indices and every a_j is a d x d matrix.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, Tuple
import numpy as np

from ..utils.constants import default_norm_grid
from ..utils.utils import check_finite, chunked, symmetrize

Offset = Tuple[int, ...]


class SymbolError(ValueError):
    """Raised on invalid coefficients, Hermitian violations or mismatching
    symbol dimensions"""
    pass


def _as_offset(j, levels: int) -> Offset:
    if isinstance(j, (int, np.integer)):
        j = (int(j),)
    j = tuple(int(ji) for ji in j)
    if len(j) != levels:
        raise SymbolError(f"Offset {j} does not match the number of levels ({levels})")
    return j


def _neg(j: Offset) -> Offset:
    return tuple(-ji for ji in j)


@dataclass(frozen=True, eq=False)
class MatrixSymbol:
    """A d x d matrix-valued trigonometric polynomial.

    Attributes:
    -----------
        coeffs : Dict[Tuple[int], Array[d,d]]
            Fourier coefficients by offset multi-index. Missing offsets are
            zero. Integer keys are accepted for 1-level symbols.
        block_size : int
            The block size d.
        levels : int
            The number of frequency variables.
        hermitian : bool
            If set, a_{-j} = a_j^H is enforced for every stored offset.
    """
    coeffs: Dict[Offset, np.ndarray]
    block_size: int
    levels: int = 1
    hermitian: bool = False
    _scale: float = field(default=0., init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.levels) < 1:
            raise SymbolError(f"A symbol needs at least one level: {self.levels=}")
        if int(self.block_size) < 1:
            raise SymbolError(f"Block size must be positive: {self.block_size=}")
        d = int(self.block_size)
        coeffs = {}
        for j, a in dict(self.coeffs).items():
            j = _as_offset(j, self.levels)
            a = np.array(a, dtype=complex)
            if a.ndim == 0 and d == 1:
                a = a.reshape(1, 1)
            if a.shape != (d, d):
                raise SymbolError(f"Coefficient at offset {j} has shape {a.shape}, expected {(d, d)}")
            check_finite(a, f"coefficient at offset {j}")
            coeffs[j] = coeffs.get(j, 0) + a
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "block_size", d)
        object.__setattr__(self, "levels", int(self.levels))
        scale = max((float(np.max(np.abs(a))) for a in coeffs.values()), default=0.)
        object.__setattr__(self, "_scale", scale)
        if self.hermitian:
            zero = np.zeros((d, d), dtype=complex)
            for j, a in coeffs.items():
                defect = np.max(np.abs(coeffs.get(_neg(j), zero) - a.conj().T))
                if defect > 1e-12 * max(scale, 1.):
                    raise SymbolError(f"Hermitian symbol violated at offset {j}: |a_-j - a_j^H| = {defect:.3e}")

    def __repr__(self):
        return (f"MatrixSymbol(d={self.block_size}, levels={self.levels}, "
                f"degree={self.degree}, hermitian={self.hermitian})")

    def __call__(self, theta) -> np.ndarray:
        return evaluate(self, theta)

    @property
    def degree(self) -> Offset:
        """Componentwise max |j| over the nonzero coefficients"""
        deg = [0] * self.levels
        for j, a in self.coeffs.items():
            if np.any(a != 0):
                deg = [max(di, abs(ji)) for di, ji in zip(deg, j)]
        return tuple(deg)

    @property
    def offsets(self) -> Tuple[Offset, ...]:
        return tuple(sorted(self.coeffs))

    @property
    def scale(self) -> float:
        """Largest absolute coefficient entry"""
        return self._scale

    def coefficient(self, j) -> np.ndarray:
        """Returns a_j (a zero matrix for offsets that are not stored)"""
        j = _as_offset(j, self.levels)
        d = self.block_size
        return self.coeffs.get(j, np.zeros((d, d), dtype=complex)).copy()

    @classmethod
    def scalar(cls, coeffs: Dict[int, complex], hermitian: bool = True) -> "MatrixSymbol":
        """Builds a 1-level scalar symbol from {offset: value}. For instance
        `MatrixSymbol.scalar({0: 2, 1: -1, -1: -1})` is 2 - 2cos(theta)."""
        return cls({(j,): [[c]] for j, c in coeffs.items()}, block_size=1, levels=1, hermitian=hermitian)

    @classmethod
    def constant(cls, a: np.ndarray, levels: int = 1) -> "MatrixSymbol":
        """The symbol f(theta) = a"""
        a = np.atleast_2d(np.asarray(a, dtype=complex))
        return cls({(0,) * levels: a}, block_size=a.shape[0], levels=levels,
                   hermitian=bool(np.allclose(a, a.conj().T)))


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix: ascending real eigenvalues
    and the unitary matrix of eigenvectors (as columns)."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def _stack(sym: MatrixSymbol) -> Tuple[np.ndarray, np.ndarray]:
    offsets = sym.offsets
    if not offsets:
        return np.zeros((0, sym.levels)), np.zeros((0, sym.block_size, sym.block_size), dtype=complex)
    J = np.array(offsets, dtype=float).reshape(len(offsets), sym.levels)
    C = np.stack([sym.coeffs[j] for j in offsets])
    return J, C


def evaluate(sym: MatrixSymbol, theta) -> np.ndarray:
    """Evaluates f(theta) = sum_j a_j exp(i <j, theta>).

    Parameters:
    -----------
        sym : MatrixSymbol
            The symbol to evaluate.
        theta : float or Array[levels]
            The frequency point.

    Returns:
    --------
        f : Array[d,d]
            Complex matrix; Hermitian (symmetrized) for Hermitian symbols.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (sym.levels,):
        raise SymbolError(f"Theta with {theta.size} components given for a symbol with {sym.levels} level(s)")
    return evaluate_grid(sym, theta.reshape(1, -1))[0]


def evaluate_grid(sym: MatrixSymbol, thetas: np.ndarray) -> np.ndarray:
    """Evaluates the symbol on M points at once.

    Parameters:
    -----------
        thetas : Array[M,levels]

    Returns:
    --------
        values : Array[M,d,d]
    """
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim == 1 and sym.levels == 1:
        thetas = thetas.reshape(-1, 1)
    if thetas.ndim != 2 or thetas.shape[1] != sym.levels:
        raise SymbolError(f"Grid of shape {thetas.shape} does not match a symbol with {sym.levels} level(s)")
    J, C = _stack(sym)
    phases = np.exp(1j * (thetas @ J.T))
    values = np.einsum("mk,kab->mab", phases, C)
    if sym.hermitian:
        values = symmetrize(values)
    return values


def theta_grid(grid: int, levels: int = 1) -> np.ndarray:
    """Uniform grid 2*pi*k/grid, k = 0..grid-1, in each of `levels` variables.
    For even `grid` it contains both 0 and pi.

    Returns:
    --------
        thetas : Array[grid**levels, levels]
            First variable outermost.
    """
    if grid < 1:
        raise SymbolError(f"Grid size must be positive: {grid=}")
    axis = 2 * np.pi * np.arange(grid) / grid
    mesh = np.meshgrid(*([axis] * levels), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def hermitian_eig(m: np.ndarray) -> EigenDecomposition:
    """Dense eigendecomposition of a small Hermitian matrix.

    Parameters:
    -----------
        m : Array[d,d]
            Hermitian to 1e-10 relative to its norm.

    Returns:
    --------
        eig : EigenDecomposition
            Ascending eigenvalues and unitary eigenvectors.

    Raises:
    -------
        NonFiniteError
            If `m` has NaN or infinite entries.
        SymbolError
            If `m` is not square or not Hermitian.
    """
    m = np.asarray(m, dtype=complex)
    check_finite(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SymbolError(f"Expected a square matrix, got shape {m.shape}")
    norm = np.linalg.norm(m, 2) if m.size else 0.
    if np.max(np.abs(m - m.conj().T), initial=0.) > 1e-10 * max(norm, 1e-300):
        raise SymbolError("Matrix is not Hermitian; symmetrize it first")
    w, u = np.linalg.eigh(symmetrize(m))
    return EigenDecomposition(eigenvalues=w, eigenvectors=u)


def eigvalsh_grid(sym: MatrixSymbol, thetas: np.ndarray, chunk_size: int = 8192) -> np.ndarray:
    """Ascending eigenvalues of f(theta) for every grid point: Array[M,d]"""
    thetas = np.asarray(thetas, dtype=float).reshape(-1, sym.levels)
    out = np.empty((thetas.shape[0], sym.block_size))
    for sl in chunked(thetas.shape[0], chunk_size):
        out[sl] = np.linalg.eigvalsh(symmetrize(evaluate_grid(sym, thetas[sl])))
    return out


def sup_norm(sym: MatrixSymbol, grid: int = None, chunk_size: int = 8192) -> float:
    """max over a uniform grid of the spectral norm of f(theta). This is a
    lower bound of the true supremum; `grid` defaults to 4096 points (1 level)
    or 256 points per variable."""
    grid = grid or default_norm_grid(sym.levels)
    thetas = theta_grid(grid, sym.levels)
    best = 0.
    for sl in chunked(thetas.shape[0], chunk_size):
        values = evaluate_grid(sym, thetas[sl])
        if sym.hermitian:
            norms = np.max(np.abs(np.linalg.eigvalsh(values)), axis=-1)
        else:
            norms = np.linalg.norm(values, ord=2, axis=(1, 2))
        best = max(best, float(np.max(norms, initial=0.)))
    return best


def projector_symbol_pz(d: int, z: float) -> MatrixSymbol:
    """The projector family p_z(theta) = (1 + cos theta)(I_d + (z-1)/d ee^T).

    Parameters:
    -----------
        d : int
            Block size.
        z : float
            Positive tuning parameter; z = 1 gives (1 + cos theta) I_d.
    """
    if not z > 0:
        raise SymbolError(f"The projector parameter must be positive: {z=}")
    if d < 1:
        raise SymbolError(f"Block size must be positive: {d=}")
    b = np.eye(d) + (z - 1.) / d * np.ones((d, d))
    return MatrixSymbol({(0,): b, (1,): b / 2, (-1,): b / 2}, block_size=d, levels=1, hermitian=True)


def projector_symbol_pz_multilevel(d: int, z: float, levels: int = 2) -> MatrixSymbol:
    """Tensor projector prod_i (1 + cos theta_i) * (I_d + (z-1)/d ee^T)"""
    base = projector_symbol_pz(d, z)
    b = base.coefficient(0)
    weights = {-1: .5, 0: 1., 1: .5}
    coeffs = {}
    for j in np.ndindex(*([3] * levels)):
        offset = tuple(ji - 1 for ji in j)
        coeffs[offset] = np.prod([weights[o] for o in offset]) * b
    return MatrixSymbol(coeffs, block_size=d, levels=levels, hermitian=True)


def _check_compatible(a: MatrixSymbol, b: MatrixSymbol):
    if a.block_size != b.block_size:
        raise SymbolError(f"Block sizes do not match: {a.block_size} vs {b.block_size}")
    if a.levels != b.levels:
        raise SymbolError(f"Number of levels do not match: {a.levels} vs {b.levels}")


def symbol_product(a: MatrixSymbol, b: MatrixSymbol) -> MatrixSymbol:
    """Product a(theta) b(theta) computed by coefficient convolution"""
    _check_compatible(a, b)
    out = defaultdict(lambda: np.zeros((a.block_size, a.block_size), dtype=complex))
    for ja in a.offsets:
        for jb in b.offsets:
            j = tuple(x + y for x, y in zip(ja, jb))
            out[j] = out[j] + a.coeffs[ja] @ b.coeffs[jb]
    return MatrixSymbol(dict(out), block_size=a.block_size, levels=a.levels)


def adjoint_symbol(a: MatrixSymbol) -> MatrixSymbol:
    """The symbol theta -> a(theta)^H"""
    coeffs = {_neg(j): c.conj().T for j, c in a.coeffs.items()}
    return MatrixSymbol(coeffs, block_size=a.block_size, levels=a.levels, hermitian=a.hermitian)


def hermitian_part(a: MatrixSymbol) -> MatrixSymbol:
    """Symmetrizes the coefficients so that a_{-j} = a_j^H holds exactly"""
    coeffs = {}
    for j in set(a.coeffs) | {_neg(j) for j in a.coeffs}:
        coeffs[j] = .5 * (a.coefficient(j) + a.coefficient(_neg(j)).conj().T)
    return MatrixSymbol(coeffs, block_size=a.block_size, levels=a.levels, hermitian=True)


def coarse_symbol(f: MatrixSymbol, p: MatrixSymbol) -> MatrixSymbol:
    """Symbol of the Galerkin coarse operator:

        f_hat(theta) = 1/2 (p^H f p (theta/2) + p^H f p (theta/2 + pi))

    g = p^H f p is formed by coefficient convolution and f_hat keeps the
    even-frequency coefficients, f_hat_m = g_2m.
    """
    _check_compatible(f, p)
    if p.levels != 1:
        raise SymbolError("coarse_symbol requires 1-level symbols")
    g = symbol_product(symbol_product(adjoint_symbol(p), f), p)
    coeffs = {(j[0] // 2,): c for j, c in g.coeffs.items() if j[0] % 2 == 0}
    return hermitian_part(MatrixSymbol(coeffs, block_size=f.block_size, levels=1))


def iterate_coarse_symbols(f: MatrixSymbol, p: MatrixSymbol, levels: int) -> Iterable[MatrixSymbol]:
    """Yields f_hat_1, ..., f_hat_levels with f_hat_j = coarse_symbol(f_hat_{j-1}, p)"""
    current = f
    for _ in range(levels):
        current = coarse_symbol(current, p)
        yield current


