"""blockmg.structured materializes block-circulant and block-Toeplitz
operators (1-level and multilevel, optionally boundary-cut), the cutting
matrices, the grid transfer operators p_n^k and the Galerkin triple product.

Unknowns are ordered with the first frequency variable outermost and the
block index innermost.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union
from warnings import warn
import numpy as np
from scipy import sparse

from .symbols import MatrixSymbol
from ..utils.constants import get_cap
from ..utils.logging import logging

logger = logging.getLogger("BlockMG")

KINDS = ("circulant", "toeplitz")


class StructureError(ValueError):
    """Raised on invalid kinds, sizes, cut flags or dimension mismatches"""
    pass


class DenseCapError(ValueError):
    """Raised if an operator is too large to be materialized densely"""
    pass


class SmallSizeWarning(UserWarning):
    """Raised if a Toeplitz size is not larger than twice the symbol degree"""
    pass


@dataclass(frozen=True, eq=False)
class StructuredOperator:
    """A block-circulant or block-Toeplitz operator in sparse storage.

    Attributes:
    -----------
        kind : str {'circulant', 'toeplitz'}
        sizes : Tuple[int]
            The multi-index n = (n_1, ..., n_k).
        block_size : int
            The block size d.
        matrix : scipy.sparse.csr_matrix
            The materialized operator.
        symbol : MatrixSymbol or None
            The generating symbol. Galerkin coarse operators carry None.
        cut : Tuple[bool]
            Per level: whether the last row and column were removed.
        hermitian : bool
            Whether the operator is known to be Hermitian.
    """
    kind: str
    sizes: Tuple[int, ...]
    block_size: int
    matrix: sparse.csr_matrix
    symbol: Optional[MatrixSymbol] = None
    cut: Tuple[bool, ...] = ()
    hermitian: bool = False

    def __repr__(self):
        return (f"<{self.kind} operator n={self.sizes} d={self.block_size} "
                f"N={self.dim} cut={self.cut} nnz={self.matrix.nnz}>")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        return matvec(self, x)


@dataclass(frozen=True, eq=False)
class CuttingMatrix:
    """Row-selection matrix K_n of shape (k, n).

    circulant_even: n = 2k, rows pick the even indices 0, 2, ..., n-2.
    toeplitz_odd: n = 2k + 1, rows pick the odd indices 1, 3, ..., n-2.
    """
    variant: str
    n: int
    k: int
    matrix: sparse.csr_matrix


@dataclass(frozen=True, eq=False)
class GridTransfer:
    """The grid transfer operator p_n^k.

    Attributes:
    -----------
        matrix : scipy.sparse.csr_matrix
            The materialized (fine x coarse) prolongation.
        block_size : int
        cutters : Tuple[CuttingMatrix]
            One per level.
        fine_sizes, coarse_sizes : Tuple[int]
        p_operator : StructuredOperator or None
            The structured operator generated by p (None for tensor transfers).
        factors : Tuple[scipy.sparse.csr_matrix] or None
            1D factors of a tensor transfer, applied dimension by dimension.
        cut : Tuple[bool]
    """
    matrix: sparse.csr_matrix
    block_size: int
    cutters: Tuple[CuttingMatrix, ...]
    fine_sizes: Tuple[int, ...]
    coarse_sizes: Tuple[int, ...]
    p_operator: Optional[StructuredOperator] = None
    factors: Optional[Tuple[sparse.csr_matrix, ...]] = None
    cut: Tuple[bool, ...] = ()

    def __repr__(self):
        return f"<GridTransfer {self.fine_sizes} -> {self.coarse_sizes} shape={self.matrix.shape}>"

    @property
    def fine_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def coarse_dim(self) -> int:
        return self.matrix.shape[1]


def _as_sizes(n, levels: int) -> Tuple[int, ...]:
    sizes = (int(n),) if np.isscalar(n) else tuple(int(ni) for ni in n)
    if len(sizes) != levels:
        raise StructureError(f"Sizes {sizes} do not match the number of levels ({levels})")
    if any(ni < 1 for ni in sizes):
        raise StructureError(f"All sizes must be positive: {sizes}")
    return sizes


def _as_cut(cut, levels: int) -> Tuple[bool, ...]:
    if isinstance(cut, (bool, np.bool_)) or cut is None:
        return (bool(cut),) * levels
    cut = tuple(bool(c) for c in cut)
    if len(cut) != levels:
        raise StructureError(f"Cut flags {cut} do not match the number of levels ({levels})")
    return cut


def _shift(kind: str, n: int, j: int) -> sparse.spmatrix:
    """n x n matrix with ones at (i, h) where i - h = j (wrapped for circulants)"""
    if kind == "toeplitz":
        return sparse.eye(n, k=-j, format="csr")
    rows = np.arange(n)
    cols = np.mod(rows - j, n)
    return sparse.coo_matrix((np.ones(n), (rows, cols)), shape=(n, n)).tocsr()


def _cut_mask(sizes: Tuple[int, ...], d: int, cut: Tuple[bool, ...]) -> np.ndarray:
    """Boolean mask of unknowns that survive the cut. On a cut level the last
    point drops its last block component; for 1 level this removes the last
    row and column."""
    index = np.indices(tuple(sizes) + (d,)).reshape(len(sizes) + 1, -1)
    keep = np.ones(index.shape[1], dtype=bool)
    for level, (n, c) in enumerate(zip(sizes, cut)):
        if c:
            keep &= ~((index[level] == n - 1) & (index[-1] == d - 1))
    return keep


def build_operator(sym: MatrixSymbol, n, kind: str = "toeplitz", cut=False) -> StructuredOperator:
    """Materializes T_n(f) or the block-circulant A_n(f).

    Parameters:
    -----------
        sym : MatrixSymbol
            The generating symbol f.
        n : int or Tuple[int]
            Number of blocks per level.
        kind : str {'circulant', 'toeplitz'}
        cut : bool or Tuple[bool]
            Remove the last row and column of each cut level (Toeplitz only).

    Returns:
    --------
        op : StructuredOperator

    Raises:
    -------
        StructureError
            Unknown kind, invalid sizes, or a cut on a circulant.
    """
    if kind not in KINDS:
        raise StructureError(f"Unknown operator kind: `{kind}`")
    sizes = _as_sizes(n, sym.levels)
    cut = _as_cut(cut, sym.levels)
    if kind == "circulant" and any(cut):
        raise StructureError("A boundary cut is only defined for Toeplitz operators")
    if kind == "toeplitz" and any(0 < r and ni <= 2 * r for ni, r in zip(sizes, sym.degree)):
        warn(f"Toeplitz size {sizes} is not larger than twice the symbol degree {sym.degree}",
             SmallSizeWarning)

    d = sym.block_size
    total = d * int(np.prod(sizes))
    matrix = sparse.csr_matrix((total, total), dtype=complex)
    for j in sym.offsets:
        a = sym.coeffs[j]
        if not np.any(a != 0) or any(abs(ji) >= ni and kind == "toeplitz" for ji, ni in zip(j, sizes)):
            continue
        term = sparse.csr_matrix(a)
        for ji, ni in zip(reversed(j), reversed(sizes)):
            term = sparse.kron(_shift(kind, ni, ji), term, format="csr")
        matrix = matrix + term
    if any(cut):
        keep = np.flatnonzero(_cut_mask(sizes, d, cut))
        matrix = matrix[keep][:, keep]
    matrix = _realify(matrix.tocsr())
    matrix.sort_indices()
    logger.debug(f"... built {kind} operator: {sizes=}, {d=}, N={matrix.shape[0]}, nnz={matrix.nnz}")
    return StructuredOperator(kind=kind, sizes=sizes, block_size=d, matrix=matrix,
                              symbol=sym, cut=cut, hermitian=sym.hermitian)


def _realify(matrix: sparse.spmatrix) -> sparse.csr_matrix:
    """Drops a vanishing imaginary part so that real problems stay real"""
    matrix = sparse.csr_matrix(matrix)
    if np.iscomplexobj(matrix.data) and not np.any(matrix.data.imag):
        matrix = sparse.csr_matrix(matrix.real)
    matrix.eliminate_zeros()
    return matrix


def matvec(op: StructuredOperator, x: np.ndarray) -> np.ndarray:
    """y = A x"""
    x = np.asarray(x)
    if x.shape != (op.dim,):
        raise StructureError(f"Vector of shape {x.shape} given for an operator of size {op.dim}")
    return op.matrix @ x


def cutting_matrix(kind: str, n: int) -> CuttingMatrix:
    """Builds the cutting matrix K_n for a circulant (n even) or Toeplitz
    (n odd, n >= 3) level."""
    if kind == "circulant":
        if n < 2 or n % 2:
            raise StructureError(f"Circulant cutting requires an even size, got {n=}")
        k, first, variant = n // 2, 0, "circulant_even"
    elif kind == "toeplitz":
        if n < 3 or n % 2 == 0:
            raise StructureError(f"Toeplitz cutting requires an odd size >= 3, got {n=}")
        k, first, variant = (n - 1) // 2, 1, "toeplitz_odd"
    else:
        raise StructureError(f"Unknown operator kind: `{kind}`")
    rows = np.arange(k)
    matrix = sparse.csr_matrix((np.ones(k), (rows, first + 2 * rows)), shape=(k, n))
    return CuttingMatrix(variant=variant, n=n, k=k, matrix=matrix)


def build_transfer(p: MatrixSymbol, n, kind: str = "toeplitz", cut=False) -> GridTransfer:
    """Builds p_n^k = A_n(p) (K_n^T x I_d) or T_n(p) (K_n^T x I_d).

    If `p` has as many levels as `n`, the multilevel transfer is built
    directly. A 1-level `p` with a multi-index `n` yields the tensor product
    of per-dimension 1D transfers, each cut on its own if requested (as for
    the 2D FEM problem).

    Parameters:
    -----------
        p : MatrixSymbol
            The projector symbol.
        n : int or Tuple[int]
            Fine sizes.
        kind : str {'circulant', 'toeplitz'}
        cut : bool or Tuple[bool]
            Whether the fine operator was cut at each level. A cut 1D transfer
            drops its last row and its last column.
    """
    levels = 1 if np.isscalar(n) else len(n)
    sizes = _as_sizes(n, levels)
    cut = _as_cut(cut, levels)
    if p.levels == 1 and levels > 1:
        transfers = [build_transfer(p, ni, kind, ci) for ni, ci in zip(sizes, cut)]
        return tensor_transfer(transfers)
    if p.levels != levels:
        raise StructureError(f"Projector with {p.levels} level(s) given for sizes {sizes}")
    if any(cut) and levels > 1:
        raise StructureError("Cut multilevel transfers are built as tensors of 1-level transfers")

    cutters = tuple(cutting_matrix(kind, ni) for ni in sizes)
    p_operator = build_operator(p, sizes, kind)
    selector = sparse.identity(p.block_size, format="csr")
    for cutter in reversed(cutters):
        selector = sparse.kron(cutter.matrix.T, selector, format="csr")
    matrix = p_operator.matrix @ selector
    if cut[0]:
        matrix = matrix[:-1, :-1]
    matrix = _realify(matrix)
    return GridTransfer(matrix=matrix, block_size=p.block_size, cutters=cutters,
                        fine_sizes=sizes, coarse_sizes=tuple(c.k for c in cutters),
                        p_operator=p_operator, cut=cut)


def tensor_transfer(transfers: Sequence[GridTransfer]) -> GridTransfer:
    """Kronecker product of 1-level transfers, kept in factored form"""
    factors = tuple(t.matrix for t in transfers)
    matrix = factors[0]
    for f in factors[1:]:
        matrix = sparse.kron(matrix, f, format="csr")
    return GridTransfer(matrix=sparse.csr_matrix(matrix), block_size=transfers[0].block_size,
                        cutters=tuple(c for t in transfers for c in t.cutters),
                        fine_sizes=tuple(s for t in transfers for s in t.fine_sizes),
                        coarse_sizes=tuple(s for t in transfers for s in t.coarse_sizes),
                        factors=factors, cut=tuple(c for t in transfers for c in t.cut))


def _apply_factors(factors: Tuple[sparse.csr_matrix, ...], v: np.ndarray, adjoint: bool) -> np.ndarray:
    mats = [f.conj().T.tocsr() if adjoint else f for f in factors]
    arr = v.reshape(tuple(m.shape[1] for m in mats))
    for axis, m in enumerate(mats):
        arr = np.moveaxis(arr, axis, 0)
        rest = arr.shape[1:]
        arr = (m @ arr.reshape(arr.shape[0], -1)).reshape((m.shape[0],) + rest)
        arr = np.moveaxis(arr, 0, axis)
    return arr.reshape(-1)


def restrict(t: GridTransfer, r: np.ndarray) -> np.ndarray:
    """d_k = (p_n^k)^H r"""
    r = np.asarray(r)
    if r.shape != (t.fine_dim,):
        raise StructureError(f"Fine vector of shape {r.shape} given, expected ({t.fine_dim},)")
    if t.factors is not None:
        return _apply_factors(t.factors, r, adjoint=True)
    return t.matrix.conj().T @ r


def prolong(t: GridTransfer, y: np.ndarray) -> np.ndarray:
    """p_n^k y"""
    y = np.asarray(y)
    if y.shape != (t.coarse_dim,):
        raise StructureError(f"Coarse vector of shape {y.shape} given, expected ({t.coarse_dim},)")
    if t.factors is not None:
        return _apply_factors(t.factors, y, adjoint=False)
    return t.matrix @ y


def galerkin(op: StructuredOperator, t: GridTransfer) -> StructuredOperator:
    """Coarse operator A_k = (p_n^k)^H A_n p_n^k as an exact sparse product"""
    if op.dim != t.fine_dim:
        raise StructureError(f"Transfer with {t.fine_dim} fine unknowns given for an operator of size {op.dim}")
    if t.coarse_dim < 1:
        raise StructureError("Coarse dimension must be at least 1")
    p = t.matrix
    coarse = (p.conj().T @ op.matrix @ p).tocsr()
    if op.hermitian:
        coarse = .5 * (coarse + coarse.conj().T)
    coarse = _realify(coarse)
    coarse.sort_indices()
    return StructuredOperator(kind=op.kind, sizes=t.coarse_sizes, block_size=op.block_size,
                              matrix=coarse, symbol=None, cut=op.cut, hermitian=op.hermitian)


def materialize_dense(op: Union[StructuredOperator, GridTransfer], cap: int = None) -> np.ndarray:
    """Exact dense form of an operator (or transfer) of size at most `cap`
    (default 4096, environment variable BLOCKMG_DENSE_CAP)."""
    cap = cap or get_cap("BLOCKMG_DENSE_CAP")
    if max(op.matrix.shape) > cap:
        raise DenseCapError(f"Operator of size {op.matrix.shape} exceeds the dense cap of {cap}")
    return op.matrix.toarray()
