"""blockmg.smoothers contains the stationary smoothers used inside the
multigrid cycles (relaxed Richardson, relaxed Jacobi and forward
Gauss-Seidel) together with the admissible relaxation-parameter bounds.
"""

import abc
from dataclasses import dataclass
from typing import Optional, Tuple
import numpy as np
from scipy import sparse
from scipy.sparse.linalg import eigsh, spsolve_triangular, ArpackNoConvergence

from .structured import StructuredOperator
from .symbols import MatrixSymbol, sup_norm
from ..utils.logging import logging

logger = logging.getLogger("BlockMG")

METHOD_ALIASES = {
    "richardson": "richardson",
    "jacobi": "jacobi",
    "gauss_seidel": "gauss_seidel",
    "gauss-seidel": "gauss_seidel",
    "gs": "gauss_seidel",
}


class SmootherError(ValueError):
    """Raised on an invalid smoother configuration or an operator with a zero
    diagonal entry"""
    pass


@dataclass(frozen=True)
class SmootherConfig:
    """Configuration of pre- and post-smoothing.

    Attributes:
    -----------
        method : str {'richardson', 'jacobi', 'gauss_seidel'}
        omega : float
            Relaxation parameter of the pre-smoother (1 for Gauss-Seidel).
        sweeps_pre : int
        sweeps_post : int
        omega_post : float or None
            Relaxation parameter of the post-smoother; defaults to `omega`.
    """
    method: str = "gauss_seidel"
    omega: float = 1.
    sweeps_pre: int = 1
    sweeps_post: int = 1
    omega_post: Optional[float] = None

    def __post_init__(self):
        method = METHOD_ALIASES.get(str(self.method).lower())
        if method is None:
            raise SmootherError(f"Unknown smoother: `{self.method}`")
        object.__setattr__(self, "method", method)
        if not self.omega > 0 or (self.omega_post is not None and not self.omega_post > 0):
            raise SmootherError(f"Relaxation parameters must be positive: {self.omega=}, {self.omega_post=}")
        if method == "gauss_seidel" and (self.omega != 1 or self.omega_post not in (None, 1)):
            raise SmootherError("Gauss-Seidel is used without relaxation (omega = 1)")
        if self.sweeps_pre < 0 or self.sweeps_post < 0:
            raise SmootherError(f"Sweep counts must be nonnegative: {self.sweeps_pre=}, {self.sweeps_post=}")

    @property
    def post_omega(self) -> float:
        return self.omega if self.omega_post is None else self.omega_post


class SmootherABC(metaclass=abc.ABCMeta):
    """Base class for smoothers bound to one operator"""

    method: str = None

    def __init__(self, op: StructuredOperator):
        self.op = op
        self.matrix = op.matrix

    def __repr__(self):
        return f"<{self.method} smoother N={self.op.dim}>"

    def _diagonal(self) -> np.ndarray:
        diag = self.matrix.diagonal()
        if np.any(diag == 0):
            raise SmootherError(f"The operator has a zero diagonal entry; `{self.method}` is not applicable")
        return diag

    @abc.abstractmethod
    def sweep(self, x: np.ndarray, b: np.ndarray, omega: float) -> np.ndarray:
        """Applies one smoothing step and returns the new iterate"""
        pass

    @abc.abstractmethod
    def iteration_matrix(self, omega: float) -> np.ndarray:
        """Dense iteration matrix V with e <- V e (for small operators)"""
        pass

    def smooth(self, x: np.ndarray, b: np.ndarray, sweeps: int, omega: float = 1.) -> np.ndarray:
        """Applies `sweeps` smoothing steps to a copy of `x`"""
        x = np.array(x, dtype=np.result_type(x, b, self.matrix.dtype))
        for _ in range(sweeps):
            x = self.sweep(x, b, omega)
        return x


class RichardsonSmoother(SmootherABC):
    """x <- x + omega (b - A x)"""

    method = "richardson"

    def sweep(self, x, b, omega):
        return x + omega * (b - self.matrix @ x)

    def iteration_matrix(self, omega):
        a = self.matrix.toarray()
        return np.eye(a.shape[0]) - omega * a


class JacobiSmoother(SmootherABC):
    """x <- x + omega D^-1 (b - A x) with D = diag(A)"""

    method = "jacobi"

    def __init__(self, op):
        super().__init__(op)
        self.diag = self._diagonal()

    def sweep(self, x, b, omega):
        return x + omega * (b - self.matrix @ x) / self.diag

    def iteration_matrix(self, omega):
        a = self.matrix.toarray()
        return np.eye(a.shape[0]) - omega * a / self.diag[:, None]


class GaussSeidelSmoother(SmootherABC):
    """Forward sweep x <- x + L^-1 (b - A x), L the lower triangle of A
    (including the diagonal), in storage order."""

    method = "gauss_seidel"

    def __init__(self, op):
        super().__init__(op)
        self._diagonal()
        self.lower = sparse.tril(self.matrix, format="csr")

    def sweep(self, x, b, omega=1.):
        return x + spsolve_triangular(self.lower, b - self.matrix @ x, lower=True)

    def iteration_matrix(self, omega=1.):
        a = self.matrix.toarray()
        return np.eye(a.shape[0]) - np.linalg.solve(np.tril(a), a)


STRATEGIES = {
    "richardson": RichardsonSmoother,
    "jacobi": JacobiSmoother,
    "gauss_seidel": GaussSeidelSmoother,
}


def make_smoother(op: StructuredOperator, method: str) -> SmootherABC:
    """Returns the smoother `method` bound to `op`"""
    key = METHOD_ALIASES.get(str(method).lower())
    if key is None:
        raise SmootherError(f"Unknown smoother: `{method}`")
    return STRATEGIES[key](op)


def smooth(op: StructuredOperator, x: np.ndarray, b: np.ndarray, cfg: SmootherConfig,
           sweeps: int) -> np.ndarray:
    """Applies `sweeps` steps of the smoother described by `cfg` (with the
    pre-smoothing relaxation `cfg.omega`)."""
    if np.shape(x) != (op.dim,) or np.shape(b) != (op.dim,):
        raise SmootherError(f"Vectors of shape {np.shape(x)} and {np.shape(b)} given for an operator of size {op.dim}")
    if sweeps == 0:
        return np.array(x)
    return make_smoother(op, cfg.method).smooth(x, b, sweeps, cfg.omega)


def jacobi_omega_bound(sym: MatrixSymbol, grid: int = None) -> float:
    """Admissible relaxation for Jacobi: 2 min_j (a_0)_jj / ||f||_inf.

    Parameters:
    -----------
        sym : MatrixSymbol
            Hermitian symbol with a real positive diagonal of a_0.
        grid : int
            Grid points for ||f||_inf (default 4096 for 1 level).
    """
    diag = np.diag(sym.coefficient((0,) * sym.levels))
    if np.any(np.abs(diag.imag) > 1e-12 * max(sym.scale, 1.)) or np.any(diag.real <= 0):
        raise SmootherError(f"The diagonal of a_0 must be real and positive: {diag}")
    return float(2 * np.min(diag.real) / sup_norm(sym, grid))


def richardson_omega_bound(sym: MatrixSymbol, grid: int = None) -> float:
    """Admissible relaxation for Richardson: 2 / ||f||_inf"""
    norm = sup_norm(sym, grid)
    if norm <= 0:
        raise SmootherError("The symbol vanishes identically")
    return 2. / norm


def estimate_operator_norm(op: StructuredOperator) -> float:
    """Spectral norm of a Hermitian operator, by Lanczos for large sizes"""
    if op.dim <= 256:
        return float(np.max(np.abs(np.linalg.eigvalsh(op.matrix.toarray()))))
    try:
        value = eigsh(op.matrix, k=1, which="LM", return_eigenvectors=False, tol=1e-8)
    except ArpackNoConvergence as err:
        value = err.eigenvalues
    return float(np.max(np.abs(value)))


def default_omegas(op: StructuredOperator, method: str, grid: int = None) -> Tuple[float, float]:
    """Default (omega_pre, omega_post): the admissible bound before and 2/3 of
    it after the coarse correction; (1, 1) for Gauss-Seidel. Without a symbol
    (e.g. the 2D FEM operator) ||f||_inf is replaced by ||A||_2."""
    method = METHOD_ALIASES.get(str(method).lower())
    if method == "gauss_seidel":
        return 1., 1.
    if op.symbol is not None:
        bound = (jacobi_omega_bound(op.symbol, grid) if method == "jacobi"
                 else richardson_omega_bound(op.symbol, grid))
    else:
        norm = estimate_operator_norm(op)
        bound = (2 * float(np.min(op.diagonal().real)) / norm if method == "jacobi" else 2. / norm)
    logger.debug(f"... default relaxation for {method}: omega_pre={bound}, omega_post={2 * bound / 3}")
    return bound, 2 * bound / 3
