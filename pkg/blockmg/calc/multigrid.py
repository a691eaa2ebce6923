"""blockmg.multigrid contains the two-grid and V-cycle drivers: hierarchy
construction by Galerkin products, one cycle of the two-grid/V-cycle
recursion, the stopping control and the sine test problem.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple
import numpy as np
from scipy.linalg import cho_factor, cho_solve, null_space, pinvh, LinAlgError
from scipy.sparse.linalg import splu

from .smoothers import SmootherABC, SmootherConfig, make_smoother
from .structured import (StructuredOperator, GridTransfer, StructureError, build_transfer,
                         galerkin, matvec, prolong, restrict, materialize_dense)
from .symbols import MatrixSymbol
from ..utils.constants import DEFAULT_MAX_ITER, DEFAULT_TOLERANCE, get_cap
from ..utils.logging import logging
from ..utils.results import SolveReport
from ..utils.utils import symmetrize

logger = logging.getLogger("BlockMG")

COARSE_PIVOT_TOLERANCE = 1e-12
KERNEL_RCOND = 1e-10

CYCLE_ALIASES = {
    "tgm": "tgm",
    "two_grid": "tgm",
    "two-grid": "tgm",
    "vcycle": "vcycle",
    "v_cycle": "vcycle",
    "v-cycle": "vcycle",
}


class HierarchyError(ValueError):
    """Raised if the sizes violate the coarsening law or a coarse operator is
    numerically singular"""
    pass


@dataclass
class Level:
    """One level of the hierarchy: operator, transfer to the next coarser
    level and the smoother bound to the operator (both None at the coarsest)."""
    operator: StructuredOperator
    transfer: Optional[GridTransfer] = None
    smoother: Optional[SmootherABC] = None


@dataclass
class MgHierarchy:
    """Multigrid hierarchy.

    Attributes:
    -----------
        levels : List[Level]
            Finest first.
        smoother_config : SmootherConfig
        cycle : str {'tgm', 'vcycle'}
        coarse_solver : Callable
            Direct solver of the coarsest operator.
        kernel : Array[N, k]
            Orthonormal basis of the null space of the finest operator (only
            set for hierarchies built with `allow_singular`).
    """
    levels: List[Level]
    smoother_config: SmootherConfig
    cycle: str
    coarse_solver: Callable[[np.ndarray], np.ndarray] = field(repr=False, default=None)
    kernel: Optional[np.ndarray] = field(repr=False, default=None)

    def __repr__(self):
        return f"<MgHierarchy cycle={self.cycle} sizes={self.sizes}>"

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def sizes(self) -> List[Tuple[int, ...]]:
        return [lvl.operator.sizes for lvl in self.levels]

    @property
    def fine(self) -> StructuredOperator:
        return self.levels[0].operator

    @property
    def transfers(self) -> List[GridTransfer]:
        return [lvl.transfer for lvl in self.levels if lvl.transfer is not None]


def _is_power_of_two(m: int) -> bool:
    return m > 0 and (m & (m - 1)) == 0


def check_size_law(op: StructuredOperator):
    """Checks that every level of `op` can be coarsened once more"""
    for n in op.sizes:
        if op.kind == "toeplitz" and not (n >= 3 and _is_power_of_two(n + 1)):
            raise HierarchyError(f"Toeplitz coarsening requires n = 2^t - 1 >= 3, got {n=}")
        if op.kind == "circulant" and not (n >= 2 and n % 2 == 0):
            raise HierarchyError(f"Circulant coarsening requires an even n, got {n=}")


def _guarded(solve_fn: Callable[[np.ndarray], np.ndarray], dim: int) -> Callable[[np.ndarray], np.ndarray]:
    def _solve(b):
        try:
            x = solve_fn(b)
        except (ValueError, LinAlgError, RuntimeError) as err:
            raise HierarchyError(f"Direct solve on the coarsest level (size {dim}) failed: {err}")
        if not np.all(np.isfinite(x)):
            raise HierarchyError(f"Direct solve on the coarsest level (size {dim}) returned non-finite values")
        return x
    return _solve


def _coarse_solver(op: StructuredOperator, allow_singular: bool = False) -> Callable[[np.ndarray], np.ndarray]:
    """Cholesky factorization of the coarsest operator (sparse LU above the
    dense cap).

    The operator counts as singular if the factorization breaks down or the
    pivot ratio min(l_ii^2) / max(l_ii^2) drops below COARSE_PIVOT_TOLERANCE.
    With `allow_singular` a singular operator is solved by its pseudo-inverse
    (consistent right-hand sides only; dense path only).
    """
    if op.dim <= get_cap("BLOCKMG_DENSE_CAP"):
        a = materialize_dense(op)
        reason = None
        try:
            factor = cho_factor(a, lower=True)
            pivots = np.abs(np.diag(factor[0])) ** 2
            ratio = float(pivots.min() / pivots.max())
        except (LinAlgError, ValueError) as err:
            ratio, reason = 0., str(err)
        if np.isfinite(ratio) and ratio > COARSE_PIVOT_TOLERANCE:
            return _guarded(lambda b: cho_solve(factor, b), op.dim)
        reason = reason or f"pivot ratio {ratio:.3e}"
        if not allow_singular:
            raise HierarchyError(f"Coarsest operator of size {op.dim} is numerically singular ({reason})")
        logger.warning(f"Coarsest operator of size {op.dim} is singular ({reason}); using its pseudo-inverse.")
        pinv = pinvh(symmetrize(a))
        return _guarded(lambda b: pinv @ b, op.dim)
    try:
        lu = splu(op.matrix.tocsc())
    except RuntimeError as err:
        raise HierarchyError(f"Coarsest operator of size {op.dim} is numerically singular: {err}")
    pivots = np.abs(lu.U.diagonal())
    if not (np.all(np.isfinite(pivots)) and pivots.min() > COARSE_PIVOT_TOLERANCE * pivots.max()):
        raise HierarchyError(f"Coarsest operator of size {op.dim} is numerically singular "
                             f"(singular operators are only handled up to BLOCKMG_DENSE_CAP)")
    return _guarded(lu.solve, op.dim)


def build_hierarchy(fine: StructuredOperator, p_symbol: MatrixSymbol, smoother: SmootherConfig,
                    cycle: str = "tgm", coarsest_threshold: int = None, allow_singular: bool = False) -> MgHierarchy:
    """Builds the chain of Galerkin operators.

    Parameters:
    -----------
        fine : StructuredOperator
            The finest operator.
        p_symbol : MatrixSymbol
            Projector symbol of the transfers (1-level symbols are tensorized
            over the levels of `fine`).
        smoother : SmootherConfig
        cycle : str {'tgm', 'vcycle'}
            'tgm' builds exactly one transfer; 'vcycle' coarsens while every
            n_i exceeds the threshold.
        coarsest_threshold : int
            Defaults to 3 (Toeplitz) or 2 (circulant).
        allow_singular : bool
            Accept a singular coarsest operator (e.g. the circulant Laplacian,
            whose constants are in the kernel on every level). The coarse
            problem is then solved by the pseudo-inverse and the null space
            of the finest operator is stored in the hierarchy.

    Returns:
    --------
        hierarchy : MgHierarchy

    Raises:
    -------
        HierarchyError
            If the size law is violated or the coarsest operator is singular
            (and `allow_singular` is not set).
    """
    cycle_key = CYCLE_ALIASES.get(str(cycle).lower())
    if cycle_key is None:
        raise HierarchyError(f"Unknown cycle: `{cycle}`")
    if coarsest_threshold is None:
        coarsest_threshold = 3 if fine.kind == "toeplitz" else 2
    logger.info(f"Building {cycle_key} hierarchy from {fine}...")

    levels = [Level(operator=fine)]
    while True:
        current = levels[-1].operator
        if cycle_key == "tgm":
            if len(levels) == 2:
                break
        elif not all(n > coarsest_threshold for n in current.sizes):
            break
        check_size_law(current)
        try:
            transfer = build_transfer(p_symbol, current.sizes, current.kind, current.cut)
            coarse = galerkin(current, transfer)
        except StructureError as err:
            raise HierarchyError(f"Cannot coarsen level {len(levels) - 1}: {err}")
        levels[-1].transfer = transfer
        levels[-1].smoother = make_smoother(current, smoother.method)
        levels.append(Level(operator=coarse))
        logger.debug(f"... level {len(levels) - 1}: sizes={coarse.sizes}, N={coarse.dim}, nnz={coarse.matrix.nnz}")

    kernel = null_space(materialize_dense(fine), rcond=KERNEL_RCOND) if allow_singular else None
    hierarchy = MgHierarchy(levels=levels, smoother_config=smoother, cycle=cycle_key,
                            coarse_solver=_coarse_solver(levels[-1].operator, allow_singular), kernel=kernel)
    logger.info(f"... hierarchy sizes: {[lvl.operator.dim for lvl in levels]}")
    return hierarchy


def cycle_once(h: MgHierarchy, level: int, x: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Applies one two-grid/V-cycle iteration at `level`:

        0. pre-smoothing           x~ = S_pre(x, b)
        1. residual                d = A x~ - b
        2. restriction             d_k = p^H d
        3-4. coarse correction     A_k y = d_k (direct at the coarsest level,
                                   one recursive cycle with zero guess above)
        5. correction              x^ = x~ - p y
        6. post-smoothing          S_post(x^, b)
    """
    if not 0 <= level < h.depth:
        raise HierarchyError(f"Invalid level {level} for a hierarchy of depth {h.depth}")
    lvl = h.levels[level]
    if lvl.transfer is None:
        return h.coarse_solver(b)
    cfg = h.smoother_config
    x = lvl.smoother.smooth(x, b, cfg.sweeps_pre, cfg.omega)
    d = matvec(lvl.operator, x) - b
    dk = restrict(lvl.transfer, d)
    if level + 1 == h.depth - 1:
        y = h.coarse_solver(dk)
    else:
        y = cycle_once(h, level + 1, np.zeros_like(dk), dk)
    x = x - prolong(lvl.transfer, y)
    return lvl.smoother.smooth(x, b, cfg.sweeps_post, cfg.post_omega)


def a_norm(op: StructuredOperator, e: np.ndarray) -> float:
    """||e||_A = sqrt(e^H A e)"""
    return float(np.sqrt(max(np.real(np.vdot(e, matvec(op, e))), 0.)))


def solve(h: MgHierarchy, b: np.ndarray, tol: float = DEFAULT_TOLERANCE, max_iter: int = DEFAULT_MAX_ITER,
          x0: np.ndarray = None, x_true: np.ndarray = None) -> SolveReport:
    """Iterates `cycle_once` at the finest level until the relative residual
    ||b - A x|| / ||b|| drops to `tol` or `max_iter` cycles were applied.

    Parameters:
    -----------
        h : MgHierarchy
        b : Array[N]
        tol : float
            Relative residual tolerance (default 1e-7).
        max_iter : int
            Maximum number of cycles (default 4000).
        x0 : Array[N]
            Initial guess (default zero).
        x_true : Array[N]
            If given, the final A-norm error is reported.

    Returns:
    --------
        report : SolveReport
    """
    if not tol > 0:
        raise ValueError(f"The tolerance must be positive: {tol=}")
    op = h.fine
    b = np.asarray(b)
    if b.shape != (op.dim,):
        raise StructureError(f"Right-hand side of shape {b.shape} given for an operator of size {op.dim}")
    x = np.zeros(op.dim, dtype=np.result_type(b, op.matrix.dtype)) if x0 is None else np.array(x0)
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        x = np.zeros_like(x)
        history = [0.]
    else:
        history = [np.linalg.norm(b - matvec(op, x)) / bnorm]
    logger.info(f"Solving with {h.cycle} (N={op.dim}, {tol=}, {max_iter=})...")
    iterations = 0
    while history[-1] > tol and iterations < max_iter:
        x = cycle_once(h, 0, x, b)
        iterations += 1
        history.append(np.linalg.norm(b - matvec(op, x)) / bnorm)
        logger.debug(f"... iteration {iterations}: relative residual {history[-1]:.3e}")
    converged = history[-1] <= tol
    error = a_norm(op, x - x_true) if x_true is not None else None
    if converged:
        logger.info(f"... converged after {iterations} iterations")
    else:
        logger.warning(f"No convergence after {iterations} iterations (relative residual {history[-1]:.3e})")
    return SolveReport(iterations=iterations, residual_history=np.array(history), converged=converged,
                       final_error_A_norm=error, solution=x)


def make_rhs_sine(op: StructuredOperator) -> Tuple[np.ndarray, np.ndarray]:
    """x_i = sin(pi i / (N - 1)) over the flattened unknown index, b = A x"""
    n = op.dim
    x_true = np.sin(np.pi * np.arange(n) / max(n - 1, 1))
    return x_true, matvec(op, x_true)
