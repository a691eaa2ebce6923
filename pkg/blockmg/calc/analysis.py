"""blockmg.analysis verifies the theoretical apparatus numerically: zero-set
detection, the two-grid conditions on the transfer symbol, second
derivatives of the minimal eigenvalue at the origin, coarse-level
conditioning, and contraction and smoothing estimates of the cycles.
"""

from typing import List, Tuple
import numpy as np

from .multigrid import HierarchyError, MgHierarchy, a_norm, build_hierarchy, cycle_once
from .smoothers import SmootherConfig, make_smoother
from .structured import StructuredOperator, materialize_dense
from .symbols import (MatrixSymbol, SymbolError, evaluate, evaluate_grid, eigvalsh_grid,
                      iterate_coarse_symbols, projector_symbol_pz, sup_norm, theta_grid)
from ..utils.constants import NORM_GRID_1D
from ..utils.logging import logging
from ..utils.results import ConditionCheckReport, ConditioningReport, ConditioningRow, ConjectureReport
from ..utils.utils import chunked, symmetrize, torus_distance, wrap_angle

logger = logging.getLogger("BlockMG")

ZERO_TOLERANCE = 1e-10
CLUSTER_RADIUS = 2 * np.pi / 2 ** 10
EIGENVALUE_FLOOR = 1e-14
COND2_STABILITY = .05


class TheoryAssumptionError(ValueError):
    """Raised if a standing assumption of the two-grid theory is violated,
    e.g. f and its pi-shift share a zero"""
    pass


def _require_hermitian(f: MatrixSymbol):
    if not f.hermitian:
        raise SymbolError("This analysis requires a Hermitian symbol")


def _cluster(points: np.ndarray, values: np.ndarray, radius: float) -> List[np.ndarray]:
    """Greedy clustering of flagged grid points on the torus; every cluster is
    represented by its point of smallest value."""
    clusters = []
    for idx in np.argsort(values, kind="stable"):
        point = points[idx]
        if not any(torus_distance(point, rep) <= radius for rep in clusters):
            clusters.append(point)
    return clusters


def locate_zero_set(f: MatrixSymbol, grid: int = None, tol: float = ZERO_TOLERANCE,
                    radius: float = CLUSTER_RADIUS) -> List[np.ndarray]:
    """Locates the points theta where lambda_min(f(theta)) vanishes.

    Parameters:
    -----------
        f : MatrixSymbol
            Hermitian symbol.
        grid : int
            Grid points per variable (default 4096 for 1 level, 64 otherwise).
        tol : float
            A point is a zero if lambda_min <= tol * ||f||_inf.
        radius : float
            Flagged points closer than `radius` form a single zero.

    Returns:
    --------
        theta0 : List[Array[levels]]
            Located zeros, wrapped into (-pi, pi].

    Raises:
    -------
        TheoryAssumptionError
            If f(theta0 + pi) is singular for a located zero.
    """
    _require_hermitian(f)
    grid = grid or (NORM_GRID_1D if f.levels == 1 else 64)
    thetas = theta_grid(grid, f.levels)
    eigs = eigvalsh_grid(f, thetas)
    norm = float(np.max(np.abs(eigs), initial=0.))
    lam_min = eigs[:, 0]
    flagged = lam_min <= tol * norm
    zeros = [wrap_angle(t) for t in _cluster(thetas[flagged], lam_min[flagged], radius)]
    for theta in zeros:
        mirrored = np.linalg.eigvalsh(evaluate(f, theta + np.pi))[0]
        if mirrored <= tol * norm:
            raise TheoryAssumptionError(
                f"f and its pi-shift share a zero at theta={theta}: lambda_min(f(theta+pi)) = {mirrored:.3e}")
    logger.info(f"Located {len(zeros)} zero(s) of lambda_min(f): {[t.tolist() for t in zeros]}")
    return zeros


def _cond2_sup(f: MatrixSymbol, p: MatrixSymbol, grid: int, theta0: List[np.ndarray],
               radius: float, norm_f: float, chunk_size: int = 4096) -> float:
    thetas = theta_grid(grid, 1)
    excluded = np.zeros(thetas.shape[0], dtype=bool)
    for t0 in theta0:
        excluded |= torus_distance(thetas, t0) <= radius
        excluded |= torus_distance(thetas, t0 + np.pi) <= radius
    thetas = thetas[~excluded]
    floor = EIGENVALUE_FLOOR * norm_f
    best = 0.
    for sl in chunked(thetas.shape[0], chunk_size):
        w, u = np.linalg.eigh(symmetrize(evaluate_grid(f, thetas[sl])))
        if np.any(w[:, 0] <= 0):
            bad = thetas[sl][np.argmin(w[:, 0])]
            raise TheoryAssumptionError(f"f is singular outside the excluded neighbourhoods (theta={bad})")
        w = np.maximum(w, floor)
        inv_sqrt = np.einsum("mab,mb,mcb->mac", u, w ** -.5, u.conj())
        shifted = evaluate_grid(p, thetas[sl] + np.pi)
        m = inv_sqrt @ np.conj(np.swapaxes(shifted, -1, -2))
        best = max(best, float(np.max(np.linalg.svd(m, compute_uv=False).sum(axis=-1), initial=0.)))
    return best


def check_tgm_conditions(f: MatrixSymbol, p: MatrixSymbol, grid: int = NORM_GRID_1D,
                         exclusion_radius: float = None) -> ConditionCheckReport:
    """Checks the two-grid conditions on a 1-level pair (f, p):

        (2) |f^{-1/2}(theta) p(theta+pi)^H|_1 bounded outside the zeros of f,
        (3) p^H p(theta) + p^H p(theta+pi) positive definite,
        (4) p(theta) p(theta+pi) = p(theta+pi) p(theta).

    Condition (2) passes if its supremum changes by less than 5% between a
    grid of `grid`/4 points and `grid` points; a divergence under refinement
    is the observable failure.

    Parameters:
    -----------
        f, p : MatrixSymbol
            Symbols with the same block size.
        grid : int
            Fine grid size (default 4096).
        exclusion_radius : float
            Radius of the balls around the zeros of f and their pi-shifts
            excluded from (2). Defaults to half the fine grid spacing.
    """
    _require_hermitian(f)
    if f.block_size != p.block_size or f.levels != p.levels:
        raise SymbolError(f"Symbols do not match: {f} vs {p}")
    if f.levels != 1:
        raise SymbolError("check_tgm_conditions works on 1-level symbols")
    radius = np.pi / grid if exclusion_radius is None else exclusion_radius
    theta0 = locate_zero_set(f, grid)
    norm_f = sup_norm(f, grid)
    norm_p = sup_norm(p, grid)

    cond2_fine = _cond2_sup(f, p, grid, theta0, radius, norm_f)
    cond2_coarse = _cond2_sup(f, p, max(grid // 4, 4), theta0, radius, norm_f)
    passed2 = bool(np.isfinite(cond2_fine) and
                   abs(cond2_fine - cond2_coarse) <= COND2_STABILITY * max(cond2_coarse, 1e-300))

    thetas = theta_grid(grid, 1)
    cond3_min, cond4_max = np.inf, 0.
    for sl in chunked(thetas.shape[0], 4096):
        p0 = evaluate_grid(p, thetas[sl])
        p1 = evaluate_grid(p, thetas[sl] + np.pi)
        p0h, p1h = np.conj(np.swapaxes(p0, -1, -2)), np.conj(np.swapaxes(p1, -1, -2))
        q = symmetrize(p0h @ p0 + p1h @ p1)
        cond3_min = min(cond3_min, float(np.min(np.linalg.eigvalsh(q)[:, 0])))
        comm = p0 @ p1 - p1 @ p0
        cond4_max = max(cond4_max, float(np.max(np.linalg.norm(comm, ord=2, axis=(1, 2)))))
    scale = max(1., norm_p ** 2)
    passed3 = cond3_min > 1e-12 * scale
    passed4 = cond4_max <= 1e-12 * scale
    logger.info(f"Conditions: {cond2_fine=:.4g} ({cond2_coarse=:.4g}), {cond3_min=:.4g}, {cond4_max=:.3e}")
    return ConditionCheckReport(theta0=theta0, cond2_sup=cond2_fine, cond2_sup_coarse=cond2_coarse,
                                cond3_min=cond3_min, cond4_max=cond4_max,
                                passed=(passed2, bool(passed3), bool(passed4)), grid=grid)


def _lambda_min(f: MatrixSymbol, theta: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(evaluate(f, theta))[0])


def lambda_min_second_derivative_at_zero(f: MatrixSymbol, h: float = 1e-3, tol: float = 1e-8,
                                         direction: np.ndarray = None) -> float:
    """Second derivative of lambda_min(f) at the origin: central second
    difference with step h, Richardson-extrapolated with h/2.

    Parameters:
    -----------
        f : MatrixSymbol
            Hermitian symbol with lambda_min(f(0)) = 0.
        h : float
            Step size (default 1e-3).
        tol : float
            |lambda_min(f(0))| must not exceed tol * max(1, ||f||_inf).
        direction : Array[levels]
            Unit direction for multilevel symbols (default: first axis).

    Raises:
    -------
        TheoryAssumptionError
            If lambda_min(f(0)) is not zero.
    """
    _require_hermitian(f)
    u = np.zeros(f.levels) if direction is None else np.asarray(direction, dtype=float)
    if direction is None:
        u[0] = 1.
    origin = np.zeros(f.levels)
    l0 = _lambda_min(f, origin)
    scale = max(1., sup_norm(f, 512 if f.levels == 1 else 32))
    if abs(l0) > tol * scale:
        raise TheoryAssumptionError(f"lambda_min(f(0)) = {l0:.3e} is not zero")

    def second_difference(step):
        return (_lambda_min(f, step * u) - 2 * l0 + _lambda_min(f, -step * u)) / step ** 2

    return (4 * second_difference(h / 2) - second_difference(h)) / 3


def conditioning_sweep(f: MatrixSymbol, d: int, z: float, levels: int, grid: int = NORM_GRID_1D,
                       h: float = 1e-3) -> ConditioningReport:
    """kappa(f_hat_{z,j}) = ||lambda_max(f_hat_j)||_inf / lambda''_min(f_hat_j)|_0
    for j = 1..levels, where f_hat_j is the j-fold coarse symbol of f with the
    projector p_z.

    The limit flag is 'vanishing' if lambda''_min|_0 decreases geometrically
    over the levels (for a single level: if z^2/2 < 1) and 'bounded_away'
    otherwise.
    """
    p = projector_symbol_pz(d, z)
    report = ConditioningReport(z=z)
    for j, fhat in enumerate(iterate_coarse_symbols(f, p, levels), start=1):
        lpp = lambda_min_second_derivative_at_zero(fhat, h)
        lmax = float(np.max(eigvalsh_grid(fhat, theta_grid(grid, 1))[:, -1]))
        report.rows.append(ConditioningRow(j=j, lambda_pp0=lpp, lambda_max_sup=lmax, kappa=lmax / lpp))
        logger.debug(f"... {z=}, {j=}: lambda''={lpp:.6g}, lambda_max={lmax:.6g}, kappa={lmax / lpp:.6g}")
    lpps = np.array([row.lambda_pp0 for row in report.rows])
    if len(lpps) > 1:
        rate = float(np.exp(np.mean(np.log(lpps[1:] / lpps[:-1]))))
    else:
        rate = z ** 2 / 2
    report.limit_flag = "vanishing" if rate < 1 - 1e-6 else "bounded_away"
    return report


def check_conjecture(deg: int, z: float, levels: int, h: float = 1e-3,
                     rtol: float = .01) -> ConjectureReport:
    """Checks that lambda''_min(f_hat_{z,j})|_0 / (z^2/2)^j is the same on
    every level j = 1..levels for the Q_deg stiffness symbol."""
    from .apps import fem_symbols_1d

    if deg not in (2, 3, 4):
        raise SymbolError(f"The level-ratio check is defined for deg in {{2, 3, 4}}, got {deg=}")
    if not z > 0:
        raise SymbolError(f"The projector parameter must be positive: {z=}")
    f, _ = fem_symbols_1d(deg)
    p = projector_symbol_pz(deg, z)
    report = ConjectureReport(deg=deg, z=z)
    for j, fhat in enumerate(iterate_coarse_symbols(f, p, levels), start=1):
        lpp = lambda_min_second_derivative_at_zero(fhat, h)
        report.rows.append((j, lpp, lpp / (z ** 2 / 2) ** j))
    ratios = report.ratios
    report.constant = float(np.mean(ratios))
    report.level_constant = bool(np.max(ratios) - np.min(ratios) <= rtol * abs(report.constant))
    logger.info(f"Level ratios for {deg=}, {z=}: {ratios.round(6).tolist()}")
    return report


def check_order_two_zero(f: MatrixSymbol, grid: int = 32, radii: Tuple[float, float] = (1e-2, 5e-3),
                         tol: float = ZERO_TOLERANCE, rtol: float = .1) -> Tuple[bool, str]:
    """Checks that lambda_min(f) has a unique zero at the origin and that it
    is of order two (lambda_min(r u) / r^2 stable for small r along the axes
    and the diagonal).

    Returns:
    --------
        ok : bool
        reason : str
            Empty if ok, else the first failed property.
    """
    _require_hermitian(f)
    origin = np.zeros(f.levels)
    thetas = theta_grid(grid, f.levels)
    eigs = eigvalsh_grid(f, thetas)
    scale = float(np.max(np.abs(eigs), initial=0.))
    if scale == 0:
        return False, "the symbol vanishes identically"
    if abs(_lambda_min(f, origin)) > tol * scale:
        return False, "lambda_min(f(0)) is not zero"
    punctured = np.any(thetas != 0, axis=1)
    if np.any(eigs[punctured, 0] <= tol * scale):
        return False, "lambda_min(f) vanishes away from the origin"
    directions = [np.eye(f.levels)[i] for i in range(f.levels)]
    if f.levels > 1:
        directions.append(np.ones(f.levels) / np.sqrt(f.levels))
    r1, r2 = radii
    for u in directions:
        q1 = _lambda_min(f, r1 * u) / r1 ** 2
        q2 = _lambda_min(f, r2 * u) / r2 ** 2
        if not q1 > 0 or abs(q1 - q2) > rtol * q1:
            return False, f"the zero at the origin is not of order two along {u.tolist()}"
    return True, ""


def estimate_contraction(h: MgHierarchy, trials: int = 3, iterations: int = 40, burn_in: int = 10,
                         seed: int = 0) -> float:
    """Power-iteration estimate of the A-norm contraction factor of one cycle.

    Random initial errors are propagated through cycles with b = 0; after
    `burn_in` cycles the ratio ||e_{k+1}||_A / ||e_k||_A of the last cycle is
    taken. The largest ratio over `trials` random starts is returned. For
    hierarchies with a stored kernel the errors are kept orthogonal to it.

    Raises:
    -------
        HierarchyError
            If a cycle produces a non-finite error.
    """
    op = h.fine
    rng = np.random.default_rng(seed)
    zeros = np.zeros(op.dim)
    kernel = h.kernel if h.kernel is not None and h.kernel.shape[1] > 0 else None

    def _deflate(e):
        return e if kernel is None else e - kernel @ (kernel.conj().T @ e)

    best = 0.
    for _ in range(trials):
        e = _deflate(rng.standard_normal(op.dim))
        norm = a_norm(op, e)
        if not norm > 0:
            continue
        e /= norm
        ratio = 0.
        for k in range(max(iterations, burn_in + 1)):
            e = _deflate(cycle_once(h, 0, e, zeros))
            ratio = a_norm(op, e)
            if not (np.isfinite(ratio) and np.all(np.isfinite(e))):
                raise HierarchyError(f"The cycle diverged after {k + 1} iterations (non-finite error)")
            # error annihilated up to rounding
            if ratio <= EIGENVALUE_FLOOR:
                break
            e /= ratio
        best = max(best, ratio)
    logger.info(f"Estimated contraction factor: {best:.6f}")
    return best


def iteration_matrix(h: MgHierarchy) -> np.ndarray:
    """Dense error-propagation matrix of one cycle (columns are cycles applied
    to unit errors with b = 0)"""
    n = h.fine.dim
    materialize_dense(h.fine)  # enforces the dense cap
    zeros = np.zeros(n)
    return np.column_stack([cycle_once(h, 0, np.eye(n)[:, i], zeros) for i in range(n)])


def cycle_a_norm(h: MgHierarchy) -> float:
    """||M||_A = ||A^{1/2} M A^{-1/2}||_2 of the cycle iteration matrix M"""
    a = materialize_dense(h.fine)
    w, u = np.linalg.eigh(symmetrize(a))
    sqrt_a = (u * np.sqrt(w)) @ u.conj().T
    inv_sqrt_a = (u / np.sqrt(w)) @ u.conj().T
    return float(np.linalg.norm(sqrt_a @ iteration_matrix(h) @ inv_sqrt_a, 2))


def pre_smoothing_gain(fine: StructuredOperator, p: MatrixSymbol, smoother: SmootherConfig) -> Tuple[float, float]:
    """A-norms of the two-grid iteration with and without pre-smoothing.

    Returns:
    --------
        with_pre, without_pre : float
    """
    with_pre = build_hierarchy(fine, p, smoother, "tgm")
    without = SmootherConfig(method=smoother.method, omega=smoother.omega, sweeps_pre=0,
                             sweeps_post=smoother.sweeps_post, omega_post=smoother.omega_post)
    without_pre = build_hierarchy(fine, p, without, "tgm")
    return cycle_a_norm(with_pre), cycle_a_norm(without_pre)


def smoothing_property_alpha(op: StructuredOperator, smoother: SmootherConfig, tol: float = 1e-10,
                             steps: int = 60) -> float:
    """Largest alpha (found by bisection) such that

        V^H A V <= A - alpha A^2

    holds up to tol * ||A||, with V the iteration matrix of one smoothing step
    with relaxation `smoother.omega`. Returns 0 if no alpha > 0 is found.
    """
    a = symmetrize(materialize_dense(op))
    v = make_smoother(op, smoother.method).iteration_matrix(smoother.omega)
    lhs = v.conj().T @ a @ v
    a2 = a @ a
    norm = float(np.max(np.abs(np.linalg.eigvalsh(a))))

    def feasible(alpha):
        return np.linalg.eigvalsh(symmetrize(a - alpha * a2 - lhs))[0] >= -tol * norm

    lo, hi = 0., 1. / norm
    if feasible(hi):
        return hi
    if not feasible(hi * 2. ** -steps):
        return 0.
    lo = hi * 2. ** -steps
    for _ in range(steps):
        mid = .5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo
