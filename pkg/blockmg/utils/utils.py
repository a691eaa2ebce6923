"""Stand-alone functions that are used in multiple submodules"""

import numpy as np


class NonFiniteError(ValueError):
    """Raised if a matrix or vector contains NaN or infinite entries"""
    pass


def check_finite(arr: np.ndarray, what: str = "matrix"):
    """Helper method that checks that all entries of `arr` are finite.

    Raises:
    -------
        NonFiniteError
            If any entry is NaN or infinite.
    """
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"Non-finite entries found in {what}")


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Returns the Hermitian part (m + m^H)/2 (works on stacks of matrices)"""
    return .5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def torus_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance between angles on the torus [-pi, pi)^k. The last
    axis holds the angle components."""
    diff = np.mod(np.asarray(a) - np.asarray(b) + np.pi, 2 * np.pi) - np.pi
    return np.sqrt(np.sum(diff ** 2, axis=-1))


def wrap_angle(theta: np.ndarray) -> np.ndarray:
    """Maps angles into (-pi, pi]"""
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(np.isclose(wrapped, -np.pi), np.pi, wrapped)


def chunked(n_items: int, chunk_size: int):
    """Yields slices covering range(n_items) in fixed-order chunks"""
    for start in range(0, n_items, chunk_size):
        yield slice(start, min(start + chunk_size, n_items))
