"""
Numerics module for DT-IRS-Bench.

Scalar and matrix routines shared by the solvers: principal-branch Lambert W,
a guarded bisection driver, and a sorted Hermitian eigendecomposition.
"""

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.special import lambertw

from dtirs_bench.src.utils import (
    BracketError,
    ConvergenceError,
    DomainError,
    ShapeError,
    bisect_max_iter,
    bisect_tol,
)


@dataclass(frozen=True)
class BisectionSpec:
    """
    Controls for a bisection search.

    Attributes:
        lo: Left end of the bracket.
        hi: Right end of the bracket.
        tol_abs: Absolute tolerance on the residual and on the interval width.
        tol_rel: Relative tolerance on the interval width.
        max_iter: Iteration cap.
    """

    lo: float
    hi: float
    tol_abs: float = bisect_tol
    tol_rel: float = 0.0
    max_iter: int = bisect_max_iter

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"empty bracket [{self.lo}, {self.hi}]")
        if self.tol_abs <= 0 or self.tol_rel < 0:
            raise DomainError("tolerances must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")


def lambert_w0(z: float | npt.ArrayLike) -> float | npt.NDArray[np.float64]:
    """
    Principal branch of the Lambert W function on the nonnegative axis.

    Args:
        z: Scalar or array, every entry >= 0.

    Returns:
        w >= 0 with w * exp(w) == z, same shape as the input.

    Raises:
        DomainError: If any entry is negative.
    """
    arr = np.asarray(z, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("lambert_w0 is only defined here for z >= 0")
    w = lambertw(arr, 0).real
    # one Halley step polishes scipy's result to full double precision
    with np.errstate(over="ignore", invalid="ignore"):
        ew = np.exp(w)
        f = w * ew - arr
        wp1 = w + 1.0
        polished = w - f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
    w = np.where(np.isfinite(polished), polished, w)
    w = np.where(arr == 0, 0.0, np.maximum(w, 0.0))
    return float(w) if np.ndim(w) == 0 else w


def bisect(f: Callable[[float], float], spec: BisectionSpec) -> float:
    """
    Find a root of a monotone function by bisection.

    Args:
        f: Function with a sign change on [spec.lo, spec.hi].
        spec: Bracket and stopping rule.

    Returns:
        x with |f(x)| <= tol_abs or bracket width <= tol_abs + tol_rel * |x|.

    Raises:
        BracketError: If f(lo) and f(hi) have the same strict sign.
        ConvergenceError: If max_iter is reached; ``best`` holds the midpoint
            with the smallest residual seen.
    """
    lo, hi = spec.lo, spec.hi
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={f_lo}, {f_hi}")
    best, best_res = lo, abs(f_lo)
    if abs(f_hi) < best_res:
        best, best_res = hi, abs(f_hi)
    for _ in range(spec.max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < best_res:
            best, best_res = mid, abs(f_mid)
        if abs(f_mid) <= spec.tol_abs or (hi - lo) <= spec.tol_abs + spec.tol_rel * abs(
            mid
        ):
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    raise ConvergenceError(f"bisection did not converge in {spec.max_iter} steps", best)


def symmetrize(a: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """Return (A + A^H) / 2 after checking A is square."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
    return 0.5 * (arr + arr.conj().T)


def hermitian_eig(
    a: npt.ArrayLike,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.complex128]]:
    """
    Eigendecomposition of a Hermitian matrix with eigenvalues descending.

    Args:
        a: Square complex matrix, Hermitian up to round-off (it is symmetrized).

    Returns:
        (eigenvalues, U) with A = U diag(eigenvalues) U^H.

    Raises:
        ShapeError: If the input is not square.
    """
    herm = symmetrize(a)
    eigvals, eigvecs = np.linalg.eigh(herm)
    order = np.argsort(eigvals)[::-1]
    return eigvals[order], eigvecs[:, order]


def is_psd(a: npt.ArrayLike, tol: float = 1e-7) -> bool:
    """Check that the smallest eigenvalue is at least -tol."""
    eigvals, _ = hermitian_eig(a)
    return bool(eigvals[-1] >= -tol)
