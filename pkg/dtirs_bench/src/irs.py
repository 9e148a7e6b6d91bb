"""
IRS phase design module for DT-IRS-Bench.

Maximizes the summed cascaded gain v^H Q v over unit-modulus phases through
its semidefinite relaxation

    max Tr(Q V)  s.t.  diag(V) = 1,  V >= 0,

solved with a primal-dual interior-point method, followed by Gaussian
randomization to recover a feasible phase vector.
"""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from dtirs_bench.src.channel import ChannelSet, build_q_all
from dtirs_bench.src.numerics import hermitian_eig, symmetrize
from dtirs_bench.src.utils import (
    ConvergenceError,
    DomainError,
    phase_floor,
    sdp_max_iter,
    sdp_tol,
)

logger = logging.getLogger(__name__)

# fraction of the distance to the PSD boundary taken per step
step_fraction = 0.95
# a new design must beat the incumbent by more than round-off
keep_rtol = 1e-12


@dataclass(frozen=True)
class SdpProblem:
    """
    Attributes:
        q_total: (n, n) Hermitian sum of the per-UD forms.
        augmented: True when the last coordinate carries the direct link, so
            the phases are w[:-1] / w[-1].
    """

    q_total: npt.NDArray[np.complex128]
    augmented: bool = False

    @property
    def n(self) -> int:
        return self.q_total.shape[0]

    def value(self, w: npt.ArrayLike) -> float:
        """Quadratic form w^H Q w."""
        w = np.asarray(w, dtype=np.complex128)
        return float(np.real(np.vdot(w, self.q_total @ w)))

    def lift(self, v: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """Map IRS phases to the vector the form acts on."""
        v = np.asarray(v, dtype=np.complex128)
        return np.append(v, 1.0) if self.augmented else v

    def phases(self, w: npt.NDArray[np.complex128]) -> npt.NDArray[np.complex128]:
        """Map a unit-modulus solution of the form back to IRS phases."""
        return w[:-1] * np.conj(w[-1]) if self.augmented else w


@dataclass(frozen=True)
class SdpSolution:
    """
    Attributes:
        v_matrix: (n, n) PSD matrix with unit diagonal.
        objective: Tr(Q V) at the returned point.
        objective_upper: Dual objective sum(y), an upper bound on the relaxation
            and hence on every unit-modulus phase vector.
        iterations: Interior-point iterations used.
        residuals: (diagonal residual, dual infeasibility, duality gap).
    """

    v_matrix: npt.NDArray[np.complex128]
    objective: float
    objective_upper: float
    iterations: int
    residuals: tuple[float, float, float]


def build_sdp(ch: ChannelSet) -> SdpProblem:
    """Sum the per-UD Hermitian forms into the relaxation's cost matrix."""
    q = np.sum(build_q_all(ch), axis=0)
    return SdpProblem(symmetrize(q), augmented=ch.direct_link)


def _max_step(x: npt.NDArray[np.complex128], dx: npt.NDArray[np.complex128]) -> float:
    # largest t with x + t dx still PSD
    w, u = np.linalg.eigh(x)
    inv_sqrt = (u / np.sqrt(np.maximum(w, np.finfo(float).tiny))) @ u.conj().T
    lam = np.linalg.eigvalsh(inv_sqrt @ dx @ inv_sqrt)
    lowest = float(lam[0])
    return np.inf if lowest >= 0 else -1.0 / lowest


def solve_sdp(
    prob: SdpProblem, tol: float = sdp_tol, max_iter: int = sdp_max_iter
) -> SdpSolution:
    """
    Solve the diagonal-constrained relaxation.

    Feasible-start primal-dual path following: X = I and a diagonally
    dominant dual slack start strictly feasible, and the HKM search direction
    keeps diag(X) = 1 and Z = Diag(y) - Q exactly, so only the duality gap
    Tr(XZ) has to be driven to zero.

    Args:
        prob: Cost matrix.
        tol: Relative duality gap tolerance, gap <= tol * (1 + |objective|).
        max_iter: Iteration cap.

    Returns:
        SdpSolution with a certified upper bound.

    Raises:
        DomainError: If tol is not positive.
        ConvergenceError: If the cap is hit; ``best`` holds the last iterate.
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    n = prob.n
    q = prob.q_total
    scale = float(np.max(np.abs(q)))
    if scale == 0:
        return SdpSolution(
            np.eye(n, dtype=np.complex128), 0.0, 0.0, 0, (0.0, 0.0, 0.0)
        )
    q = q / scale
    x = np.eye(n, dtype=np.complex128)
    y = np.sum(np.abs(q), axis=1) + 1.0
    ones = np.ones(n)
    sigma = 0.3
    for it in range(1, max_iter + 1):
        z = np.diag(y).astype(np.complex128) - q
        primal = float(np.real(np.trace(q @ x)))
        dual = float(np.sum(y))
        gap = dual - primal
        if gap <= tol * (1 + abs(primal)):
            return _solution(x, z, primal, dual, scale, it - 1)
        mu = sigma * gap / n
        z_inv = np.linalg.inv(z)
        z_inv = 0.5 * (z_inv + z_inv.conj().T)
        schur = np.real(x * z_inv.conj())
        rhs = mu * np.real(np.diag(z_inv)) - ones
        dy = np.linalg.solve(schur, rhs)
        dx = mu * z_inv - x - (x * dy[None, :]) @ z_inv
        dx = 0.5 * (dx + dx.conj().T)
        dz = np.diag(dy).astype(np.complex128)
        step_p = min(1.0, step_fraction * _max_step(x, dx))
        step_d = min(1.0, step_fraction * _max_step(z, dz))
        x = x + step_p * dx
        y = y + step_d * dy
        sigma = 0.1 if min(step_p, step_d) > 0.8 else 0.3
    z = np.diag(y).astype(np.complex128) - q
    best = _solution(
        x, z, float(np.real(np.trace(q @ x))), float(np.sum(y)), scale, max_iter
    )
    raise ConvergenceError(f"SDP did not reach gap {tol} in {max_iter} steps", best)


def _solution(x, z, primal, dual, scale, iterations) -> SdpSolution:
    d = np.sqrt(np.real(np.diag(x)))
    x = x / np.outer(d, d)
    x = 0.5 * (x + x.conj().T)
    diag_res = float(np.max(np.abs(np.real(np.diag(x)) - 1.0)))
    dual_infeas = max(0.0, -float(np.linalg.eigvalsh(z)[0]))
    return SdpSolution(
        x,
        primal * scale,
        dual * scale,
        iterations,
        (diag_res, dual_infeas * scale, (dual - primal) * scale),
    )


def gaussian_randomization(
    sol: SdpSolution,
    prob: SdpProblem,
    n_rand: int,
    seed: np.random.Generator | int | None,
) -> tuple[npt.NDArray[np.complex128], float]:
    """
    Recover a unit-modulus vector from the relaxed solution.

    Draws n_rand samples U Lambda^(1/2) z with z ~ CN(0, I), projects each
    entry onto the unit circle (entries below 1e-15 in magnitude become 1), and
    keeps the sample with the largest w^H Q w.

    Returns:
        (w, value) where w has the dimension of the relaxation.
    """
    if n_rand < 1:
        raise DomainError("n_rand must be >= 1")
    rng = np.random.default_rng(seed)
    eigvals, eigvecs = hermitian_eig(sol.v_matrix)
    factor = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))[None, :]
    parts = rng.standard_normal((n_rand, prob.n, 2))
    z = (parts[..., 0] + 1j * parts[..., 1]) / np.sqrt(2)
    samples = z @ factor.T
    mag = np.abs(samples)
    tiny = mag < phase_floor
    samples = np.where(tiny, 1.0, samples / np.where(tiny, 1.0, mag))
    values = np.real(np.einsum("si,ij,sj->s", samples.conj(), prob.q_total, samples))
    best = int(np.argmax(values))
    return samples[best], float(values[best])


def optimize_phases(
    ch: ChannelSet,
    n_rand: int,
    tol: float,
    seed: np.random.Generator | int | None,
    incumbent: npt.ArrayLike | None = None,
    prob: SdpProblem | None = None,
    solution: SdpSolution | None = None,
) -> npt.NDArray[np.complex128]:
    """
    Design IRS phases maximizing the summed cascaded gain.

    Args:
        ch: Channels.
        n_rand: Randomization samples.
        tol: SDP gap tolerance.
        seed: Randomization seed.
        incumbent: Phases currently in use; kept if the new design is not
            better on the summed gain by more than round-off.
        prob: Prebuilt relaxation for ``ch``.
        solution: Prebuilt relaxed solution for ``prob``; the SDP is skipped.

    Returns:
        (N_IRS,) unit-modulus phases.
    """
    prob = prob or build_sdp(ch)
    solution = solution or solve_sdp(prob, tol)
    w, value = gaussian_randomization(solution, prob, n_rand, seed)
    v = prob.phases(w)
    if incumbent is not None:
        incumbent = np.asarray(incumbent, dtype=np.complex128)
        if prob.value(prob.lift(incumbent)) >= value * (1 - keep_rtol):
            logger.debug("IRS design kept the incumbent phases")
            return incumbent
    return v
