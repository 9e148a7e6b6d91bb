"""
Channel module for DT-IRS-Bench.

Draws Rayleigh-faded channel realizations scaled by distance-based path loss,
and evaluates the cascaded AP-IRS-UD gains and the Hermitian forms used by the
IRS phase design.

Conventions: ``g_ap_irs`` is G (N_IRS x N_AP) and ``h_irs_ud[k]`` is h_k. The
downlink signal reaching UD k is (h_k^H diag(v) G) x, so its gain is
||G^T diag(conj(h_k)) v||^2. The uplink goes back over the same coefficients,
conj(h_k) into the IRS and ``g_irs_ap``^T out of it, and the AP combines over
its N_AP antennas. With reciprocity both gains coincide.
"""

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from dtirs_bench.src.config import PathLossParams, SystemConfig
from dtirs_bench.src.utils import DomainError, ShapeError


@dataclass(frozen=True)
class Geometry:
    """
    Node coordinates in meters.

    Attributes:
        ap_position: (2,) AP location.
        irs_position: (2,) IRS location.
        ud_positions: (K, 2) UD locations.
    """

    ap_position: npt.NDArray[np.float64]
    irs_position: npt.NDArray[np.float64]
    ud_positions: npt.NDArray[np.float64]

    @property
    def k_users(self) -> int:
        return self.ud_positions.shape[0]

    def scaled_ud_distances(self, factor: float) -> "Geometry":
        """Move every UD so its distance to the IRS is multiplied by ``factor``."""
        offsets = self.ud_positions - self.irs_position
        return Geometry(
            self.ap_position, self.irs_position, self.irs_position + factor * offsets
        )


@dataclass(frozen=True)
class ChannelSet:
    """
    One realization of every channel in the scenario.

    Attributes:
        g_ap_irs: (N_IRS, N_AP) AP-to-IRS channel G.
        h_irs_ud: (K, N_IRS) IRS-to-UD channels, row k is h_k.
        g_irs_ap: (N_IRS, N_AP) IRS-to-AP channel, equal to G under reciprocity.
        h_direct: (K, N_AP) AP-UD direct channels, or None.
        direct_link: Whether the direct channels contribute to the gains.
    """

    g_ap_irs: npt.NDArray[np.complex128]
    h_irs_ud: npt.NDArray[np.complex128]
    g_irs_ap: npt.NDArray[np.complex128]
    h_direct: npt.NDArray[np.complex128] | None = None
    direct_link: bool = False

    def __post_init__(self):
        n_irs, n_ap = self.g_ap_irs.shape
        if self.h_irs_ud.ndim != 2 or self.h_irs_ud.shape[1] != n_irs:
            raise ShapeError(f"h_irs_ud shape {self.h_irs_ud.shape} vs N_IRS={n_irs}")
        if self.g_irs_ap.shape != (n_irs, n_ap):
            raise ShapeError(f"g_irs_ap shape {self.g_irs_ap.shape}")
        if self.h_direct is not None and self.h_direct.shape != (self.k_users, n_ap):
            raise ShapeError(f"h_direct shape {self.h_direct.shape}")
        if self.direct_link and self.h_direct is None:
            raise ShapeError("direct_link set without direct channels")

    @property
    def k_users(self) -> int:
        return self.h_irs_ud.shape[0]

    @property
    def n_irs(self) -> int:
        return self.g_ap_irs.shape[0]

    @property
    def n_ap(self) -> int:
        return self.g_ap_irs.shape[1]

    def subset(self, users: npt.ArrayLike) -> "ChannelSet":
        """Channels restricted to the given UD indices."""
        idx = np.asarray(users)
        return ChannelSet(
            self.g_ap_irs,
            self.h_irs_ud[idx],
            self.g_irs_ap,
            None if self.h_direct is None else self.h_direct[idx],
            self.direct_link,
        )


def path_loss(
    d: float | npt.ArrayLike, exponent: float, params: PathLossParams
) -> float | npt.NDArray[np.float64]:
    """
    Linear power gain c0 * (d / d0) ** -exponent.

    Raises:
        DomainError: If any distance is not strictly positive.
    """
    arr = np.asarray(d, dtype=np.float64)
    if np.any(arr <= 0):
        raise DomainError("path loss needs positive distances")
    gain = params.c0 * (arr / params.d0) ** (-exponent)
    return float(gain) if np.ndim(gain) == 0 else gain


def generate_geometry(
    config: SystemConfig, rng: np.random.Generator | int
) -> Geometry:
    """
    Place the AP, the IRS and K UDs.

    Explicit ``geometry.ud_positions`` are used when present, otherwise UDs are
    uniform in the configured square. Rows are drawn in order, so the first K'
    positions do not depend on K.
    """
    rng = np.random.default_rng(rng)
    params = config.geometry
    k = config.k_users
    if params.ud_positions:
        uds = np.asarray(params.ud_positions[:k], dtype=np.float64)
    else:
        half = params.ud_side / 2
        uds = np.asarray(params.ud_center) + rng.uniform(-half, half, size=(k, 2))
    return Geometry(
        np.asarray(params.ap_position, dtype=np.float64),
        np.asarray(params.irs_position, dtype=np.float64),
        uds,
    )


def _complex_normal(rng: np.random.Generator, shape: tuple[int, ...]):
    parts = rng.standard_normal((*shape, 2))
    return (parts[..., 0] + 1j * parts[..., 1]) / np.sqrt(2)


def generate_channels(
    config: SystemConfig, geometry: Geometry, seed: np.random.Generator | int
) -> ChannelSet:
    """
    Draw one channel realization.

    Every entry is sqrt(path loss) times a CN(0, 1) sample. Direct channels are
    always drawn; they only count when ``flags.direct_link`` is on.

    Args:
        config: Scenario parameters (antenna counts, path loss, flags).
        geometry: Node positions; its UD count must match ``config.k_users``.
        seed: Integer seed or generator for the fading draw.

    Returns:
        ChannelSet, identical for identical (config, geometry, seed).
    """
    if geometry.k_users != config.k_users:
        raise ShapeError(
            f"geometry has {geometry.k_users} UDs, config has {config.k_users}"
        )
    rng = np.random.default_rng(seed)
    pl = config.path_loss
    k, n_irs, n_ap = config.k_users, config.n_irs, config.n_ap
    d_ap_irs = np.linalg.norm(geometry.irs_position - geometry.ap_position)
    d_irs_ud = np.linalg.norm(geometry.ud_positions - geometry.irs_position, axis=1)
    d_ap_ud = np.linalg.norm(geometry.ud_positions - geometry.ap_position, axis=1)
    g = np.sqrt(path_loss(d_ap_irs, pl.alpha_ap_irs, pl)) * _complex_normal(
        rng, (n_irs, n_ap)
    )
    h = np.sqrt(path_loss(d_irs_ud, pl.alpha_irs_ud, pl))[:, None] * _complex_normal(
        rng, (k, n_irs)
    )
    h_direct = np.sqrt(path_loss(d_ap_ud, pl.alpha_direct, pl))[
        :, None
    ] * _complex_normal(rng, (k, n_ap))
    if config.flags.reciprocity:
        g_back = g
    else:
        g_back = np.sqrt(path_loss(d_ap_irs, pl.alpha_ap_irs, pl)) * _complex_normal(
            rng, (n_irs, n_ap)
        )
    return ChannelSet(g, h, g_back, h_direct, config.flags.direct_link)


def _check_phases(ch: ChannelSet, v: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.shape != (ch.n_irs,):
        raise ShapeError(f"phase vector shape {arr.shape}, expected ({ch.n_irs},)")
    return arr


def _gains(
    g: npt.NDArray[np.complex128], ch: ChannelSet, v: npt.NDArray[np.complex128]
) -> npt.NDArray[np.float64]:
    received = (ch.h_irs_ud.conj() * v) @ g
    if ch.direct_link:
        assert ch.h_direct is not None
        received = received + ch.h_direct.conj()
    return np.sum(np.abs(received) ** 2, axis=1)


def downlink_gains(ch: ChannelSet, v: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Effective downlink gains of all UDs under phases v, shape (K,)."""
    return _gains(ch.g_ap_irs, ch, _check_phases(ch, v))


def uplink_gains(ch: ChannelSet, v: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Effective uplink gains (AP combining over N_AP antennas), shape (K,)."""
    return _gains(ch.g_irs_ap, ch, _check_phases(ch, v))


def effective_downlink_gain(ch: ChannelSet, k: int, v: npt.ArrayLike) -> float:
    """||h_k^H diag(v) G||^2, plus the direct path when enabled."""
    return float(downlink_gains(ch.subset([k]), v)[0])


def effective_uplink_gain(ch: ChannelSet, k: int, v: npt.ArrayLike) -> float:
    """Squared norm of the uplink effective channel of UD k at the AP."""
    return float(uplink_gains(ch.subset([k]), v)[0])


def _cascade(
    g: npt.NDArray[np.complex128], ch: ChannelSet, users: npt.NDArray[np.intp]
) -> npt.NDArray[np.complex128]:
    # (len(users), N_AP, N_IRS [+1]) with received = B @ w
    b = g.T[None, :, :] * ch.h_irs_ud[users].conj()[:, None, :]
    if ch.direct_link:
        assert ch.h_direct is not None
        b = np.concatenate([b, ch.h_direct[users].conj()[:, :, None]], axis=2)
    return b


def build_q_all(ch: ChannelSet) -> npt.NDArray[np.complex128]:
    """
    Hermitian forms of every UD, shape (K, n, n).

    n is N_IRS, or N_IRS + 1 with the direct link, in which case the form acts
    on w = [v; 1].
    """
    users = np.arange(ch.k_users)
    q = sum(
        np.einsum("kan,kam->knm", b.conj(), b)
        for b in (_cascade(g, ch, users) for g in (ch.g_ap_irs, ch.g_irs_ap))
    )
    q = np.asarray(q, dtype=np.complex128)
    return 0.5 * (q + np.conj(np.swapaxes(q, 1, 2)))


def build_qk(ch: ChannelSet, k: int) -> npt.NDArray[np.complex128]:
    """
    Hermitian Q_k with v^H Q_k v = downlink gain + uplink gain of UD k.

    With the direct link enabled the matrix is (N_IRS + 1) square and acts on
    w = [v; 1].
    """
    return build_q_all(ch.subset([k]))[0]
