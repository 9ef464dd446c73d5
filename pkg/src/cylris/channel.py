"""Statistical CSI, closed-form bound coefficients, and channel sampling.

Each link (BS-to-surface, surface-to-UAV, surface-to-ITV) is Rician with a
deterministic line-of-sight part built from the geometry module and an
i.i.d. complex Gaussian scattered part gated by the visibility masks. The
direct BS-to-user path is Rayleigh and bypasses the surface entirely.

The ergodic-SE bound of the performance module needs only a handful of
second moments of these channels; :func:`derive_coefficients` computes
them in closed form, and :func:`appendix_cross_terms` exposes the three
scattered-path cross moments individually so Monte Carlo estimates can be
checked against them term by term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    AngleSet,
    ArrayDescriptor,
    ArrayKind,
    VisibilityMask,
    arv,
    ula_arv,
    visibility_mask,
)

USERS = ("uav", "itv")


@dataclass(frozen=True)
class LinkStats:
    """Long-term statistics of one link.

    ``rician_k`` and ``pathloss_beta`` are linear. For user links,
    ``direct_var`` is the Rayleigh direct-path variance per BS antenna and
    ``tx_power``/``noise_var`` give the transmit SNR. ``los_only`` models
    the K -> infinity limit exactly: the scattered component is dropped and
    the LoS part carries the full path gain.
    """

    rician_k: float
    pathloss_beta: float
    direct_var: float = 0.0
    tx_power: float = 1.0
    noise_var: float = 1.0
    los_only: bool = False

    def __post_init__(self):
        if self.rician_k < 0.0 or self.pathloss_beta < 0.0 or self.direct_var < 0.0:
            raise ValueError("rician_k, pathloss_beta and direct_var must be >= 0")
        if self.tx_power < 0.0 or self.noise_var <= 0.0:
            raise ValueError("tx_power must be >= 0 and noise_var > 0")

    @property
    def snr_s(self) -> float:
        return self.tx_power / self.noise_var

    @property
    def los_power(self) -> float:
        """Power of the deterministic component: beta*K/(K+1), or beta when LoS-only."""
        if self.los_only:
            return self.pathloss_beta
        return self.pathloss_beta * self.rician_k / (self.rician_k + 1.0)

    @property
    def nlos_power(self) -> float:
        """Power of the scattered component per element: beta/(K+1), or 0 when LoS-only."""
        if self.los_only:
            return 0.0
        return self.pathloss_beta / (self.rician_k + 1.0)


@dataclass(frozen=True)
class DerivedCoefficients:
    """Closed-form second moments of one BS-surface-user cascade.

    ``eta`` scales the beamforming gain term of the ergodic-SE bound,
    ``c_const`` collects every phase-independent term, and ``chi`` is the
    scattered-path coefficient inside it. ``lambda_comp`` is the composite
    amplitude sqrt(beta_B*beta_i/((K_B+1)(K_i+1))); ``vr_overlap`` the
    integer count of elements visible to both the BS and the user. The
    four ``*_pow`` fields are the per-link LoS/NLoS powers the moments
    factor into.
    """

    eta: float
    chi: float
    c_const: float
    lambda_comp: float
    vr_overlap: int
    snr_s: float
    los_pow_b: float
    nlos_pow_b: float
    los_pow_i: float
    nlos_pow_i: float


def derive_coefficients(stats_b: LinkStats, stats_i: LinkStats,
                        m: int, vr_overlap: int) -> DerivedCoefficients:
    """Bound coefficients for the cascade through an m-antenna BS.

    eta = beta_B*beta_i*K_B*K_i/((K_B+1)(K_i+1)),
    chi = beta_B*beta_i*(K_B+K_i+1)/((K_B+1)(K_i+1)),
    c = chi*m*vr_overlap + direct_var*m.
    """
    if m < 0 or vr_overlap < 0:
        raise ValueError("m and vr_overlap must be >= 0")
    a2_b, b2_b = stats_b.los_power, stats_b.nlos_power
    a2_i, b2_i = stats_i.los_power, stats_i.nlos_power
    eta = a2_b * a2_i
    lambda2 = b2_b * b2_i
    chi = a2_b * b2_i + b2_b * a2_i + lambda2
    c_const = chi * m * vr_overlap + stats_i.direct_var * m
    return DerivedCoefficients(
        eta=eta,
        chi=chi,
        c_const=c_const,
        lambda_comp=np.sqrt(lambda2),
        vr_overlap=int(vr_overlap),
        snr_s=stats_i.snr_s,
        los_pow_b=a2_b,
        nlos_pow_b=b2_b,
        los_pow_i=a2_i,
        nlos_pow_i=b2_i,
    )


def appendix_cross_terms(coeffs: DerivedCoefficients, m: int,
                         vr_overlap: int) -> tuple[float, float, float]:
    """The three scattered-path contributions to E{||cascade||^2}.

    x1 pairs both NLoS parts, x2 the BS NLoS with the user LoS, x3 the BS
    LoS with the user NLoS; each equals its coefficient times m*vr_overlap.
    Together with eta*(LoS gain) and direct_var*m they reconstruct the
    full expectation.
    """
    scale = m * vr_overlap
    x1 = coeffs.nlos_pow_b * coeffs.nlos_pow_i * scale
    x2 = coeffs.nlos_pow_b * coeffs.los_pow_i * scale
    x3 = coeffs.los_pow_b * coeffs.nlos_pow_i * scale
    return x1, x2, x3


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the full channel state towards a single user."""

    h_bs_ris: np.ndarray   # (N, M) BS-to-surface matrix
    h_ris_user: np.ndarray  # (N,) surface-to-user vector
    g_direct: np.ndarray   # (M,) direct BS-to-user vector


def user_departure_angles(angles: AngleSet, user: str) -> tuple[float, float]:
    """(azimuth, elevation) of the surface-to-user departure direction."""
    if user == "uav":
        return angles.azimuth_aod_ru, angles.elevation_aod_ru
    if user == "itv":
        return angles.azimuth_aod_rv, angles.elevation_aod_rv
    raise ValueError(f"user must be one of {USERS}, got {user!r}")


def los_cascaded_vectors(desc: ArrayDescriptor, angles: AngleSet) -> tuple[np.ndarray, ...]:
    """Masked LoS vectors (h_bar_b, h_bar_uav, h_bar_itv) on the surface.

    Each is the surface response vector for the link direction multiplied
    elementwise by that link's activation mask, so entries outside the
    visible region are exactly zero.
    """
    out = []
    for phi, theta in (
        (angles.azimuth_aoa_br, angles.elevation_aoa_br),
        (angles.azimuth_aod_ru, angles.elevation_aod_ru),
        (angles.azimuth_aod_rv, angles.elevation_aod_rv),
    ):
        mask = visibility_mask(desc, phi)
        out.append(arv(desc, phi, theta) * mask.bits)
    return tuple(out)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _crandn(rng: np.random.Generator, *shape) -> np.ndarray:
    """Circularly symmetric unit-variance complex normals."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_realization_batch(seed, desc: ArrayDescriptor, angles: AngleSet,
                             stats_b: LinkStats, stats_user: LinkStats,
                             user: str, count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw ``count`` independent channel realizations towards one user.

    Returns arrays of shape (count, N, M), (count, N) and (count, M). The
    scattered parts are zeroed outside the visible regions; the direct
    path has no masking. Deterministic for a given integer seed.
    """
    rng = _as_rng(seed)
    n = desc.num_elements
    m = desc.num_elements_m
    h_bar_b, h_bar_u, h_bar_v = los_cascaded_vectors(desc, angles)
    h_bar_i = h_bar_u if user == "uav" else h_bar_v
    if user not in USERS:
        raise ValueError(f"user must be one of {USERS}, got {user!r}")
    mask_b = visibility_mask(desc, angles.azimuth_aoa_br).bits
    mask_i = visibility_mask(desc, user_departure_angles(angles, user)[0]).bits

    a_m = ula_arv(m, angles.aod_bs, desc.spacing_d, desc.wavelength)
    h_bar_mat = h_bar_b[:, None] * a_m.conj()[None, :]

    h_tilde = _crandn(rng, count, n, m) * mask_b[None, :, None]
    h_mat = np.sqrt(stats_b.los_power) * h_bar_mat[None, :, :] \
        + np.sqrt(stats_b.nlos_power) * h_tilde

    h_tilde_i = _crandn(rng, count, n) * mask_i[None, :]
    h_vec = np.sqrt(stats_user.los_power) * h_bar_i[None, :] \
        + np.sqrt(stats_user.nlos_power) * h_tilde_i

    g = np.sqrt(stats_user.direct_var) * _crandn(rng, count, m)
    return h_mat, h_vec, g


def sample_realization(seed, desc: ArrayDescriptor, angles: AngleSet,
                       stats_b: LinkStats, stats_user: LinkStats,
                       user: str) -> ChannelRealization:
    """Draw a single channel realization towards one user."""
    h_mat, h_vec, g = sample_realization_batch(
        seed, desc, angles, stats_b, stats_user, user, 1)
    return ChannelRealization(h_bs_ris=h_mat[0], h_ris_user=h_vec[0], g_direct=g[0])


def sample_nlos_parts(seed, desc: ArrayDescriptor, mask_b: VisibilityMask,
                      mask_i: VisibilityMask, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Raw unit-variance scattered parts (H_tilde, h_tilde) for ``count`` draws.

    Used by the cross-moment validation, which needs the scattered factors
    in isolation rather than the composite Rician channels.
    """
    rng = _as_rng(seed)
    n = desc.num_elements
    m = desc.num_elements_m
    h_tilde = _crandn(rng, count, n, m) * mask_b.bits[None, :, None]
    h_tilde_i = _crandn(rng, count, n) * mask_i.bits[None, :]
    return h_tilde, h_tilde_i
