"""Array geometry: steering vectors, visible-region masks, element classification.

Supports three layouts. The base station is a uniform linear array (ULA).
The reflecting surface is either a uniform cylindrical array (UCA) made of
``layers_nc`` stacked rings of ``ring_nr`` elements, or a uniform planar
array (UPA) baseline. Element ordering for the UCA is layer-major: element
``n`` sits on layer ``n // ring_nr`` at ring slot ``n % ring_nr``.

On the cylinder a transceiver illuminates at most roughly half of each
ring; the 0/1 activation masks returned by :func:`visibility_mask` encode
that visible region. A planar surface is fully visible from its front
half-space, so the UPA mask is all ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

TWO_PI = 2.0 * math.pi

# Boundary elements (incidence grazing along the ring tangent, cosine
# exactly zero) count as visible; the slack absorbs rounding of cos() at
# multiples of pi/2 so those bits do not flip with float noise.
_BOUNDARY_TOL = 1e-12


class ArrayKind(Enum):
    ULA = "ula"
    UCA = "uca"
    UPA = "upa"


class ElementRole(IntEnum):
    INACTIVE = 0
    UAV_SPECIFIC = 1
    ITV_SPECIFIC = 2
    SHARED = 3


@dataclass(frozen=True)
class ArrayDescriptor:
    """Geometry of one antenna panel.

    ``num_elements_m`` is the ULA antenna count, ``layers_nc``/``ring_nr``
    the UCA layout, ``upa_rows``/``upa_cols`` the UPA layout. ``spacing_d``
    and ``wavelength`` are in meters and shared by all layouts.
    """

    kind: ArrayKind
    spacing_d: float
    wavelength: float
    num_elements_m: int = 1
    layers_nc: int = 1
    ring_nr: int = 1
    upa_rows: int = 1
    upa_cols: int = 1

    def __post_init__(self):
        for name in ("num_elements_m", "layers_nc", "ring_nr", "upa_rows", "upa_cols"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not (self.spacing_d > 0.0 and math.isfinite(self.spacing_d)):
            raise ValueError(f"spacing_d must be positive, got {self.spacing_d}")
        if not (self.wavelength > 0.0 and math.isfinite(self.wavelength)):
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def num_elements(self) -> int:
        """Total element count of this panel."""
        if self.kind is ArrayKind.ULA:
            return self.num_elements_m
        if self.kind is ArrayKind.UCA:
            return self.layers_nc * self.ring_nr
        return self.upa_rows * self.upa_cols


@dataclass(frozen=True)
class AngleSet:
    """All propagation angles of one scenario, in radians.

    ``*_aoa_br`` are the arrival angles at the surface from the BS,
    ``aod_bs`` the departure angle at the BS, and ``*_aod_ru``/``*_aod_rv``
    the departure angles from the surface towards the UAV and the ITV.
    Azimuths are wrapped to [0, 2*pi); elevations must lie in [0, pi].
    """

    azimuth_aoa_br: float
    elevation_aoa_br: float
    aod_bs: float
    azimuth_aod_ru: float
    elevation_aod_ru: float
    azimuth_aod_rv: float
    elevation_aod_rv: float

    def __post_init__(self):
        for name in ("azimuth_aoa_br", "azimuth_aod_ru", "azimuth_aod_rv"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value % TWO_PI)
        for name in ("elevation_aoa_br", "elevation_aod_ru", "elevation_aod_rv"):
            value = getattr(self, name)
            if not (0.0 <= value <= math.pi):
                raise ValueError(f"{name} must be in [0, pi], got {value}")
        if not math.isfinite(self.aod_bs):
            raise ValueError(f"aod_bs must be finite, got {self.aod_bs}")


@dataclass(frozen=True)
class VisibilityMask:
    """Per-element 0/1 activation bits for one transceiver."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.int64)
        if bits.ndim != 1 or not np.isin(bits, (0, 1)).all():
            raise ValueError("mask bits must be a 1-D 0/1 vector")
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return self.bits.size

    @property
    def active_count(self) -> int:
        return int(self.bits.sum())

    def overlap(self, other: "VisibilityMask") -> int:
        """Inner product with another mask: number of jointly visible elements."""
        if len(self) != len(other):
            raise ValueError("mask length mismatch")
        return int(self.bits @ other.bits)


@dataclass(frozen=True)
class ElementClassification:
    """Partition of surface elements by which users they can serve."""

    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int8))

    def indices(self, role: ElementRole) -> np.ndarray:
        return np.flatnonzero(self.labels == int(role))

    @property
    def shared_idx(self) -> np.ndarray:
        return self.indices(ElementRole.SHARED)

    @property
    def uav_specific_idx(self) -> np.ndarray:
        return self.indices(ElementRole.UAV_SPECIFIC)

    @property
    def itv_specific_idx(self) -> np.ndarray:
        return self.indices(ElementRole.ITV_SPECIFIC)

    @property
    def inactive_idx(self) -> np.ndarray:
        return self.indices(ElementRole.INACTIVE)

    def counts(self) -> dict:
        return {role.name.lower(): int(np.count_nonzero(self.labels == int(role)))
                for role in ElementRole}


def ula_arv(m: int, theta: float, d: float, lam: float) -> np.ndarray:
    """Response vector of an m-element ULA for a plane wave at angle theta.

    Entry k is exp(j * 2*pi * d * k * cos(theta) / lam); entry 0 is 1.
    """
    if m < 1:
        raise ValueError(f"element count must be >= 1, got {m}")
    if d <= 0.0 or lam <= 0.0:
        raise ValueError("spacing and wavelength must be positive")
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta}")
    phase = TWO_PI * d * math.cos(theta) / lam
    return np.exp(1j * phase * np.arange(m))


def _ring_angles(nr: int) -> np.ndarray:
    return TWO_PI * np.arange(nr) / nr


def uca_arv(desc: ArrayDescriptor, phi: float, theta: float) -> np.ndarray:
    """Response vector of the cylindrical array for direction (phi, theta).

    Kronecker product of the vertical layer ULA response with the ring
    response exp(j * mu * cos(phi - omega_i)), where omega_i = 2*pi*i/N_r
    and mu = pi * d * sin(theta) / (2 * lam * sin(pi / N_r)).
    """
    if desc.kind is not ArrayKind.UCA:
        raise ValueError(f"descriptor kind must be UCA, got {desc.kind}")
    if desc.ring_nr < 2:
        raise ValueError("UCA ring needs at least 2 elements")
    if not (math.isfinite(phi) and math.isfinite(theta)):
        raise ValueError("angles must be finite")
    mu = math.pi * desc.spacing_d * math.sin(theta) / (
        2.0 * desc.wavelength * math.sin(math.pi / desc.ring_nr))
    ring = np.exp(1j * mu * np.cos(phi - _ring_angles(desc.ring_nr)))
    layer = ula_arv(desc.layers_nc, theta, desc.spacing_d, desc.wavelength)
    return np.kron(layer, ring)


def upa_arv(desc: ArrayDescriptor, phi: float, theta: float) -> np.ndarray:
    """Response vector of the planar baseline for direction (phi, theta).

    Rows run vertically (phase term cos(theta) per row step), columns
    horizontally (phase term sin(theta)*cos(phi) per column step); the full
    vector is the Kronecker product of the two, referenced to element (0, 0).
    """
    if desc.kind is not ArrayKind.UPA:
        raise ValueError(f"descriptor kind must be UPA, got {desc.kind}")
    if not (math.isfinite(phi) and math.isfinite(theta)):
        raise ValueError("angles must be finite")
    step = TWO_PI * desc.spacing_d / desc.wavelength
    rows = np.exp(1j * step * math.cos(theta) * np.arange(desc.upa_rows))
    cols = np.exp(1j * step * math.sin(theta) * math.cos(phi) * np.arange(desc.upa_cols))
    return np.kron(rows, cols)


def arv(desc: ArrayDescriptor, phi: float, theta: float) -> np.ndarray:
    """Response vector for any panel kind."""
    if desc.kind is ArrayKind.UCA:
        return uca_arv(desc, phi, theta)
    if desc.kind is ArrayKind.UPA:
        return upa_arv(desc, phi, theta)
    return ula_arv(desc.num_elements_m, theta, desc.spacing_d, desc.wavelength)


def visibility_mask(desc: ArrayDescriptor, phi: float) -> VisibilityMask:
    """Activation mask of the surface as seen from azimuth phi.

    On the cylinder, ring slot i is visible iff cos(phi - omega_i) >= 0,
    replicated identically across layers. The planar baseline is fully
    visible from its front half-space, so a UPA gets an all-ones mask.
    """
    if desc.kind is ArrayKind.UPA:
        return VisibilityMask(np.ones(desc.num_elements, dtype=np.int64))
    if desc.kind is not ArrayKind.UCA:
        raise ValueError(f"visibility mask undefined for {desc.kind}")
    if not math.isfinite(phi):
        raise ValueError(f"azimuth must be finite, got {phi}")
    ring = (np.cos(phi - _ring_angles(desc.ring_nr)) >= -_BOUNDARY_TOL).astype(np.int64)
    return VisibilityMask(np.tile(ring, desc.layers_nc))


def classify_elements(mask_bs: VisibilityMask,
                      mask_uav: VisibilityMask,
                      mask_itv: VisibilityMask) -> ElementClassification:
    """Label each element by which users it can serve.

    Elements visible to the BS and exactly one user are user-specific;
    visible to BS and both users, shared; all remaining elements (not
    visible to the BS, or to neither user) are inactive.
    """
    if not (len(mask_bs) == len(mask_uav) == len(mask_itv)):
        raise ValueError("mask lengths differ: "
                         f"{len(mask_bs)}, {len(mask_uav)}, {len(mask_itv)}")
    b = mask_bs.bits.astype(bool)
    u = mask_uav.bits.astype(bool)
    v = mask_itv.bits.astype(bool)
    labels = np.full(len(mask_bs), int(ElementRole.INACTIVE), dtype=np.int8)
    labels[b & u & ~v] = int(ElementRole.UAV_SPECIFIC)
    labels[b & ~u & v] = int(ElementRole.ITV_SPECIFIC)
    labels[b & u & v] = int(ElementRole.SHARED)
    return ElementClassification(labels)
