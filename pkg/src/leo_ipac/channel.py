"""Large-scale attenuation chain and Rician flat-fading channel generation.

The attenuation chain follows the standard satellite-terrestrial breakdown
(free space, shadow fading, clutter, atmospheric absorption, scintillation,
building penetration); every non-FSPL term is a config-gated additive dB
value. Fading is flat: one complex gain per antenna element.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator

from .constants import SPEED_OF_LIGHT
from .errors import BelowHorizonError, GeometryError
from .geometry import LosGeometry


@dataclass(frozen=True)
class ArrayGeometry:
    """Planar array, row-major element order, spacing in wavelengths."""

    n_rows: int
    n_cols: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("array dimensions must be positive")
        if self.spacing_wavelengths <= 0:
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_rows * self.n_cols


@dataclass(frozen=True)
class AttenuationConfig:
    """Parameters of the non-FSPL attenuation terms. Defaults: rural LoS, outdoor."""

    shadow_sigma_db: float = 0.0
    los: bool = True
    clutter_db: float = 0.0  # applied only in NLoS condition
    atmospheric_zenith_db: float = 0.0  # zenith absorption, scaled by 1/sin(el)
    scintillation_ionospheric_db: float = 0.0  # used below 6 GHz
    scintillation_tropospheric_db: float = 0.0  # used at/above 6 GHz
    penetration_db: float = 0.0  # 0 for outdoor


@dataclass(frozen=True)
class LinkBudget:
    fspl_db: float
    shadow_db: float
    clutter_db: float
    atmospheric_db: float
    scintillation_db: float
    penetration_db: float
    total_db: float


def fspl_db(range_m: float, carrier_hz: float) -> float:
    """Free-space path loss, 20*log10(4*pi*d*f/c) dB."""
    if range_m <= 0 or carrier_hz <= 0:
        raise ValueError("range and carrier frequency must be positive")
    return 20.0 * np.log10(4.0 * np.pi * range_m * carrier_hz / SPEED_OF_LIGHT)


def large_scale_loss(
    range_m: float,
    elevation_rad: float,
    carrier_hz: float,
    env: AttenuationConfig,
    rng: Generator | None = None,
) -> LinkBudget:
    """Assemble the large-scale link budget for one satellite-UE link.

    Shadow fading is drawn zero-mean normal when an rng is supplied,
    otherwise its mean (0 dB) is used, which keeps the budget deterministic
    for bound computations.
    """
    fspl = fspl_db(range_m, carrier_hz)

    shadow = 0.0
    if rng is not None and env.shadow_sigma_db > 0.0:
        shadow = float(rng.normal(0.0, env.shadow_sigma_db))

    clutter = 0.0 if env.los else env.clutter_db

    atmospheric = 0.0
    if env.atmospheric_zenith_db > 0.0:
        if elevation_rad <= 0.0:
            raise BelowHorizonError(
                "atmospheric absorption undefined at or below the horizon"
            )
        if not (carrier_hz < 10e9 and elevation_rad >= np.deg2rad(10.0)):
            atmospheric = env.atmospheric_zenith_db / np.sin(elevation_rad)

    if carrier_hz < 6e9:
        scintillation = env.scintillation_ionospheric_db
    else:
        scintillation = env.scintillation_tropospheric_db

    penetration = env.penetration_db
    total = fspl + shadow + clutter + atmospheric + scintillation + penetration
    return LinkBudget(
        fspl_db=fspl,
        shadow_db=shadow,
        clutter_db=clutter,
        atmospheric_db=atmospheric,
        scintillation_db=scintillation,
        penetration_db=penetration,
        total_db=total,
    )


def amplitude_from_total_db(total_db: float) -> float:
    """Field amplitude of the link, 10^(-total_db/20)."""
    return 10.0 ** (-total_db / 20.0)


def steering_vector(array: ArrayGeometry, az: float, el: float) -> np.ndarray:
    """Planar-array response, entry (m, n) = exp(j*2*pi*d*(m*sin(el)cos(az) + n*sin(el)sin(az))).

    Rows index m, columns n; the result is flattened row-major. All entries
    have unit modulus; el = 0 is boresight (all ones).
    """
    if not (np.isfinite(az) and np.isfinite(el)):
        raise GeometryError("steering angles must be finite")
    m = np.arange(array.n_rows)[:, None]
    n = np.arange(array.n_cols)[None, :]
    phase = (
        2.0
        * np.pi
        * array.spacing_wavelengths
        * (m * np.sin(el) * np.cos(az) + n * np.sin(el) * np.sin(az))
    )
    return np.exp(1j * phase).ravel()


@dataclass(frozen=True)
class ChannelRealization:
    """Flat-fading Rician channel over an array.

    gains = amplitude * (sqrt(K/(K+1)) * los_part + sqrt(1/(K+1)) * nlos_part)
    """

    gains: np.ndarray
    los_part: np.ndarray
    nlos_part: np.ndarray
    rician_k: float
    amplitude: float

    @classmethod
    def assemble(
        cls,
        los_part: np.ndarray,
        nlos_part: np.ndarray,
        rician_k: float,
        amplitude: float,
    ) -> "ChannelRealization":
        if rician_k < 0:
            raise ValueError("Rician factor must be >= 0")
        if amplitude <= 0:
            raise ValueError("amplitude must be positive")
        k = rician_k
        gains = amplitude * (
            np.sqrt(k / (k + 1.0)) * los_part + np.sqrt(1.0 / (k + 1.0)) * nlos_part
        )
        return cls(
            gains=gains,
            los_part=los_part,
            nlos_part=nlos_part,
            rician_k=k,
            amplitude=amplitude,
        )


def draw_nlos(n: int, rng: Generator) -> np.ndarray:
    """i.i.d. circularly-symmetric complex normal, unit variance per entry."""
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)


def draw_rician_channel(
    geom: LosGeometry,
    array: ArrayGeometry,
    k_linear: float,
    amplitude: float,
    rng: Generator,
) -> ChannelRealization:
    """Draw one flat Rician realization with the LoS part set by the AoD."""
    los = steering_vector(array, geom.aod_azimuth_rad, geom.aod_elevation_rad)
    nlos = draw_nlos(array.n_elements, rng)
    return ChannelRealization.assemble(los, nlos, k_linear, amplitude)


def age_channel(ch: ChannelRealization, rng: Generator) -> ChannelRealization:
    """Channel aging: same LoS part, independently redrawn NLoS part."""
    nlos = draw_nlos(ch.los_part.size, rng)
    # los_part is carried over verbatim, never recomputed from angles
    return ChannelRealization.assemble(ch.los_part, nlos, ch.rician_k, ch.amplitude)


def perturb_channel_estimate(
    ch: ChannelRealization, err_ratio: float, rng: Generator
) -> np.ndarray:
    """Additive Gaussian estimation error with total variance err_ratio*||gains||^2.

    Per-entry error variance is err_ratio*||gains||^2/N so that
    E[||e||^2] / ||gains||^2 = err_ratio.
    """
    if err_ratio < 0:
        raise ValueError("error ratio must be >= 0")
    if err_ratio == 0.0:
        return ch.gains.copy()
    n = ch.gains.size
    per_entry_var = err_ratio * float(np.vdot(ch.gains, ch.gains).real) / n
    e = np.sqrt(per_entry_var) * draw_nlos(n, rng)
    return ch.gains + e
