"""Analog beamformer construction and spectral-efficiency evaluation.

Two beamforming strategies are compared:
  * conjugate beamforming on a (possibly outdated and noisy) channel estimate,
  * location-based beamforming that reconstructs the LoS steering vector from
    a noisy UE position prior and the satellite ephemeris.

Both produce phase-only (unit-modulus entry) weight vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator

from .channel import ArrayGeometry, ChannelRealization, steering_vector
from .errors import GeometryError
from .geometry import SatelliteState, los_geometry


@dataclass(frozen=True)
class Beamformer:
    """Analog weight vector: unit norm, every entry of modulus 1/sqrt(N)."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        n = w.size
        if abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise ValueError("beamformer must have unit norm")
        if np.max(np.abs(np.abs(w) - 1.0 / np.sqrt(n))) > 1e-12:
            raise ValueError("beamformer entries must have modulus 1/sqrt(N)")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class LinkResult:
    snr_db: float
    spectral_efficiency: float  # bits/s/Hz


def conjugate_beamformer(channel_estimate: np.ndarray) -> Beamformer:
    """Phase-only conjugate matching: w_n = exp(-j*arg(h_n))/sqrt(N)."""
    h = np.asarray(channel_estimate, dtype=complex)
    if np.linalg.norm(h) < 1e-300:
        raise GeometryError("cannot beamform on a zero channel estimate")
    w = np.exp(-1j * np.angle(h)) / np.sqrt(h.size)
    return Beamformer(w)


def location_based_beamformer(
    ue_prior: np.ndarray,
    pos_sigma_m: float,
    sat: SatelliteState,
    array: ArrayGeometry,
    carrier_hz: float,
    rng: Generator,
) -> Beamformer:
    """CSI-free beam towards the LoS direction of a noisy UE position prior.

    The prior is the true position perturbed by an isotropic Gaussian with
    per-axis sigma = pos_sigma_m/sqrt(3), so the RMS position error equals
    pos_sigma_m.
    """
    if pos_sigma_m < 0:
        raise ValueError("position uncertainty must be >= 0")
    prior = np.asarray(ue_prior, dtype=float)
    if pos_sigma_m > 0:
        prior = prior + rng.standard_normal(3) * (pos_sigma_m / np.sqrt(3.0))
    geom = los_geometry(sat, prior, carrier_hz)
    a = steering_vector(array, geom.aod_azimuth_rad, geom.aod_elevation_rad)
    return Beamformer(np.conj(a) / np.sqrt(a.size))


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def evaluate_link(
    true_channel: ChannelRealization,
    bf: Beamformer,
    tx_power_dbm: float,
    noise_psd_dbm_hz: float,
    bandwidth_hz: float,
) -> LinkResult:
    """SNR and spectral efficiency of a beamformed flat-fading link.

    Downlink convention: the received sample is (h . w) s, so the beamforming
    gain is |sum_n h_n w_n|^2 and phase-conjugate weights cohere. SNR =
    P_tx |h.w|^2 / (N0 B); path loss is already inside the channel gains
    through the amplitude factor.
    """
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    p_tx_w = dbm_to_watts(tx_power_dbm)
    noise_w = dbm_to_watts(noise_psd_dbm_hz) * bandwidth_hz
    gain = np.abs(np.dot(true_channel.gains, bf.weights)) ** 2
    snr = p_tx_w * gain / noise_w
    with np.errstate(divide="ignore"):
        snr_db = 10.0 * np.log10(snr) if snr > 0 else -np.inf
    return LinkResult(snr_db=float(snr_db), spectral_efficiency=float(np.log2(1.0 + snr)))


MODE_OUTDATED = "outdated-csi"
MODE_LOCATION = "location-based"
_MODE_TAGS = {MODE_OUTDATED: 1, MODE_LOCATION: 2}


def se_point(
    scenario,
    mode: str,
    error_level: float,
    trials: int,
    seed: int,
    error_idx: int,
) -> tuple[float, float]:
    """Mean spectral efficiency (and standard error) at one error level.

    Outdated-CSI pipeline per trial: true channel -> aging -> additive
    estimation error -> conjugate beamformer, evaluated on the pre-aging true
    channel. Location-based pipeline: perturb the UE position, rebuild the
    LoS beam from geometry, evaluate on the true channel.
    """
    from .channel import (
        age_channel,
        draw_rician_channel,
        large_scale_loss,
        perturb_channel_estimate,
    )
    from .errors import ConfigError
    from .geometry import los_geometry as _los
    from .scenario import scenario_constellation

    if mode not in _MODE_TAGS:
        raise ConfigError(f"unknown spectral-efficiency mode {mode!r}")
    rng = np.random.default_rng([seed, _MODE_TAGS[mode], error_idx])
    sat = scenario_constellation(scenario, s=1)[0]
    ue = scenario.ue_position
    geom = _los(sat, ue, scenario.carrier_hz)
    array = scenario.array

    se_values = np.empty(trials)
    for t in range(trials):
        budget = large_scale_loss(
            geom.range_m,
            geom.elevation_rad,
            scenario.carrier_hz,
            scenario.attenuation,
            rng,
        )
        amplitude = 10.0 ** (-budget.total_db / 20.0)
        truth = draw_rician_channel(
            geom, array, scenario.rician_k_linear, amplitude, rng
        )
        if mode == MODE_OUTDATED:
            stale = age_channel(truth, rng)
            estimate = perturb_channel_estimate(stale, error_level, rng)
            bf = conjugate_beamformer(estimate)
        else:
            bf = location_based_beamformer(
                ue, error_level, sat, array, scenario.carrier_hz, rng
            )
        result = evaluate_link(
            truth,
            bf,
            scenario.tx_power_dbm,
            scenario.noise_psd_dbm_hz,
            scenario.bandwidth_hz,
        )
        se_values[t] = result.spectral_efficiency
    mean = float(se_values.mean())
    stderr = float(se_values.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return mean, stderr


def se_sweep(
    scenario,
    error_grid,
    mode: str,
    trials: int,
    seed: int,
    workers: int = 1,
) -> list[tuple[str, float, float, float]]:
    """Mean-SE curve over an error grid for one beamforming mode.

    Each grid point owns a derived random stream, so the output is identical
    for any worker count and bit-reproducible for a fixed seed.
    """
    from .errors import ConfigError
    from .parallel import parallel_map

    error_grid = list(error_grid)
    if not error_grid:
        raise ConfigError("spectral-efficiency error grid must be non-empty")
    if trials < 1:
        raise ConfigError("trials must be >= 1")

    def work(item):
        idx, level = item
        mean, stderr = se_point(scenario, mode, level, trials, seed, idx)
        return (mode, float(level), mean, stderr)

    return parallel_map(work, list(enumerate(error_grid)), workers)
