"""Fisher information and positioning CRB from delay/Doppler/AoD observations.

Each satellite contributes an observation tuple (delay, Doppler and, with an
antenna array, the AoD azimuth/elevation pair). Cooperative satellites send
orthogonal signals, so each link sees only thermal noise; non-cooperative
satellites interfere, inflating the noise floor by a cross-correlation factor.

The FIM over the 3D UE position is assembled as sum_s J_s^T Lambda_s^-1 J_s
with analytic Jacobians verified against finite differences in the tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .beamforming import dbm_to_watts
from .channel import ArrayGeometry, AttenuationConfig, large_scale_loss
from .constants import SPEED_OF_LIGHT
from .errors import GeometryError, SingularInformationError
from .geometry import LosGeometry, SatelliteState, array_frame, los_geometry

# angle-variance constant: var = ANGLE_VAR_COEFF / (sinr * N * (N_dim^2 - 1))
ANGLE_VAR_COEFF = 6.0 / np.pi**2
# below this sin(aod_elevation) the spherical azimuth gradient is replaced by
# its direction-cosine limit (the az/el chart is singular at boresight)
_BORESIGHT_SIN_EL = 1e-6


class TxMode(Enum):
    COOPERATIVE = "cooperative"
    NON_COOPERATIVE = "non_cooperative"


@dataclass(frozen=True)
class ObservationNoise:
    """Diagonal observation covariance; angle entries absent for single-antenna."""

    var_delay: float  # s^2
    var_doppler: float  # Hz^2
    var_az: float | None = None  # rad^2
    var_el: float | None = None  # rad^2

    def __post_init__(self):
        if self.var_delay <= 0 or self.var_doppler <= 0:
            raise ValueError("delay/Doppler variances must be > 0")
        if (self.var_az is None) != (self.var_el is None):
            raise ValueError("angle variances must be both present or both absent")
        if self.var_az is not None and (self.var_az <= 0 or self.var_el <= 0):
            raise ValueError("angle variances must be > 0")

    @property
    def has_angles(self) -> bool:
        return self.var_az is not None

    def variances(self) -> np.ndarray:
        if self.has_angles:
            return np.array([self.var_delay, self.var_doppler, self.var_az, self.var_el])
        return np.array([self.var_delay, self.var_doppler])


@dataclass(frozen=True)
class RfConfig:
    """RF parameters needed to turn geometry into observation noise."""

    carrier_hz: float
    bandwidth_hz: float
    tx_power_dbm: float
    noise_psd_dbm_hz: float
    coherent_time_s: float = 1e-3
    xcorr: float = 0.5
    attenuation: AttenuationConfig = AttenuationConfig()


def effective_sinr(
    s: int,
    received_powers_w,
    noise_w: float,
    mode: TxMode,
    xcorr: float,
) -> float:
    """Post-separation SINR of satellite s.

    Cooperative links are orthogonal (no interference); non-cooperative links
    see the other satellites' power scaled by the cross-correlation factor.
    """
    powers = np.asarray(received_powers_w, dtype=float)
    if noise_w <= 0 or np.any(powers <= 0):
        raise ValueError("powers and noise must be positive")
    if mode is TxMode.COOPERATIVE:
        return float(powers[s] / noise_w)
    interference = xcorr * (powers.sum() - powers[s])
    return float(powers[s] / (noise_w + interference))


def observation_noise(
    sinr: float,
    bandwidth_hz: float,
    coherent_time_s: float,
    array: ArrayGeometry | None = None,
    single_antenna: bool = False,
) -> ObservationNoise:
    """Estimation-theoretic variances of the per-satellite observations.

    Delay and Doppler use the classical inverse RMS-bandwidth/duration forms
    with flat-spectrum beta = B/sqrt(12) and T_eff = T/sqrt(12). The angle
    variances scale inversely with SINR, element count and squared aperture.
    """
    if sinr <= 0:
        raise ValueError("SINR must be positive")
    beta = bandwidth_hz / np.sqrt(12.0)
    t_eff = coherent_time_s / np.sqrt(12.0)
    var_delay = 1.0 / (8.0 * np.pi**2 * beta**2 * sinr)
    var_doppler = 1.0 / (8.0 * np.pi**2 * t_eff**2 * sinr)
    if single_antenna:
        return ObservationNoise(var_delay=var_delay, var_doppler=var_doppler)
    if array is None:
        raise ValueError("array geometry required unless single_antenna")
    n_dim = max(array.n_rows, array.n_cols)
    if n_dim < 2:
        raise ValueError("angle observations need at least 2 elements per dimension")
    var_ang = ANGLE_VAR_COEFF / (sinr * array.n_elements * (n_dim**2 - 1))
    return ObservationNoise(
        var_delay=var_delay, var_doppler=var_doppler, var_az=var_ang, var_el=var_ang
    )


def position_jacobian(
    geom: LosGeometry,
    sat: SatelliteState,
    ue: np.ndarray,
    carrier_hz: float,
) -> np.ndarray:
    """Gradients of (delay, Doppler, AoD az, AoD el) w.r.t. the UE position.

    Returns a 4x3 matrix; callers drop the angle rows for single-antenna
    satellites. Near boresight the spherical az/el gradients are replaced by
    the orthonormal direction-cosine pair, which is the well-defined limit.
    """
    ue = np.asarray(ue, dtype=float)
    d = ue - sat.position
    r = np.linalg.norm(d)
    if r < 1e-3:
        raise GeometryError("degenerate geometry: zero range")
    u = d / r

    row_delay = u / SPEED_OF_LIGHT
    row_doppler = -(carrier_hz / SPEED_OF_LIGHT) * (sat.velocity @ (np.eye(3) - np.outer(u, u))) / r

    frame = array_frame(sat)  # rows x, y, z in ECEF
    u_f = frame @ u
    sin_el = np.hypot(u_f[0], u_f[1])
    if sin_el < _BORESIGHT_SIN_EL:
        row_el = (frame[0] - (frame[0] @ u) * u) / r
        row_az = (frame[1] - (frame[1] @ u) * u) / r
    else:
        d_az = np.array([-u_f[1], u_f[0], 0.0]) / sin_el**2
        d_el = np.array([0.0, 0.0, -1.0 / sin_el])
        row_az = (d_az @ frame) @ (np.eye(3) - np.outer(u, u)) / r
        row_el = (d_el @ frame) @ (np.eye(3) - np.outer(u, u)) / r

    return np.vstack([row_delay, row_doppler, row_az, row_el])


def fim_from_rows(jacobian: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Assemble J^T diag(var)^-1 J for one satellite."""
    w = 1.0 / np.asarray(variances, dtype=float)
    return jacobian.T @ (w[:, None] * jacobian)


def received_power_w(
    sat: SatelliteState,
    ue: np.ndarray,
    rf: RfConfig,
    array_gain: float,
) -> float:
    """Beamformed received power through the deterministic (mean) link budget."""
    geom = los_geometry(sat, ue, rf.carrier_hz)
    budget = large_scale_loss(
        geom.range_m, geom.elevation_rad, rf.carrier_hz, rf.attenuation, rng=None
    )
    return dbm_to_watts(rf.tx_power_dbm) * array_gain * 10.0 ** (-budget.total_db / 10.0)


def positioning_noise_w(rf: RfConfig) -> float:
    """Noise power after coherent pilot integration: N0 / T_coh."""
    return dbm_to_watts(rf.noise_psd_dbm_hz) / rf.coherent_time_s


def position_fim(
    sats: list[SatelliteState],
    ue: np.ndarray,
    mode: TxMode,
    array: ArrayGeometry,
    single_antenna: bool,
    rf: RfConfig,
) -> np.ndarray:
    """3x3 position FIM of a constellation; symmetric PSD by construction.

    Multi-antenna satellites beamform their LoS towards the UE (array gain N
    in received power) and contribute AoD rows; single-antenna satellites
    have unit gain and delay/Doppler rows only.
    """
    if len(sats) < 1:
        raise ValueError("need at least one satellite")
    gain = 1.0 if single_antenna else float(array.n_elements)
    powers = [received_power_w(s, ue, rf, gain) for s in sats]
    noise_w = positioning_noise_w(rf)

    fim = np.zeros((3, 3))
    for i, sat in enumerate(sats):
        sinr = effective_sinr(i, powers, noise_w, mode, rf.xcorr)
        noise = observation_noise(
            sinr, rf.bandwidth_hz, rf.coherent_time_s, array, single_antenna
        )
        geom = los_geometry(sat, ue, rf.carrier_hz)
        rows = position_jacobian(geom, sat, ue, rf.carrier_hz)
        if single_antenna:
            rows = rows[:2]
        fim += fim_from_rows(rows, noise.variances())
    return 0.5 * (fim + fim.T)


def position_crb(fim: np.ndarray) -> float:
    """Root-trace of the inverse FIM, in meters.

    Raises SingularInformationError when the smallest eigenvalue is below
    1e-12 of the largest (geometry not localizable).
    """
    fim = np.asarray(fim, dtype=float)
    eigvals = np.linalg.eigvalsh(0.5 * (fim + fim.T))
    if eigvals[-1] <= 0 or eigvals[0] < 1e-12 * eigvals[-1]:
        raise SingularInformationError("position FIM is numerically singular")
    return float(np.sqrt(np.trace(np.linalg.inv(fim))))


def crb_sweep(
    n_grid,
    s_values,
    modes,
    scenario,
) -> list[tuple[str, int, int, float]]:
    """CRB table over array size and constellation size.

    Emits one row per (config, S, N) with config in {SA-C, MA-C, MA-NC}.
    SA-C is independent of N and computed once per S, then replicated.
    """
    from .scenario import scenario_constellation

    if len(n_grid) == 0 or len(s_values) == 0:
        raise ValueError("sweep grids must be non-empty")
    rf = rf_config_from_scenario(scenario)
    ue = scenario.ue_position
    rows: list[tuple[str, int, int, float]] = []
    for config in modes:
        for s in s_values:
            sats = scenario_constellation(scenario, s=s)
            if config == "SA-C":
                fim = position_fim(
                    sats, ue, TxMode.COOPERATIVE, scenario.array, True, rf
                )
                crb = position_crb(fim)
                for n in n_grid:
                    rows.append((config, s, int(n), crb))
                continue
            mode = TxMode.COOPERATIVE if config == "MA-C" else TxMode.NON_COOPERATIVE
            for n in n_grid:
                arr = ArrayGeometry(int(n), int(n))
                fim = position_fim(sats, ue, mode, arr, False, rf)
                rows.append((config, s, int(n), position_crb(fim)))
    return rows


def rf_config_from_scenario(scenario) -> RfConfig:
    return RfConfig(
        carrier_hz=scenario.carrier_hz,
        bandwidth_hz=scenario.bandwidth_hz,
        tx_power_dbm=scenario.tx_power_dbm,
        noise_psd_dbm_hz=scenario.noise_psd_dbm_hz,
        coherent_time_s=scenario.coherent_time_s,
        xcorr=scenario.xcorr,
        attenuation=scenario.attenuation,
    )
