"""Experiment configuration and the default constellation geometry.

A Scenario is a flat bag of RF parameters, constellation geometry, sweep
grids, and seeds. It round-trips through a plain ``key = value`` text file
(one key per line, ``#`` comments); unknown keys are rejected and missing
keys take the defaults below.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .channel import ArrayGeometry, AttenuationConfig
from .constants import R_EARTH
from .errors import ConfigError
from .geometry import SatelliteState, circular_speed, ecef, unit

def _log_grid(start: float, stop: float, num: int) -> tuple:
    return tuple(float(x) for x in np.logspace(np.log10(start), np.log10(stop), num))


_DELAY_GRID_NS = _log_grid(10.0 / 3.0, 10000.0 / 3.0, 12)


@dataclass
class Scenario:
    """Full experiment configuration; defaults are the simulator's baseline setup."""

    carrier_hz: float = 28e9
    bandwidth_hz: float = 240e6
    tx_power_dbm: float = 60.0
    noise_psd_dbm_hz: float = -174.0
    altitude_m: float = 400e3
    rician_k_linear: float = 3.0
    array_n: int = 20  # per-dimension element count of the square array
    n_satellites: int = 5
    tx_mode: str = "cooperative"  # cooperative | non_cooperative
    xcorr: float = 0.5  # cross-correlation of non-orthogonal signals
    coherent_time_s: float = 1e-3
    # attenuation chain (non-FSPL terms default off: rural LoS, outdoor)
    shadow_sigma_db: float = 0.0
    los_condition: bool = True
    clutter_db: float = 0.0
    atmospheric_zenith_db: float = 0.0
    scintillation_ionospheric_db: float = 0.0
    scintillation_tropospheric_db: float = 0.0
    penetration_db: float = 0.0
    # constellation layout
    apex_elevation_deg: float = 70.0
    ring_elevation_deg: float = 45.0
    # sweep grids
    err_ratio_grid: tuple = _log_grid(1e-4, 1.0, 9)
    pos_sigma_grid_m: tuple = _log_grid(1e2, 1e5, 10)
    delay_sigma_grid_ns: tuple = _DELAY_GRID_NS
    mismatch_levels_m: tuple = (0.0, 5000.0, 10000.0)
    doppler_sigma_ref_hz: float = 1000.0  # Doppler sigma at the coarsest delay sigma
    aod_sigma_ref_rad: float = 2.5e-3  # AoD sigma at the coarsest delay sigma
    crb_n_grid: tuple = (2, 4, 8, 16, 32)
    crb_s_values: tuple = (4, 5, 6)
    # Monte Carlo
    trials: int = 1000
    seed: int = 1234

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        positive = (
            "carrier_hz",
            "bandwidth_hz",
            "altitude_m",
            "coherent_time_s",
            "doppler_sigma_ref_hz",
            "aod_sigma_ref_rad",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        nonneg = (
            "rician_k_linear",
            "shadow_sigma_db",
            "clutter_db",
            "atmospheric_zenith_db",
            "scintillation_ionospheric_db",
            "scintillation_tropospheric_db",
            "penetration_db",
        )
        for name in nonneg:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.array_n < 1:
            raise ConfigError("array_n must be >= 1")
        if self.n_satellites < 1:
            raise ConfigError("n_satellites must be >= 1")
        if self.tx_mode not in ("cooperative", "non_cooperative"):
            raise ConfigError("tx_mode must be 'cooperative' or 'non_cooperative'")
        if not (0.0 <= self.xcorr <= 1.0):
            raise ConfigError("xcorr must be in [0, 1]")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not (0.0 < self.apex_elevation_deg <= 90.0):
            raise ConfigError("apex_elevation_deg must be in (0, 90]")
        if not (0.0 < self.ring_elevation_deg <= 90.0):
            raise ConfigError("ring_elevation_deg must be in (0, 90]")
        for name in (
            "err_ratio_grid",
            "pos_sigma_grid_m",
            "delay_sigma_grid_ns",
            "mismatch_levels_m",
            "crb_n_grid",
            "crb_s_values",
        ):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"{name} must be non-empty")
        if min(self.delay_sigma_grid_ns) <= 0:
            raise ConfigError("delay_sigma_grid_ns entries must be > 0")
        if min(self.mismatch_levels_m) < 0:
            raise ConfigError("mismatch_levels_m entries must be >= 0")

    # -- derived views -------------------------------------------------

    @property
    def ue_position(self) -> np.ndarray:
        """Fixed reference UE: 0 N, 0 E, 0 m altitude, in ECEF."""
        return ecef(R_EARTH, 0.0, 0.0)

    @property
    def array(self) -> ArrayGeometry:
        return ArrayGeometry(self.array_n, self.array_n)

    @property
    def attenuation(self) -> AttenuationConfig:
        return AttenuationConfig(
            shadow_sigma_db=self.shadow_sigma_db,
            los=self.los_condition,
            clutter_db=self.clutter_db,
            atmospheric_zenith_db=self.atmospheric_zenith_db,
            scintillation_ionospheric_db=self.scintillation_ionospheric_db,
            scintillation_tropospheric_db=self.scintillation_tropospheric_db,
            penetration_db=self.penetration_db,
        )


# -- serialization ------------------------------------------------------

def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ", ".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _parse_value(raw: str, default):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(float(raw))
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, (tuple, list)):
            elem = default[0] if len(default) else 0.0
            parts = [p for p in raw.split(",") if p.strip()]
            return tuple(_parse_value(p, elem) for p in parts)
        return raw
    except ValueError as exc:
        raise ConfigError(f"cannot parse value {raw!r}") from exc


def save_scenario(scenario: Scenario, path) -> None:
    lines = [
        f"{f.name} = {_format_value(getattr(scenario, f.name))}"
        for f in fields(scenario)
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_scenario(path) -> Scenario:
    """Parse a flat key = value scenario file; unknown keys are an error."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"scenario file not found: {path}")
    defaults = {f.name: f.default_factory() if callable(f.default_factory) else f.default
                for f in fields(Scenario)}
    values: dict = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: malformed line (expected key = value)")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in defaults:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _parse_value(raw, defaults[key])
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    return Scenario(**values)


def scenario_hash(scenario: Scenario) -> str:
    """Stable hash of every scenario field (changes iff a field changes)."""
    canonical = "\n".join(
        f"{f.name} = {_format_value(getattr(scenario, f.name))}"
        for f in fields(scenario)
    )
    return hashlib.sha256(canonical.encode()).hexdigest()


# -- constellation geometry --------------------------------------------

@dataclass(frozen=True)
class ConstellationLayout:
    """Per-satellite (elevation, azimuth) as seen from the UE, plus altitude."""

    elevations_rad: tuple
    azimuths_rad: tuple
    altitude_m: float

    def __post_init__(self):
        for el in self.elevations_rad:
            if not (0.0 < el <= np.pi / 2):
                raise ConfigError("layout elevations must be in (0, pi/2]")
        if len(self.elevations_rad) != len(self.azimuths_rad):
            raise ConfigError("layout elevation/azimuth lists must align")


def default_layout(
    s: int,
    altitude_m: float,
    apex_elevation_rad: float = np.deg2rad(70.0),
    ring_elevation_rad: float = np.deg2rad(45.0),
) -> ConstellationLayout:
    """Deterministic layout: one high-elevation apex satellite plus an
    equally-azimuth-spaced ring at the ring elevation."""
    if s < 1:
        raise ConfigError("constellation needs at least one satellite")
    elevations = [apex_elevation_rad]
    azimuths = [0.0]
    for k in range(s - 1):
        elevations.append(ring_elevation_rad)
        azimuths.append(2.0 * np.pi * k / (s - 1))
    return ConstellationLayout(tuple(elevations), tuple(azimuths), altitude_m)


def slant_range(elevation_rad: float, altitude_m: float) -> float:
    """UE-satellite distance for a given UE elevation and orbit altitude."""
    r_s = R_EARTH + altitude_m
    se = np.sin(elevation_rad)
    return float(-R_EARTH * se + np.sqrt((R_EARTH * se) ** 2 + r_s**2 - R_EARTH**2))


def build_constellation(layout: ConstellationLayout, ue: np.ndarray) -> list[SatelliteState]:
    """Place satellites at the layout's elevation/azimuth relative to the UE.

    Velocities are tangential at circular speed, with the along-track
    direction rotated per the layout azimuth so the constellation is fully
    deterministic.
    """
    ue = np.asarray(ue, dtype=float)
    up = unit(ue)
    # local ENU at the UE; reference pole is the ECEF z axis
    pole = np.array([0.0, 0.0, 1.0])
    if abs(up @ pole) > 0.99:
        pole = np.array([0.0, 1.0, 0.0])
    east = unit(np.cross(pole, up))
    north = np.cross(up, east)

    sats = []
    for i, (el, az) in enumerate(zip(layout.elevations_rad, layout.azimuths_rad)):
        horizontal = np.cos(az) * north + np.sin(az) * east
        direction = np.sin(el) * up + np.cos(el) * horizontal
        pos = ue + slant_range(el, layout.altitude_m) * direction
        p_hat = unit(pos)
        e1 = unit(np.cross(pole, p_hat))
        e2 = np.cross(p_hat, e1)
        v_dir = np.cos(az) * e2 + np.sin(az) * e1
        vel = circular_speed(np.linalg.norm(pos)) * v_dir
        sats.append(SatelliteState(sat_id=i, position=pos, velocity=vel))
    return sats


def scenario_constellation(scenario: Scenario, s: int | None = None) -> list[SatelliteState]:
    """Default constellation of a scenario (s overrides n_satellites)."""
    layout = default_layout(
        s if s is not None else scenario.n_satellites,
        scenario.altitude_m,
        np.deg2rad(scenario.apex_elevation_deg),
        np.deg2rad(scenario.ring_elevation_deg),
    )
    return build_constellation(layout, scenario.ue_position)
