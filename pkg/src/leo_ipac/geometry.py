"""ECEF orbital geometry primitives.

Ranges, elevation, Doppler shift/rate, timing advance, angles of departure in
the satellite array frame, and a simple circular-orbit propagator.

Conventions:
  * Positions/velocities are ECEF 3-vectors in meters and m/s.
  * The satellite array boresight points nadir (towards the Earth center);
    the in-plane x axis is the projection of the satellite velocity.
  * Doppler sign: doppler = -(v_s . u)/c * carrier, with u the unit vector
    from the satellite to the UE.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import LEO_ALT_MAX, LEO_ALT_MIN, MU_EARTH, R_EARTH, SPEED_OF_LIGHT
from .errors import GeometryError

_MIN_RANGE = 1e-3  # m, below this the geometry is considered degenerate


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize a vector, raising on (near-)zero input."""
    n = np.linalg.norm(v)
    if n < 1e-15:
        raise GeometryError("cannot normalize a zero vector")
    return v / n


def circular_speed(radius_m: float) -> float:
    """Circular-orbit speed sqrt(mu / r) at geocentric radius r."""
    return np.sqrt(MU_EARTH / radius_m)


def ecef(x: float, y: float, z: float) -> np.ndarray:
    """Build an ECEF position vector (meters)."""
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise GeometryError("ECEF components must be finite")
    return v


def validate_ue_position(p: np.ndarray) -> np.ndarray:
    """Check that a UE position sits on or above the Earth surface (500 m slack)."""
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise GeometryError("UE position must be finite")
    if np.linalg.norm(p) < R_EARTH - 500.0:
        raise GeometryError("UE position lies below the Earth surface")
    return p


@dataclass(frozen=True)
class SatelliteState:
    """One satellite: positioning anchor and beam source.

    Invariants: geocentric altitude within the LEO band [160, 2000] km and
    speed within 5% of the local circular-orbit speed.
    """

    sat_id: int
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        vel = np.asarray(self.velocity, dtype=float)
        if pos.shape != (3,) or vel.shape != (3,):
            raise GeometryError("position and velocity must be 3-vectors")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise GeometryError("satellite state must be finite")
        r = np.linalg.norm(pos)
        alt = r - R_EARTH
        if not (LEO_ALT_MIN <= alt <= LEO_ALT_MAX):
            raise GeometryError(
                f"satellite altitude {alt / 1e3:.1f} km outside the LEO band"
            )
        v_circ = circular_speed(r)
        speed = np.linalg.norm(vel)
        if not (0.95 * v_circ <= speed <= 1.05 * v_circ):
            raise GeometryError(
                f"satellite speed {speed:.1f} m/s deviates more than 5% "
                f"from circular speed {v_circ:.1f} m/s"
            )
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)


@dataclass(frozen=True)
class LosGeometry:
    """Line-of-sight observables of one satellite-UE link."""

    range_m: float
    elevation_rad: float  # UE-local elevation of the satellite
    delay_s: float
    doppler_hz: float
    aod_azimuth_rad: float  # departure azimuth in the satellite array frame
    aod_elevation_rad: float  # departure angle off boresight (0 = nadir)


def array_frame(sat: SatelliteState) -> np.ndarray:
    """Orthonormal array frame of a satellite, rows (x, y, z) in ECEF.

    z is the boresight (nadir); x is the velocity projected into the array
    plane; y completes the right-handed frame.
    """
    z = -unit(sat.position)
    v_inplane = sat.velocity - (sat.velocity @ z) * z
    if np.linalg.norm(v_inplane) < 1e-9:
        raise GeometryError("satellite velocity is parallel to the boresight")
    x = unit(v_inplane)
    y = np.cross(z, x)
    return np.vstack([x, y, z])


def los_geometry(sat: SatelliteState, ue: np.ndarray, carrier_hz: float) -> LosGeometry:
    """Compute the LoS observable tuple (range, delay, Doppler, AoD) of a link.

    Raises GeometryError for coincident satellite/UE positions.
    """
    ue = np.asarray(ue, dtype=float)
    d = sat.position - ue  # UE -> satellite
    range_m = float(np.linalg.norm(d))
    if range_m < _MIN_RANGE:
        raise GeometryError("satellite and UE positions coincide")
    u = -d / range_m  # satellite -> UE, unit
    delay_s = range_m / SPEED_OF_LIGHT
    doppler_hz = float(-(sat.velocity @ u) / SPEED_OF_LIGHT * carrier_hz)

    up = unit(ue)
    elevation = float(np.arcsin(np.clip((d / range_m) @ up, -1.0, 1.0)))

    frame = array_frame(sat)
    u_f = frame @ u
    aod_el = float(np.arccos(np.clip(u_f[2], -1.0, 1.0)))
    aod_az = float(np.arctan2(u_f[1], u_f[0]))
    return LosGeometry(
        range_m=range_m,
        elevation_rad=elevation,
        delay_s=delay_s,
        doppler_hz=doppler_hz,
        aod_azimuth_rad=aod_az,
        aod_elevation_rad=aod_el,
    )


def timing_advance(sat: SatelliteState, ue: np.ndarray) -> float:
    """Round-trip timing advance 2*delay so uplink frames land inside one CP."""
    return 2.0 * los_geometry(sat, ue, carrier_hz=1.0).delay_s


def max_doppler_and_rate(altitude_m: float, carrier_hz: float) -> tuple[float, float]:
    """Worst-case Doppler shift (horizon pass) and Doppler rate (zenith pass).

    max Doppler = (v_orb/c) * carrier * R_E/(R_E + h)
    max rate    = (v_orb^2 / (h c)) * carrier
    """
    if not (LEO_ALT_MIN <= altitude_m <= LEO_ALT_MAX):
        raise GeometryError("altitude outside the LEO band")
    r = R_EARTH + altitude_m
    v_orb = circular_speed(r)
    f_max = (v_orb / SPEED_OF_LIGHT) * carrier_hz * (R_EARTH / r)
    rate_max = (v_orb**2 / (altitude_m * SPEED_OF_LIGHT)) * carrier_hz
    return f_max, rate_max


def propagate_circular_orbit(state: SatelliteState, dt: float) -> SatelliteState:
    """Rotate position and velocity about the orbit normal by omega*dt.

    omega = sqrt(mu/r)/r; norms of position and velocity are preserved.
    """
    p, v = state.position, state.velocity
    n = np.cross(p, v)
    axis = unit(n)
    r = np.linalg.norm(p)
    omega = circular_speed(r) / r
    theta = omega * dt
    cos_t, sin_t = np.cos(theta), np.sin(theta)

    def rotate(w: np.ndarray) -> np.ndarray:
        # Rodrigues rotation about `axis`
        return (
            w * cos_t
            + np.cross(axis, w) * sin_t
            + axis * (axis @ w) * (1.0 - cos_t)
        )

    return SatelliteState(state.sat_id, rotate(p), rotate(v))
