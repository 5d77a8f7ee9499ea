"""Shared fixtures and random-geometry helpers."""
from __future__ import annotations

import numpy as np
import pytest

from leo_ipac.constants import R_EARTH
from leo_ipac.geometry import SatelliteState, circular_speed, unit


def random_satellite(rng: np.random.Generator, sat_id: int = 0) -> SatelliteState:
    """Random LEO satellite with tangential circular-speed velocity."""
    p_hat = unit(rng.standard_normal(3))
    r = R_EARTH + rng.uniform(300e3, 800e3)
    pos = r * p_hat
    t = rng.standard_normal(3)
    t -= (t @ p_hat) * p_hat
    vel = circular_speed(r) * unit(t)
    return SatelliteState(sat_id=sat_id, position=pos, velocity=vel)


def ue_near_nadir(
    rng: np.random.Generator, sat: SatelliteState, min_deg: float = 3.0, max_deg: float = 15.0
) -> np.ndarray:
    """UE on the Earth surface, offset from the sub-satellite point.

    The offset keeps the departure direction safely away from both boresight
    and the horizon, so all observables are well conditioned.
    """
    p_hat = unit(sat.position)
    t = rng.standard_normal(3)
    t -= (t @ p_hat) * p_hat
    t = unit(t)
    theta = np.deg2rad(rng.uniform(min_deg, max_deg))
    return R_EARTH * (np.cos(theta) * p_hat + np.sin(theta) * t)


def random_link(rng: np.random.Generator):
    sat = random_satellite(rng)
    return sat, ue_near_nadir(rng, sat)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240824)


@pytest.fixture
def scenario():
    from leo_ipac import Scenario

    return Scenario()
