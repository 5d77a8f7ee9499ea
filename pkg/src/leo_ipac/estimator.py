"""Maximum-likelihood UE positioning from noisy multi-satellite observations.

Observations per satellite: delay, Doppler and (optionally) the AoD pair.
The estimator minimizes the Gaussian negative log-likelihood with
Gauss-Newton plus backtracking, evaluated at the *assumed* satellite states,
which may be mismatched against the states that generated the observations
(ephemeris error). The RMSE-vs-accuracy sweep measures the resulting
saturation floors together with the matched-model CRB.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.random import Generator

from .constants import R_EARTH
from .errors import GeometryError
from .fim import ObservationNoise, fim_from_rows, position_crb, position_jacobian
from .geometry import SatelliteState, los_geometry, unit

_GRAD_TOL = 1e-6
_STEP_TOL = 1e-4  # m
_MAX_ITER = 100


@dataclass(frozen=True)
class ObservationSet:
    """Per-satellite noisy measurements plus the states assumed by the estimator."""

    delays_s: np.ndarray
    dopplers_hz: np.ndarray
    aod_az_rad: np.ndarray | None
    aod_el_rad: np.ndarray | None
    noise: ObservationNoise
    assumed_sats: list[SatelliteState]
    carrier_hz: float

    def __post_init__(self):
        s = len(self.assumed_sats)
        if self.delays_s.shape != (s,) or self.dopplers_hz.shape != (s,):
            raise ValueError("one delay/Doppler record per satellite required")
        if self.noise.has_angles != (self.aod_az_rad is not None):
            raise ValueError("angle observations must match the noise model")
        if self.aod_az_rad is not None and (
            self.aod_az_rad.shape != (s,) or self.aod_el_rad.shape != (s,)
        ):
            raise ValueError("one AoD pair per satellite required")


@dataclass(frozen=True)
class EstimationResult:
    position: np.ndarray
    cost: float
    iterations: int
    converged: bool


def simulate_observations(
    true_ue: np.ndarray,
    true_sats: list[SatelliteState],
    noise: ObservationNoise,
    carrier_hz: float,
    rng: Generator,
) -> ObservationSet:
    """Noiseless observables of the true geometry plus independent Gaussian noise."""
    s = len(true_sats)
    delays = np.empty(s)
    dopplers = np.empty(s)
    az = np.empty(s) if noise.has_angles else None
    el = np.empty(s) if noise.has_angles else None
    for i, sat in enumerate(true_sats):
        geom = los_geometry(sat, true_ue, carrier_hz)
        delays[i] = geom.delay_s + rng.normal(0.0, np.sqrt(noise.var_delay))
        dopplers[i] = geom.doppler_hz + rng.normal(0.0, np.sqrt(noise.var_doppler))
        if noise.has_angles:
            az[i] = geom.aod_azimuth_rad + rng.normal(0.0, np.sqrt(noise.var_az))
            el[i] = geom.aod_elevation_rad + rng.normal(0.0, np.sqrt(noise.var_el))
    return ObservationSet(
        delays_s=delays,
        dopplers_hz=dopplers,
        aod_az_rad=az,
        aod_el_rad=el,
        noise=noise,
        assumed_sats=list(true_sats),
        carrier_hz=carrier_hz,
    )


def wrap_angle(x):
    """Wrap to (-pi, pi]."""
    w = np.mod(x + np.pi, 2.0 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w) if np.ndim(x) else (np.pi if w == -np.pi else w)


def nll(p: np.ndarray, obs: ObservationSet) -> tuple[float, np.ndarray]:
    """Gaussian negative log-likelihood and its analytic position gradient."""
    p = np.asarray(p, dtype=float)
    cost = 0.0
    grad = np.zeros(3)
    variances = obs.noise.variances()
    for i, sat in enumerate(obs.assumed_sats):
        geom = los_geometry(sat, p, obs.carrier_hz)
        rows = position_jacobian(geom, sat, p, obs.carrier_hz)
        if obs.noise.has_angles:
            resid = np.array(
                [
                    obs.delays_s[i] - geom.delay_s,
                    obs.dopplers_hz[i] - geom.doppler_hz,
                    wrap_angle(obs.aod_az_rad[i] - geom.aod_azimuth_rad),
                    wrap_angle(obs.aod_el_rad[i] - geom.aod_elevation_rad),
                ]
            )
        else:
            resid = np.array(
                [
                    obs.delays_s[i] - geom.delay_s,
                    obs.dopplers_hz[i] - geom.doppler_hz,
                ]
            )
            rows = rows[:2]
        w = resid / variances
        cost += 0.5 * float(resid @ w)
        grad -= rows.T @ w
    return cost, grad


def _gauss_newton_matrices(p: np.ndarray, obs: ObservationSet):
    """Cost, gradient, and the Gauss-Newton Hessian approximation at p."""
    cost, grad = nll(p, obs)
    h = np.zeros((3, 3))
    for sat in obs.assumed_sats:
        geom = los_geometry(sat, p, obs.carrier_hz)
        rows = position_jacobian(geom, sat, p, obs.carrier_hz)
        if not obs.noise.has_angles:
            rows = rows[:2]
        h += fim_from_rows(rows, obs.noise.variances())
    return cost, grad, h


def _gn_from_start(obs: ObservationSet, start: np.ndarray) -> EstimationResult:
    p = np.asarray(start, dtype=float).copy()
    cost, grad, h = _gauss_newton_matrices(p, obs)
    converged = False
    it = 0
    for it in range(1, _MAX_ITER + 1):
        if np.linalg.norm(grad) < _GRAD_TOL * (1.0 + abs(cost)):
            converged = True
            break
        try:
            step = np.linalg.solve(h, -grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(h, -grad, rcond=None)[0]
        # backtracking line search on the NLL
        t = 1.0
        accepted = False
        for _ in range(40):
            candidate = p + t * step
            try:
                new_cost, new_grad, new_h = _gauss_newton_matrices(candidate, obs)
            except GeometryError:
                t *= 0.5
                continue
            if new_cost <= cost - 1e-4 * t * max(0.0, -(grad @ step)):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        p, cost, grad, h = candidate, new_cost, new_grad, new_h
        if np.linalg.norm(t * step) < _STEP_TOL:
            converged = True
            break
    return EstimationResult(position=p, cost=cost, iterations=it, converged=converged)


def default_multistart_grid(obs: ObservationSet, half_span_m: float = 100e3, n: int = 5):
    """Coarse n x n start grid on the Earth surface under the constellation.

    Centered at the constellation's mean sub-satellite point, spanning
    +-half_span_m in the two local horizontal directions, at 0 m altitude.
    """
    center = unit(np.mean([s.position for s in obs.assumed_sats], axis=0)) * R_EARTH
    up = unit(center)
    pole = np.array([0.0, 0.0, 1.0])
    if abs(up @ pole) > 0.99:
        pole = np.array([0.0, 1.0, 0.0])
    east = unit(np.cross(pole, up))
    north = np.cross(up, east)
    offsets = np.linspace(-half_span_m, half_span_m, n)
    starts = []
    for de in offsets:
        for dn in offsets:
            q = center + de * east + dn * north
            starts.append(unit(q) * R_EARTH)  # project back to 0 m altitude
    return starts


def ml_estimate(
    obs: ObservationSet,
    init: np.ndarray | None = None,
) -> EstimationResult:
    """Gauss-Newton ML position estimate.

    With an explicit init a single descent is run; otherwise a coarse
    multi-start grid guards against local minima and the lowest-cost finish
    wins. A non-convergent run returns converged=False with the best-effort
    position.
    """
    starts = [np.asarray(init, dtype=float)] if init is not None else default_multistart_grid(obs)
    best: EstimationResult | None = None
    for start in starts:
        try:
            res = _gn_from_start(obs, start)
        except GeometryError:
            continue
        if best is None or res.cost < best.cost:
            best = res
    if best is None:
        raise GeometryError("no estimator start produced a valid descent")
    return best


def apply_orbit_mismatch(
    sats: list[SatelliteState], magnitude_m: float, rng: Generator
) -> list[SatelliteState]:
    """Shift each satellite position by magnitude_m in a uniform random direction."""
    if magnitude_m < 0:
        raise ValueError("mismatch magnitude must be >= 0")
    if magnitude_m == 0.0:
        return list(sats)
    out = []
    for sat in sats:
        direction = unit(rng.standard_normal(3))
        out.append(replace(sat, position=sat.position + magnitude_m * direction))
    return out


def matched_crb(
    sats: list[SatelliteState],
    ue: np.ndarray,
    noise: ObservationNoise,
    carrier_hz: float,
) -> float:
    """CRB from the given observation noise at the true geometry."""
    fim = np.zeros((3, 3))
    for sat in sats:
        geom = los_geometry(sat, ue, carrier_hz)
        rows = position_jacobian(geom, sat, ue, carrier_hz)
        if not noise.has_angles:
            rows = rows[:2]
        fim += fim_from_rows(rows, noise.variances())
    return position_crb(fim)


def grid_observation_noise(scenario, delay_sigma_ns: float) -> ObservationNoise:
    """Observation noise at one sweep grid point.

    The Doppler and AoD sigmas scale with the same factor as the delay sigma,
    referenced to the coarsest grid point.
    """
    ref_ns = max(scenario.delay_sigma_grid_ns)
    factor = delay_sigma_ns / ref_ns
    sigma_delay = delay_sigma_ns * 1e-9
    sigma_doppler = scenario.doppler_sigma_ref_hz * factor
    sigma_aod = scenario.aod_sigma_ref_rad * factor
    return ObservationNoise(
        var_delay=sigma_delay**2,
        var_doppler=sigma_doppler**2,
        var_az=sigma_aod**2,
        var_el=sigma_aod**2,
    )


def rmse_point(
    scenario,
    true_sats: list[SatelliteState],
    mismatch_idx: int,
    sigma_idx: int,
    trials: int,
    seed: int,
) -> tuple[float, float, float, float]:
    """One (mismatch, delay sigma) grid point: (mismatch, sigma_ns, RMSE, CRB)."""
    mismatch_m = scenario.mismatch_levels_m[mismatch_idx]
    delay_sigma_ns = scenario.delay_sigma_grid_ns[sigma_idx]
    noise = grid_observation_noise(scenario, delay_sigma_ns)
    ue = scenario.ue_position
    sq_err = 0.0
    for t in range(trials):
        rng = np.random.default_rng([seed, 7, mismatch_idx, sigma_idx, t])
        obs = simulate_observations(ue, true_sats, noise, scenario.carrier_hz, rng)
        assumed = apply_orbit_mismatch(true_sats, mismatch_m, rng)
        obs = replace(obs, assumed_sats=assumed)
        res = ml_estimate(obs, init=ue)
        sq_err += float(np.sum((res.position - ue) ** 2))
    rmse = np.sqrt(sq_err / trials)
    crb = matched_crb(true_sats, ue, noise, scenario.carrier_hz)
    return float(mismatch_m), float(delay_sigma_ns), float(rmse), float(crb)


def rmse_sweep(
    scenario,
    trials: int | None = None,
    seed: int | None = None,
    workers: int = 1,
) -> list[tuple[float, float, float, float, int]]:
    """RMSE and CRB over the (mismatch level, delay sigma) grid.

    Rows are ordered by (mismatch index, sigma index) regardless of worker
    count; per-trial random streams derive from (seed, indices, trial).
    """
    from .parallel import parallel_map
    from .scenario import scenario_constellation

    trials = scenario.trials if trials is None else trials
    seed = scenario.seed if seed is None else seed
    true_sats = scenario_constellation(scenario)
    points = [
        (mi, gi)
        for mi in range(len(scenario.mismatch_levels_m))
        for gi in range(len(scenario.delay_sigma_grid_ns))
    ]

    def work(point):
        mi, gi = point
        return rmse_point(scenario, true_sats, mi, gi, trials, seed)

    results = parallel_map(work, points, workers)
    return [(m, s, r, c, trials) for (m, s, r, c) in results]
