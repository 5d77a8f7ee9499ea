import numpy as np
import pytest

from conftest import random_satellite, ue_near_nadir
from leo_ipac.estimator import (
    ObservationSet,
    apply_orbit_mismatch,
    default_multistart_grid,
    grid_observation_noise,
    matched_crb,
    ml_estimate,
    nll,
    rmse_point,
    rmse_sweep,
    simulate_observations,
    wrap_angle,
)
from leo_ipac.fim import ObservationNoise
from leo_ipac.geometry import SatelliteState, los_geometry

CARRIER = 28e9

TIGHT = ObservationNoise(
    var_delay=(1e-9) ** 2,
    var_doppler=100.0**2,
    var_az=(1e-4) ** 2,
    var_el=(1e-4) ** 2,
)

NEGLIGIBLE = ObservationNoise(
    var_delay=1e-40, var_doppler=1e-20, var_az=1e-24, var_el=1e-24
)


def random_constellation(rng, s=5):
    sats = [random_satellite(rng, i) for i in range(s)]
    ue = ue_near_nadir(rng, sats[0])
    return sats, ue


def clustered_constellation(rng, s=5):
    """Satellites spread around one region so every link sees the same UE."""
    base = random_satellite(rng, 0)
    sats = [base]
    p_hat = base.position / np.linalg.norm(base.position)
    for i in range(1, s):
        t = rng.standard_normal(3)
        t -= (t @ p_hat) * p_hat
        t /= np.linalg.norm(t)
        theta = np.deg2rad(rng.uniform(3.0, 8.0))
        r = np.linalg.norm(base.position)
        pos = r * (np.cos(theta) * p_hat + np.sin(theta) * t)
        q = pos / r
        v = rng.standard_normal(3)
        v -= (v @ q) * q
        v = v / np.linalg.norm(v) * np.linalg.norm(base.velocity)
        sats.append(SatelliteState(i, pos, v))
    ue = ue_near_nadir(rng, base)
    return sats, ue


class TestSimulateObservations:
    def test_negligible_noise_matches_geometry(self, rng):
        sats, ue = clustered_constellation(rng)
        obs = simulate_observations(ue, sats, NEGLIGIBLE, CARRIER, rng)
        for i, sat in enumerate(sats):
            geom = los_geometry(sat, ue, CARRIER)
            assert obs.delays_s[i] == pytest.approx(geom.delay_s, rel=1e-9)
            assert obs.dopplers_hz[i] == pytest.approx(geom.doppler_hz, rel=1e-6)
            assert obs.aod_az_rad[i] == pytest.approx(geom.aod_azimuth_rad, abs=1e-9)
            assert obs.aod_el_rad[i] == pytest.approx(geom.aod_elevation_rad, abs=1e-9)

    def test_delay_noise_variance_monte_carlo(self, rng):
        sats, ue = clustered_constellation(rng, s=2)
        geom = los_geometry(sats[0], ue, CARRIER)
        noise = ObservationNoise(
            var_delay=(5e-9) ** 2, var_doppler=1.0, var_az=None, var_el=None
        )
        residuals = np.empty(10000)
        for i in range(10000):
            obs = simulate_observations(ue, sats, noise, CARRIER, rng)
            residuals[i] = obs.delays_s[0] - geom.delay_s
        assert np.var(residuals) == pytest.approx((5e-9) ** 2, rel=0.05)
        assert np.mean(residuals) == pytest.approx(0.0, abs=3 * 5e-9 / 100)

    def test_seed_determinism(self):
        rng1 = np.random.default_rng(11)
        sats, ue = clustered_constellation(rng1)
        obs_a = simulate_observations(ue, sats, TIGHT, CARRIER, np.random.default_rng(5))
        obs_b = simulate_observations(ue, sats, TIGHT, CARRIER, np.random.default_rng(5))
        assert np.array_equal(obs_a.delays_s, obs_b.delays_s)
        assert np.array_equal(obs_a.aod_az_rad, obs_b.aod_az_rad)

    def test_shape_mismatch_rejected(self, rng):
        sats, ue = clustered_constellation(rng, s=3)
        with pytest.raises(ValueError):
            ObservationSet(
                delays_s=np.zeros(2),
                dopplers_hz=np.zeros(3),
                aod_az_rad=np.zeros(3),
                aod_el_rad=np.zeros(3),
                noise=TIGHT,
                assumed_sats=sats,
                carrier_hz=CARRIER,
            )


class TestWrapAngle:
    def test_values(self):
        assert wrap_angle(0.0) == 0.0
        assert wrap_angle(np.pi) == pytest.approx(np.pi)
        assert wrap_angle(-np.pi) == pytest.approx(np.pi)
        assert wrap_angle(3 * np.pi / 2) == pytest.approx(-np.pi / 2)
        out = wrap_angle(np.array([0.1, 2 * np.pi + 0.1, -2 * np.pi + 0.1]))
        assert np.allclose(out, 0.1)


class TestNll:
    def test_zero_at_truth_with_noiseless_observations(self, rng):
        sats, ue = clustered_constellation(rng)
        obs = simulate_observations(ue, sats, NEGLIGIBLE, CARRIER, rng)
        # evaluate under a sane noise model so tiny residuals stay tiny
        from dataclasses import replace

        obs = replace(obs, noise=TIGHT)
        cost, grad = nll(ue, obs)
        assert cost < 1e-6
        assert np.linalg.norm(grad) < 1e-3 * (1 + cost)

    def test_gradient_finite_difference(self, rng):
        sats, ue = clustered_constellation(rng)
        obs = simulate_observations(ue, sats, TIGHT, CARRIER, rng)
        p = ue + rng.uniform(-50.0, 50.0, 3)
        _, grad = nll(p, obs)
        step = 0.05
        for k in range(3):
            dp = np.zeros(3)
            dp[k] = step
            cp, _ = nll(p + dp, obs)
            cm, _ = nll(p - dp, obs)
            fd = (cp - cm) / (2 * step)
            assert grad[k] == pytest.approx(fd, rel=1e-5, abs=1e-8 * abs(fd) + 1e-10)

    def test_quadrupled_variances_quarter_the_cost(self, rng):
        from dataclasses import replace

        sats, ue = clustered_constellation(rng)
        obs = simulate_observations(ue, sats, TIGHT, CARRIER, rng)
        p = ue + np.array([30.0, -20.0, 10.0])
        cost, _ = nll(p, obs)
        scaled = ObservationNoise(
            var_delay=4 * TIGHT.var_delay,
            var_doppler=4 * TIGHT.var_doppler,
            var_az=4 * TIGHT.var_az,
            var_el=4 * TIGHT.var_el,
        )
        cost4, _ = nll(p, replace(obs, noise=scaled))
        assert cost4 == pytest.approx(cost / 4.0, rel=1e-12)


class TestMlEstimate:
    def test_zero_noise_recovery_from_init(self, rng):
        sats, ue = clustered_constellation(rng)
        obs = simulate_observations(ue, sats, NEGLIGIBLE, CARRIER, rng)
        from dataclasses import replace

        obs = replace(obs, noise=TIGHT)
        res = ml_estimate(obs, init=ue + np.array([500.0, -300.0, 200.0]))
        assert np.linalg.norm(res.position - ue) < 1e-3
        assert res.converged

    def test_zero_noise_recovery_multistart(self, rng):
        sats, ue = clustered_constellation(rng)
        obs = simulate_observations(ue, sats, NEGLIGIBLE, CARRIER, rng)
        from dataclasses import replace

        obs = replace(obs, noise=TIGHT)
        res = ml_estimate(obs)
        assert np.linalg.norm(res.position - ue) < 1e-3

    def test_final_cost_not_above_initial(self, rng):
        sats, ue = clustered_constellation(rng)
        obs = simulate_observations(ue, sats, TIGHT, CARRIER, rng)
        start = ue + np.array([2000.0, 1500.0, -800.0])
        c0, _ = nll(start, obs)
        res = ml_estimate(obs, init=start)
        assert res.cost <= c0 + 1e-9

    def test_multistart_grid_layout(self, rng):
        sats, ue = clustered_constellation(rng)
        obs = simulate_observations(ue, sats, TIGHT, CARRIER, rng)
        starts = default_multistart_grid(obs, half_span_m=50e3, n=3)
        assert len(starts) == 9
        from leo_ipac.constants import R_EARTH

        for s in starts:
            assert np.linalg.norm(s) == pytest.approx(R_EARTH, rel=1e-12)

    def test_translation_equivariance_delay_doppler(self, rng):
        # delay and Doppler depend only on relative geometry; shifting
        # satellites and observations together shifts the estimate
        from dataclasses import replace

        sats, ue = clustered_constellation(rng)
        noise = ObservationNoise(var_delay=(3e-9) ** 2, var_doppler=200.0**2)
        obs = simulate_observations(ue, sats, noise, CARRIER, rng)
        res = ml_estimate(obs, init=ue)

        shift = np.array([20e3, -15e3, 10e3])
        shifted_sats = [
            SatelliteState(s.sat_id, s.position + shift, s.velocity) for s in sats
        ]
        obs_shift = replace(obs, assumed_sats=shifted_sats)
        res_shift = ml_estimate(obs_shift, init=ue + shift)
        assert np.allclose(res_shift.position, res.position + shift, atol=1e-3)


class TestOrbitMismatch:
    def test_zero_magnitude_identity(self, rng):
        sats, _ = clustered_constellation(rng)
        out = apply_orbit_mismatch(sats, 0.0, rng)
        assert all(a is b for a, b in zip(out, sats))

    def test_exact_shift_magnitude(self, rng):
        sats, _ = clustered_constellation(rng)
        out = apply_orbit_mismatch(sats, 5000.0, rng)
        for a, b in zip(out, sats):
            assert np.linalg.norm(a.position - b.position) == pytest.approx(
                5000.0, rel=1e-12
            )
            assert np.array_equal(a.velocity, b.velocity)

    def test_negative_magnitude_rejected(self, rng):
        sats, _ = clustered_constellation(rng)
        with pytest.raises(ValueError):
            apply_orbit_mismatch(sats, -1.0, rng)


class TestGridNoise:
    def test_proportional_scaling(self, scenario):
        coarse = grid_observation_noise(scenario, max(scenario.delay_sigma_grid_ns))
        fine = grid_observation_noise(scenario, max(scenario.delay_sigma_grid_ns) / 10)
        assert np.allclose(fine.variances(), coarse.variances() / 100.0, rtol=1e-9)

    def test_reference_values_at_coarsest_point(self, scenario):
        coarse = grid_observation_noise(scenario, max(scenario.delay_sigma_grid_ns))
        assert np.sqrt(coarse.var_doppler) == pytest.approx(
            scenario.doppler_sigma_ref_hz, rel=1e-12
        )
        assert np.sqrt(coarse.var_az) == pytest.approx(
            scenario.aod_sigma_ref_rad, rel=1e-12
        )


class TestRmseSweep:
    def test_matched_rmse_tracks_crb(self, scenario):
        from leo_ipac.scenario import scenario_constellation

        sats = scenario_constellation(scenario)
        _, _, rmse, crb = rmse_point(scenario, sats, 0, 0, trials=100, seed=3)
        assert 0.7 <= rmse / crb <= 1.6

    def test_mismatch_raises_the_floor(self, scenario):
        from leo_ipac.scenario import scenario_constellation

        sats = scenario_constellation(scenario)
        _, _, rmse_matched, _ = rmse_point(scenario, sats, 0, 0, trials=60, seed=3)
        _, _, rmse_mismatched, _ = rmse_point(scenario, sats, 2, 0, trials=60, seed=3)
        assert rmse_mismatched > 3 * rmse_matched

    def test_point_determinism(self, scenario):
        from leo_ipac.scenario import scenario_constellation

        sats = scenario_constellation(scenario)
        a = rmse_point(scenario, sats, 1, 2, trials=10, seed=9)
        b = rmse_point(scenario, sats, 1, 2, trials=10, seed=9)
        assert a == b

    def test_sweep_shape_and_worker_invariance(self, scenario):
        rows1 = rmse_sweep(scenario, trials=3, seed=5, workers=1)
        rows2 = rmse_sweep(scenario, trials=3, seed=5, workers=2)
        n_expected = len(scenario.mismatch_levels_m) * len(scenario.delay_sigma_grid_ns)
        assert len(rows1) == n_expected
        assert rows1 == rows2
        assert all(r[4] == 3 for r in rows1)


def test_matched_crb_positive(rng):
    sats, ue = clustered_constellation(rng)
    assert matched_crb(sats, ue, TIGHT, CARRIER) > 0
