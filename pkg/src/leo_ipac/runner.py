"""Experiment runner: sweeps to CSV plus a reproducibility sidecar.

Every experiment writes one CSV with a single header line and a ``.meta``
sidecar recording the scenario hash, master seed, and tool version, so a
result file can always be traced back to its exact configuration.
"""
from __future__ import annotations

from pathlib import Path

from . import __version__
from .beamforming import MODE_LOCATION, MODE_OUTDATED, se_sweep
from .channel import large_scale_loss
from .errors import ConfigError
from .estimator import rmse_sweep
from .fim import crb_sweep
from .geometry import los_geometry, max_doppler_and_rate
from .scenario import Scenario, scenario_constellation, scenario_hash

EXPERIMENTS = ("se-sweep", "crb-sweep", "rmse-sweep", "link-budget", "doppler")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_meta(path: Path, scenario: Scenario, seed: int) -> None:
    path.write_text(
        f"scenario_hash = {scenario_hash(scenario)}\n"
        f"seed = {seed}\n"
        f"version = {__version__}\n"
    )


def run_experiment(
    name: str,
    scenario: Scenario,
    out_dir,
    workers: int = 1,
    trials: int | None = None,
    seed: int | None = None,
) -> list[Path]:
    """Run one named experiment and return the written file paths."""
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; expected one of {', '.join(EXPERIMENTS)}"
        )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials = scenario.trials if trials is None else trials
    seed = scenario.seed if seed is None else seed
    stem = name.replace("-", "_")
    csv_path = out_dir / f"{stem}.csv"
    meta_path = out_dir / f"{stem}.meta"

    if name == "se-sweep":
        rows = se_sweep(
            scenario, scenario.err_ratio_grid, MODE_OUTDATED, trials, seed, workers
        )
        rows += se_sweep(
            scenario, scenario.pos_sigma_grid_m, MODE_LOCATION, trials, seed, workers
        )
        _write_csv(csv_path, "mode,error_level,mean_se_bps_hz,stderr", rows)
    elif name == "crb-sweep":
        rows = crb_sweep(
            scenario.crb_n_grid,
            scenario.crb_s_values,
            ("SA-C", "MA-C", "MA-NC"),
            scenario,
        )
        _write_csv(csv_path, "config,S,N,crb_m", rows)
    elif name == "rmse-sweep":
        rows = rmse_sweep(scenario, trials=trials, seed=seed, workers=workers)
        _write_csv(csv_path, "mismatch_m,delay_sigma_ns,rmse_m,crb_m,trials", rows)
    elif name == "link-budget":
        sat = scenario_constellation(scenario, s=1)[0]
        geom = los_geometry(sat, scenario.ue_position, scenario.carrier_hz)
        budget = large_scale_loss(
            geom.range_m,
            geom.elevation_rad,
            scenario.carrier_hz,
            scenario.attenuation,
            rng=None,
        )
        rows = [
            ("free_space", budget.fspl_db),
            ("shadow_fading", budget.shadow_db),
            ("clutter", budget.clutter_db),
            ("atmospheric", budget.atmospheric_db),
            ("scintillation", budget.scintillation_db),
            ("building_penetration", budget.penetration_db),
            ("total", budget.total_db),
        ]
        _write_csv(csv_path, "term,loss_db", rows)
    elif name == "doppler":
        cases = [(scenario.altitude_m, scenario.carrier_hz), (800e3, 30e9)]
        rows = []
        for altitude_m, carrier_hz in cases:
            f_max, rate = max_doppler_and_rate(altitude_m, carrier_hz)
            rows.append((altitude_m, carrier_hz, f_max, rate))
        _write_csv(csv_path, "altitude_m,carrier_hz,max_doppler_hz,max_rate_hz_s", rows)

    _write_meta(meta_path, scenario, seed)
    return [csv_path, meta_path]
