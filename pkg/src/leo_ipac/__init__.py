"""Desk-scale LEO integrated positioning and communication simulator."""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    LosGeometry,
    SatelliteState,
    los_geometry,
    max_doppler_and_rate,
    propagate_circular_orbit,
    timing_advance,
)
from .channel import (  # noqa: F401
    ArrayGeometry,
    AttenuationConfig,
    ChannelRealization,
    LinkBudget,
    age_channel,
    draw_rician_channel,
    large_scale_loss,
    perturb_channel_estimate,
    steering_vector,
)
from .beamforming import (  # noqa: F401
    Beamformer,
    LinkResult,
    conjugate_beamformer,
    evaluate_link,
    location_based_beamformer,
    se_sweep,
)
from .fim import (  # noqa: F401
    ObservationNoise,
    RfConfig,
    TxMode,
    crb_sweep,
    effective_sinr,
    observation_noise,
    position_crb,
    position_fim,
    position_jacobian,
)
from .estimator import (  # noqa: F401
    EstimationResult,
    ObservationSet,
    apply_orbit_mismatch,
    ml_estimate,
    nll,
    rmse_sweep,
    simulate_observations,
)
from .scenario import (  # noqa: F401
    ConstellationLayout,
    Scenario,
    build_constellation,
    default_layout,
    load_scenario,
    save_scenario,
    scenario_constellation,
)
from .runner import run_experiment  # noqa: F401
