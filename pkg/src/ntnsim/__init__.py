"""
ntnsim: Monte Carlo simulator and cost analyzer for IoT uplink
connectivity through HAPS, LEO satellite, and terrestrial gateways
sharing one LR-FHSS random-access uplink.

Layers, bottom up:

    geometry   device/BS deployment, HAPS line of sight
    orbit      satellite pass (lap) statistics and positions
    channel    path loss, shadowing, shadowed-Rice fading
    lrfhss     frame structure, traffic, collisions, decode rules
    metrics    erasure/success aggregation and plot-ready exports
    cost       discounted total cost of ownership
    engine     vectorized batch runs
    runner     experiment campaigns, parallel pool, CSV/JSON outputs
    cli        the `sim` command
"""

from ._version import __version__
from .channel import (
    LinkBudgetConfig,
    NtnFadingParams,
    TerrestrialChannelConfig,
    fspl_db,
    received_power_dbm,
    sample_ntn_fading,
    shadowed_rice_params,
    terrestrial_pathloss_db,
)
from .config import SimulationConfig, build_config, config_hash, load_config
from .cost import (
    CostModel,
    CostParameters,
    annuity_factor,
    crossover_devices,
    npv_total,
    scenario_costs,
)
from .engine import RunResult, simulate_erasure_run, simulate_success_run, trace_run
from .errors import (
    ConfigError,
    NtnSimError,
    ParameterRangeError,
    PlacementInfeasibleError,
    SimulationError,
)
from .geometry import (
    BasestationLayout,
    HapsConfig,
    RegionConfig,
    deploy_basestations,
    deploy_devices,
    guard_bs_count,
    haps_distance,
    haps_elevation,
)
from .lrfhss import (
    LrfhssConfig,
    PacketDecision,
    TransmissionRecord,
    UnitOutcome,
    decode_packet,
    detect_collisions,
    evaluate_links,
    fragment_count,
    generate_hop_sequence,
    schedule_traffic,
    time_on_air,
)
from .metrics import (
    ErasureSample,
    SuccessPoint,
    build_heatmap,
    distribution_summary,
    erasure_probability,
    radial_profile,
    success_statistics,
)
from .orbit import (
    LapSequence,
    OrbitConfig,
    derive_constants,
    lap_cdf,
    lap_pdf,
    sample_lap,
    sample_lap_duration,
    satellite_state,
)
from .runner import (
    ScenarioSpec,
    run_cost_report,
    run_erasure_experiment,
    run_orbit_trace,
    run_stream,
    run_success_experiment,
)
from .scenario import GatewaySet, LeoContext, build_gateway_set, parse_scenario

__all__ = [name for name in dir() if not name.startswith("_")]
