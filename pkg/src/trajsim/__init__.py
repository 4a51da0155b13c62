"""Online trajectory simulator.

Projected gradient ascent over time-varying utilities with per-slot step
sizes that keep every move feasible, plus offline benchmarks, a brute-force
oracle, scalar regret metrics, and reproducible CSV trace emission.
"""

from .engine import (
    EngineState,
    NoiseModel,
    StepRecord,
    ioga_lookahead_step,
    ioga_step,
    noisy_gradient,
    run_episode,
)
from .field import (
    AwayFromGoalSpec,
    FieldPerturbation,
    GyreSpec,
    UniformSpec,
    VelocityField,
    load_field,
    perturb_field,
    sample_velocity,
    synth_field,
    zero_field,
)
from .metrics import (
    GradientVariation,
    OfflineProblem,
    OracleGrid,
    RegretReport,
    UtilitySequence,
    build_regret_report,
    cumulative_error,
    dp_oracle,
    energy_conserved,
    energy_cost,
    gradient_variation,
    regret,
    solve_offline,
    squared_path_length,
    straight_line_trajectory,
)
from .objectives import (
    alpha_schedule,
    d2d_gradient,
    d2d_step_size,
    d2d_utility,
    directional_weight,
    huber_value,
    lambda_direction,
    lambda_increasing,
    leading_path,
    ocean_gradient,
    ocean_step_size,
    ocean_utility,
    rate,
)
from .scenarios import (
    AdversaryParams,
    EpisodeReport,
    PathSpec,
    ScenarioConfig,
    SweepRow,
    run_adversary,
    run_d2d,
    run_ocean,
    run_scenario,
    sweep,
)
from .sets import (
    Ball2D,
    Box2D,
    ConvexPolygon2D,
    PointIn,
    StepCap,
    constraint_violation,
    dykstra_project,
    project_ball,
    project_box,
    project_polygon,
)
from .config import RunManifest, config_hash, parse_config
from .traces import emit_summary, emit_trace, read_summary, read_trace

__version__ = "0.1.0"
