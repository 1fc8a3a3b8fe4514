"""Indoor UAV search-and-rescue simulation with RSS-driven Q-learning."""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    InvalidStartError,
    InvalidTrajectoryError,
    NoActionAvailableError,
    NonTerminationError,
    ParseError,
    QTableMismatchError,
    SarsimError,
    StateUniquenessError,
    UnknownStateError,
    ValidationError,
)
from .geometry import Action, FloorPlan, Position, Wall, step_distance
from .propagation import (
    AntennaPattern,
    PropagationParams,
    RssMap,
    antenna_gain,
    build_rss_map,
    free_space_path_loss,
    rss_at,
    rss_threshold_for_distance,
)
from .agent import (
    Hyperparams,
    QTable,
    StateSpace,
    greedy_policy,
    q_update,
    select_action,
    value_iteration_oracle,
)
from .episode import (
    EpisodeResult,
    Outcome,
    SearchEnv,
    TrainingLog,
    build_environment,
    evaluate,
    is_terminal,
    reward,
    run_episode,
    train,
)
from .metrics import (
    episodes_to_first_rescue,
    flight_time,
    trajectory_length,
    trajectory_stats,
    write_outputs,
)
from .scenario import ScenarioConfig, bundled_scenario_path, parse_scenario

__all__ = [
    "Action",
    "AntennaPattern",
    "DomainError",
    "EpisodeResult",
    "FloorPlan",
    "Hyperparams",
    "InvalidStartError",
    "InvalidTrajectoryError",
    "NoActionAvailableError",
    "NonTerminationError",
    "Outcome",
    "ParseError",
    "Position",
    "PropagationParams",
    "QTable",
    "QTableMismatchError",
    "RssMap",
    "SarsimError",
    "ScenarioConfig",
    "SearchEnv",
    "StateSpace",
    "StateUniquenessError",
    "TrainingLog",
    "UnknownStateError",
    "ValidationError",
    "Wall",
    "antenna_gain",
    "build_environment",
    "build_rss_map",
    "bundled_scenario_path",
    "episodes_to_first_rescue",
    "evaluate",
    "flight_time",
    "free_space_path_loss",
    "greedy_policy",
    "is_terminal",
    "parse_scenario",
    "q_update",
    "reward",
    "rss_at",
    "rss_threshold_for_distance",
    "run_episode",
    "select_action",
    "step_distance",
    "train",
    "trajectory_length",
    "trajectory_stats",
    "value_iteration_oracle",
    "write_outputs",
]
