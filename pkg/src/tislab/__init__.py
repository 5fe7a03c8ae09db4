"""Goal networks, solving and planning agents, intelligence indices and selection dynamics."""
__version__ = "0.1.0"

from .agent import Agent, expected_ability, predicted_gain, realized_gain
from .metrics import MetricsReport, intelligence, score_run
from .network import GeneratorParams, GoalNetwork, SubgoalNode, generate_network, validate_network
from .oracle import max_info_path, min_info_complete_path, optimal_planning_path
from .policies import PolicyKind, StopReason, Trajectory, run_policy
from .proxy import ProxyModel, proxy_intelligence

__all__ = [
    "Agent", "GeneratorParams", "GoalNetwork", "MetricsReport", "PolicyKind", "ProxyModel",
    "StopReason", "SubgoalNode", "Trajectory", "expected_ability", "generate_network", "intelligence",
    "max_info_path", "min_info_complete_path", "optimal_planning_path", "predicted_gain",
    "proxy_intelligence", "realized_gain", "run_policy", "score_run", "validate_network",
]
