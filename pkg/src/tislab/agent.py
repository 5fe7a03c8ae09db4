"""Agents: expected ability, the realized solving function and time per subgoal.

Expected ability decays exponentially with the distance between the
agent's expertise vector and the goal's feature vector (surprisal).  The
realized gain at a node saturates in ability::

    U = min(u_hat, u_hat * Q / (Q + u_hat) * (1 - env_penalty) + eps)

with ``eps ~ Normal(0, noise_sigma)``, so gains may be negative but never
exceed the node's potential information.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class Agent:
    expertise: tuple = (0.0, 0.0)
    base_ability: float = 4.0
    kappa: float = 0.0
    noise_sigma: float = 0.0
    env_penalty: float = 0.0
    planning_horizon: int = 0
    replan_period: int = 1

    def __post_init__(self):
        object.__setattr__(self, "expertise", tuple(float(x) for x in self.expertise))
        if not self.base_ability > 0:
            raise ParameterError("base_ability", f"must be > 0, got {self.base_ability}")
        if not self.kappa >= 0:
            raise ParameterError("kappa", "must be >= 0")
        if not self.noise_sigma >= 0:
            raise ParameterError("noise_sigma", "must be >= 0")
        if not 0 <= self.env_penalty < 1:
            raise ParameterError("env_penalty", "must be in [0, 1)")
        if self.planning_horizon < 0:
            raise ParameterError("planning_horizon", "must be >= 0")
        if self.replan_period < 1:
            raise ParameterError("replan_period", "must be >= 1")

    def evolve(self, **changes):
        return replace(self, **changes)


def feature_distance(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionError("goal_features", f"length {y.size} != expertise length {x.size}")
    return float(np.linalg.norm(x - y))


def expected_ability(agent, goal_features):
    """Q = base_ability * exp(-kappa * |x - y|), bits per subgoal."""
    return agent.base_ability * math.exp(-agent.kappa * feature_distance(agent.expertise, goal_features))


def predicted_gain(agent, u_hat, q):
    """Noise-free gain an agent of ability ``q`` expects at a node."""
    if u_hat <= 0:
        return 0.0
    return u_hat * (q / (q + u_hat)) * (1.0 - agent.env_penalty)


def realized_gain(agent, node, goal_features, rng, q=None):
    """Draw the information actually gained at ``node``.

    ``q`` may be passed to skip recomputing expected ability.  One standard
    normal is consumed per call regardless of ``noise_sigma``, keeping noise
    streams aligned across agents that differ only in noise level.
    """
    if q is None:
        q = expected_ability(agent, goal_features)
    z = rng.standard_normal()
    return min(node.u_hat, predicted_gain(agent, node.u_hat, q) + agent.noise_sigma * z)


def elapsed_time(agent, node, q=None):
    """Time spent on a subgoal: u_hat / Q.

    Without ``q`` the agent's base ability is used (no surprisal).
    """
    if q is None:
        q = agent.base_ability
    return node.u_hat / q
