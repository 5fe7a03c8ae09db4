"""Traversal policies that turn a goal network and an agent into a trajectory.

* ``random_walk``: uniform choice among successors.
* ``greedy_solver``: the successor with the largest predicted one-step gain.
* ``horizon_planner(H, P)``: enumerate walks of up to ``H`` nodes ahead,
  score each by relevance-weighted predicted gain per node, commit to the
  first ``P`` nodes of the best one, then plan again.
* ``oracle_follower``: walk the optimal planning path.

Predictions use the noise-free solving form; realized gains are drawn with
noise on execution.  Choice randomness and execution noise come from
separate substreams of the run seed, so the same seed gives the same noise
sequence whatever the policy.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .agent import elapsed_time, expected_ability, predicted_gain, realized_gain
from .errors import InfeasibleError, ParameterError
from .oracle import max_info_path, optimal_planning_path
from .rng import substream


class StopReason(str, enum.Enum):
    TERMINAL_REACHED = "terminal_reached"
    THRESHOLD_MET = "threshold_met"
    STEP_BUDGET_EXHAUSTED = "step_budget_exhausted"
    DEAD_END = "dead_end"


@dataclass(frozen=True)
class Visit:
    node: int
    u_realized: float
    u_hat: float
    r: float
    t_elapsed: float


@dataclass(frozen=True)
class PlanSegment:
    start_index: int
    planned_path: tuple


@dataclass(frozen=True)
class Trajectory:
    visits: tuple
    plan_segments: tuple
    stop_reason: StopReason

    @property
    def nodes(self):
        return tuple(v.node for v in self.visits)

    def __len__(self):
        return len(self.visits)

    def to_dict(self):
        return {
            "visits": [[v.node, v.u_realized, v.u_hat, v.r, v.t_elapsed] for v in self.visits],
            "plan_segments": [[s.start_index, list(s.planned_path)] for s in self.plan_segments],
            "stop_reason": self.stop_reason.value,
        }

    @classmethod
    def from_dict(cls, d):
        visits = tuple(Visit(int(n), float(u), float(uh), float(r), float(t)) for n, u, uh, r, t in d["visits"])
        segs = tuple(PlanSegment(int(i), tuple(int(x) for x in p)) for i, p in d["plan_segments"])
        return cls(visits, segs, StopReason(d["stop_reason"]))


@dataclass(frozen=True)
class PolicyKind:
    variant: str
    horizon: int = 0
    replan_period: int = 1

    VARIANTS = ("random_walk", "greedy_solver", "horizon_planner", "oracle_follower")

    def __post_init__(self):
        if self.variant not in self.VARIANTS:
            raise ParameterError("policy", f"unknown variant {self.variant!r}")
        if self.variant == "horizon_planner":
            if self.horizon < 1:
                raise ParameterError("horizon", "planner horizon must be >= 1")
            if self.replan_period < 1:
                raise ParameterError("replan_period", "must be >= 1")

    @classmethod
    def random_walk(cls):
        return cls("random_walk")

    @classmethod
    def greedy(cls):
        return cls("greedy_solver")

    @classmethod
    def planner(cls, horizon, replan_period=1):
        return cls("horizon_planner", int(horizon), int(replan_period))

    @classmethod
    def oracle(cls):
        return cls("oracle_follower")

    @classmethod
    def for_agent(cls, agent):
        """Greedy for a pure solver, otherwise a planner with the agent's horizon."""
        if agent.planning_horizon <= 0:
            return cls.greedy()
        return cls.planner(agent.planning_horizon, agent.replan_period)

    @classmethod
    def parse(cls, text):
        """Parse ``random``, ``greedy``, ``oracle`` or ``planner:H[:P]``."""
        head, *rest = text.strip().split(":")
        aliases = {"random": "random_walk", "greedy": "greedy_solver", "oracle": "oracle_follower",
                   "planner": "horizon_planner"}
        variant = aliases.get(head, head)
        if variant == "horizon_planner":
            if not rest:
                raise ParameterError("policy", f"planner needs a horizon: {text!r}")
            try:
                nums = [int(x) for x in rest]
            except ValueError:
                raise ParameterError("policy", f"bad planner variant {text!r}, expected planner:H or planner:H:P") from None
            return cls.planner(nums[0], nums[1] if len(nums) > 1 else 1)
        if rest:
            raise ParameterError("policy", f"{head} takes no parameters: {text!r}")
        return cls(variant)

    @property
    def label(self):
        short = {"random_walk": "random", "greedy_solver": "greedy", "oracle_follower": "oracle"}
        if self.variant == "horizon_planner":
            return f"planner:{self.horizon}:{self.replan_period}"
        return short[self.variant]


@dataclass(frozen=True)
class ThresholdStatus:
    met: bool
    margin: float


def realized_complexity_of(visits):
    return sum(v.r * v.u_realized for v in visits)


def stopping_check(traj, w):
    """Compare realized complexity X = sum(r * U) with threshold ``w`` (strict)."""
    if w < 0:
        raise ParameterError("w", "threshold must be >= 0")
    visits = traj.visits if isinstance(traj, Trajectory) else traj
    x = realized_complexity_of(visits)
    return ThresholdStatus(x > w, x - w)


def _plan_walk(net, current, horizon, weights):
    """Best walk of up to ``horizon`` nodes from the successors of ``current``.

    Candidates are walks that reach a terminal, a dead end, or the horizon.
    Score is the mean of ``r * predicted gain``; ties go to the
    lexicographically smallest walk.
    """
    terminals = net.terminal_set
    succ = net.successors
    best_key = None
    best_walk = None
    stack = [((w,), weights[w]) for w in reversed(succ[current])]
    while stack:
        walk, acc = stack.pop()
        v = walk[-1]
        if v in terminals or not succ[v] or len(walk) == horizon:
            key = (-(acc / len(walk)), walk)
            if best_key is None or key < best_key:
                best_key, best_walk = key, walk
            continue
        for w in reversed(succ[v]):
            if w not in walk:
                stack.append((walk + (w,), acc + weights[w]))
    return best_walk


def run_policy(net, agent, kind, seed, step_budget=1000):
    """Simulate one traversal; deterministic in all inputs."""
    if step_budget < 1:
        raise ParameterError("step_budget", "must be >= 1")
    noise = substream(seed, "noise")
    choice = substream(seed, "choice")
    q = expected_ability(agent, net.feature_vector)
    nodes = net.nodes
    succ = net.successors
    terminals = net.terminal_set
    w_thr = net.goal_threshold_w

    visits = []
    segments = []
    x = 0.0

    def visit(v):
        nonlocal x
        node = nodes[v]
        u = realized_gain(agent, node, net.feature_vector, noise, q=q)
        visits.append(Visit(v, u, node.u_hat, node.r, elapsed_time(agent, node, q)))
        x += node.r * u

    def stop_after(v):
        if w_thr is not None and x > w_thr:
            return StopReason.THRESHOLD_MET
        if v in terminals:
            return StopReason.TERMINAL_REACHED
        if len(visits) >= step_budget:
            return StopReason.STEP_BUDGET_EXHAUSTED
        if not succ[v]:
            return StopReason.DEAD_END
        return None

    def execute(path, first):
        """Visit ``path`` in order, recording it as one segment."""
        segments.append(PlanSegment(len(visits) - (1 if first else 0),
                                    ((net.start,) if first else ()) + tuple(path)))
        for v in path:
            visit(v)
            reason = stop_after(v)
            if reason is not None:
                return reason
        return None

    visit(net.start)
    reason = stop_after(net.start)
    if reason is not None:
        segments.append(PlanSegment(0, (net.start,)))
        return Trajectory(tuple(visits), tuple(segments), reason)

    if kind.variant == "oracle_follower":
        try:
            path = optimal_planning_path(net).path
        except InfeasibleError:
            path = max_info_path(net).path
        reason = execute(path[1:], first=True)
        return Trajectory(tuple(visits), tuple(segments), reason or StopReason.DEAD_END)

    gain = [predicted_gain(agent, n.u_hat, q) for n in nodes]
    weighted = [n.r * g for n, g in zip(nodes, gain)]
    first = True
    while True:
        cur = visits[-1].node
        options = succ[cur]
        if kind.variant == "random_walk":
            step = (options[int(choice.integers(len(options)))],)
        elif kind.variant == "greedy_solver":
            # max gain, lowest id on ties: options are sorted ascending
            step = (max(options, key=lambda w: (gain[w], -w)),)
        else:
            walk = _plan_walk(net, cur, kind.horizon, weighted)
            step = walk[:kind.replan_period]
        reason = execute(step, first)
        first = False
        if reason is not None:
            return Trajectory(tuple(visits), tuple(segments), reason)
