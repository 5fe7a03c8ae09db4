"""Solving, planning, intelligence and difficulty indices computed from trajectories.

Every function here is pure.  Information quantities are in bits and every
index is a dimensionless ratio.  Notation used in the docstrings:

``U``   realized gain at a visited node
``Uh``  potential information at a visited node
``Ut``  potential information along an optimal sequence
``r``   relevance of a node to goal completion
``N``, ``G``  node counts of the chosen and optimal sequences
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .errors import DomainError, ParameterError, PreconditionError
from .network import RELEVANCE_TOL
from .policies import Trajectory


def _visits(traj):
    return traj.visits if isinstance(traj, Trajectory) else tuple(traj)


def solving_index(traj):
    """(1/N) * sum(U / Uh)."""
    visits = _visits(traj)
    if not visits:
        raise PreconditionError("solving index needs a non-empty trajectory")
    total = 0.0
    for v in visits:
        if v.u_hat == 0:
            raise DomainError(f"node {v.node} has u_hat = 0")
        total += v.u_realized / v.u_hat
    return total / len(visits)


def relevance_condition_holds(traj):
    visits = _visits(traj)
    return not visits or sum(v.r for v in visits) / len(visits) <= 1 + RELEVANCE_TOL


def solving_index_weighted(traj):
    """(1/N) * sum(r * U / Uh), defined only when sum(r)/N <= 1."""
    visits = _visits(traj)
    if not visits:
        raise PreconditionError("solving index needs a non-empty trajectory")
    if not relevance_condition_holds(visits):
        ratio = sum(v.r for v in visits) / len(visits)
        raise PreconditionError(f"relevance condition violated: sum(r)/N = {ratio:g} > 1")
    total = 0.0
    for v in visits:
        if v.u_hat == 0:
            raise DomainError(f"node {v.node} has u_hat = 0")
        total += v.r * v.u_realized / v.u_hat
    return total / len(visits)


def realized_complexity(traj):
    """X = sum(r * U), in bits; not normalized."""
    return sum(v.r * v.u_realized for v in _visits(traj))


def segment_terms(traj, oracle_per_segment):
    """Per-segment ratios sum(Uh over the segment) / sum(Ut over its optimal walk)."""
    visits = _visits(traj)
    segs = traj.plan_segments
    if not segs:
        raise PreconditionError("trajectory has no plan segments")
    bounds = [s.start_index for s in segs] + [len(visits)]
    spans = [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    if len(oracle_per_segment) != len(spans):
        raise ParameterError("oracle_per_segment",
                             f"need {len(spans)} segment oracles, got {len(oracle_per_segment)}")
    terms = []
    for (lo, hi), opt in zip(spans, oracle_per_segment):
        num = math.fsum(v.u_hat for v in visits[lo:hi])
        if opt.total_info == 0:
            terms.append(1.0 if num == 0 else math.inf)
        else:
            terms.append(num / opt.total_info)
    return terms


def planning_index_hier(traj, oracle_per_segment):
    """Hierarchical planning: sum over segments of chosen over optimal information."""
    return sum(segment_terms(traj, oracle_per_segment))


def planning_ratio_global(traj, opt):
    """Unclamped (sum(Uh)/N) / (sum(Ut)/G)."""
    visits = _visits(traj)
    if not visits:
        raise PreconditionError("empty trajectory")
    if opt.normalized_info <= 0:
        raise DomainError("optimal path carries no information")
    chosen = math.fsum(v.u_hat for v in visits) / len(visits)
    return chosen / opt.normalized_info


def planning_index_global(traj, opt, with_flag=False):
    """One-shot planning index, clamped to [0, 1].

    ``opt`` must be the optimal planning path.  Because that path minimizes
    the denominator, chosen paths can exceed it; the ratio is then clamped
    and, with ``with_flag``, a second return value reports the clamp.
    """
    if not opt.complete:
        raise PreconditionError("optimal planning path must be goal-complete")
    raw = planning_ratio_global(traj, opt)
    value = min(1.0, max(0.0, raw))
    if with_flag:
        return value, raw > 1.0
    return value


def solving_index_optimal(opt_traj):
    """(1/G) * sum(U / Ut) along the optimal path."""
    return solving_index(opt_traj)


def planning_index_solve(traj, opt_traj):
    """Weighted solving of ``traj`` relative to solving along the optimal path."""
    opt_visits = _visits(opt_traj)
    g = len(opt_visits)
    if g == 0 or abs(sum(v.r for v in opt_visits) / g - 1.0) > 1e-9:
        raise PreconditionError("optimal trajectory must be goal-complete (sum(r)/G = 1)")
    denom = solving_index_optimal(opt_visits)
    if denom == 0:
        raise DomainError("solving along the optimal path is zero; ratio undefined")
    return solving_index_weighted(traj) / denom


def _check_weights(alpha, beta):
    if alpha < 0 or beta < 0 or abs(alpha + beta - 1.0) > 1e-9:
        raise ParameterError("alpha", f"need alpha, beta >= 0 with alpha + beta = 1, got {alpha}, {beta}")


def intelligence_from_indices(u_r, a_global, alpha=0.5, beta=0.5):
    _check_weights(alpha, beta)
    return u_r * (alpha + beta * a_global)


def intelligence(traj, opt, alpha=0.5, beta=0.5):
    """I = weighted solving * (alpha + beta * clamped one-shot planning index)."""
    _check_weights(alpha, beta)
    return intelligence_from_indices(solving_index_weighted(traj), planning_index_global(traj, opt),
                                     alpha, beta)


def difficulty(complexity_c, ability_q):
    """D = C / Q; above 1 the goal is difficult for the agent."""
    if not ability_q > 0:
        raise DomainError(f"ability must be > 0, got {ability_q}")
    return complexity_c / ability_q


def intelligence_difficulty(d, i, q):
    """Achievement relative to difficulty: D * I / Q."""
    if not q > 0:
        raise DomainError(f"ability must be > 0, got {q}")
    return d * i / q


def intelligence_benchmarked(c, i, q_bench):
    """C * I / Qbench**2, with the population-mean ability as benchmark."""
    if not q_bench > 0:
        raise DomainError(f"benchmark ability must be > 0, got {q_bench}")
    # same operation order as D * I / Q, so q_bench = Q reproduces it bit for bit
    return (c / q_bench) * i / q_bench


def time_normalized_solving(traj):
    """(1/N) * sum((U / t) / Uh)."""
    visits = _visits(traj)
    if not visits:
        raise PreconditionError("empty trajectory")
    total = 0.0
    for v in visits:
        if not v.t_elapsed > 0:
            raise DomainError(f"node {v.node}: elapsed time {v.t_elapsed} is not positive")
        if v.u_hat == 0:
            raise DomainError(f"node {v.node} has u_hat = 0")
        total += (v.u_realized / v.t_elapsed) / v.u_hat
    return total / len(visits)


@dataclass(frozen=True)
class MetricsReport:
    solving_u: float
    solving_u_r: float
    realized_complexity_x: float
    planning_a_hier: float
    planning_a_global: float
    planning_a_solve: float | None
    intelligence_i: float
    difficulty_d: float
    intelligence_hat: float
    intelligence_bench: float | None
    alpha: float
    beta: float
    time_normalized_u: float | None
    planning_a_global_raw: float
    planning_a_global_clamped: bool
    complexity_c: float
    ability_q: float
    intelligence_proxy: float | None = None

    def to_dict(self):
        return asdict(self)

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def csv_row(self):
        return [_csv_value(getattr(self, c)) for c in self.columns()]


def _csv_value(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def score_run(net, traj, opt_traj, q, *, alpha=0.5, beta=0.5, q_bench=None, proxy=None,
              oracles=None):
    """Every index for one trajectory.

    ``opt_traj`` is the same agent walking the optimal planning path (same
    seed, so the same noise draws); ``q`` is the agent's expected ability.
    ``oracles`` may carry precomputed ``optimal``/``complexity`` results.
    """
    from .oracle import min_info_complete_path, optimal_planning_path, segment_oracles
    from .proxy import proxy_intelligence

    oracles = oracles or {}
    opt = oracles.get("optimal") or optimal_planning_path(net)
    cmin = oracles.get("complexity") or min_info_complete_path(net)
    u_r = solving_index_weighted(traj)
    a_glob, clamped = planning_index_global(traj, opt, with_flag=True)
    i = intelligence_from_indices(u_r, a_glob, alpha, beta)
    c = cmin.total_info
    d = difficulty(c, q)
    try:
        tnu = time_normalized_solving(traj)
    except DomainError:
        tnu = None
    try:
        a_solve = planning_index_solve(traj, opt_traj)
    except (PreconditionError, DomainError):
        # the optimal walk was cut short (threshold or budget) or solved nothing
        a_solve = None
    return MetricsReport(
        solving_u=solving_index(traj),
        solving_u_r=u_r,
        realized_complexity_x=realized_complexity(traj),
        planning_a_hier=planning_index_hier(traj, segment_oracles(net, traj)),
        planning_a_global=a_glob,
        planning_a_solve=a_solve,
        intelligence_i=i,
        difficulty_d=d,
        intelligence_hat=intelligence_difficulty(d, i, q),
        intelligence_bench=None if q_bench is None else intelligence_benchmarked(c, i, q_bench),
        alpha=alpha,
        beta=beta,
        time_normalized_u=tnu,
        planning_a_global_raw=planning_ratio_global(traj, opt),
        planning_a_global_clamped=clamped,
        complexity_c=c,
        ability_q=q,
        intelligence_proxy=None if proxy is None else proxy_intelligence(c, q, i, proxy),
    )


def prefix_series(traj, opt):
    """Per-step (weighted solving, raw one-shot planning ratio) over growing prefixes."""
    visits = _visits(traj)
    out = []
    acc_s = 0.0
    acc_u = 0.0
    for k, v in enumerate(visits, start=1):
        acc_s += v.r * v.u_realized / v.u_hat if v.u_hat else 0.0
        acc_u += v.u_hat
        out.append((acc_s / k, (acc_u / k) / opt.normalized_info))
    return out
