"""Exact optimal-path queries on goal networks.

Three different notions of an optimal start-to-terminal walk are needed:

* :func:`max_info_path` maximizes total potential information;
* :func:`min_info_complete_path` minimizes it among goal-complete walks
  (the intrinsic complexity of the goal);
* :func:`optimal_planning_path` minimizes information per node among
  goal-complete walks.

All three use dynamic programming over the DAG and break ties by fewer
nodes, then the lexicographically smallest id sequence.  A walk ends at
the first terminal it reaches.  :func:`enumerate_all_paths` is the
brute-force enumerator used to verify them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CapacityError, InfeasibleError
from .network import is_complete

_NEAR = 1e-9


@dataclass(frozen=True)
class OracleResult:
    path: tuple
    total_info: float
    normalized_info: float
    complete: bool

    def to_dict(self):
        return {"path": list(self.path), "total_info": self.total_info,
                "normalized_info": self.normalized_info, "complete": self.complete}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["path"]), float(d["total_info"]), float(d["normalized_info"]),
                   bool(d["complete"]))


def path_total(net, path):
    return math.fsum(net.nodes[v].u_hat for v in path)


def make_result(net, path):
    path = tuple(path)
    total = path_total(net, path)
    sum_r = sum(net.nodes[v].r for v in path)
    return OracleResult(path, total, total / len(path), is_complete(sum_r, len(path)))


# labels are (total, sum_r, length, node, parent_label)

def _label_path(label):
    out = []
    while label is not None:
        out.append(label[3])
        label = label[4]
    return tuple(reversed(out))


def _exact_total(net, label):
    return path_total(net, _label_path(label))


def _cmp_totals(net, a, b):
    """Compare label totals; exact summation only when floats are near-equal."""
    ta, tb = a[0], b[0]
    if abs(ta - tb) > _NEAR * max(1.0, abs(ta), abs(tb)):
        return (ta > tb) - (ta < tb)
    ea, eb = _exact_total(net, a), _exact_total(net, b)
    return (ea > eb) - (ea < eb)


def _tiebreak(a, b):
    """Fewer nodes first, then lexicographic ids; negative if ``a`` wins."""
    if a[2] != b[2]:
        return a[2] - b[2]
    pa, pb = _label_path(a), _label_path(b)
    return (pa > pb) - (pa < pb)


def _require_order(net):
    order = net.topological_order()
    if order is None:
        raise InfeasibleError("network contains a cycle")
    return order


def max_info_path(net):
    """Start-to-terminal walk maximizing the summed potential information."""
    order = _require_order(net)
    u = net.u_hat.tolist()
    best = {net.start: (u[net.start], net.nodes[net.start].r, 1, net.start, None)}
    terminals = net.terminal_set

    def better(a, b):
        c = _cmp_totals(net, a, b)
        return c > 0 or (c == 0 and _tiebreak(a, b) < 0)

    for v in order:
        lab = best.get(v)
        if lab is None or v in terminals:
            continue
        for w in net.successors[v]:
            cand = (lab[0] + u[w], 0.0, lab[2] + 1, w, lab)
            cur = best.get(w)
            if cur is None or better(cand, cur):
                best[w] = cand
    ends = [best[t] for t in net.terminals if t in best]
    if not ends:
        raise InfeasibleError("no terminal reachable from start")
    winner = ends[0]
    for lab in ends[1:]:
        if better(lab, winner):
            winner = lab
    return make_result(net, _label_path(winner))


def _raise_bound(net, order):
    """Largest possible future increase of sum(r - 1) after each node."""
    bound = [0.0] * len(net.nodes)
    for v in reversed(order):
        if v in net.terminal_set:
            continue
        best = 0.0
        for w in net.successors[v]:
            best = max(best, max(0.0, net.nodes[w].r - 1.0) + bound[w])
        bound[v] = best
    return bound


def _complete_labels(net):
    """All non-dominated complete start-to-terminal labels, one per (sum_r, length)."""
    order = _require_order(net)
    u = net.u_hat.tolist()
    r = net.relevance.tolist()
    bound = _raise_bound(net, order)
    terminals = net.terminal_set
    labels = {v: {} for v in range(len(net.nodes))}

    def offer(v, lab):
        if lab[1] - lab[2] + bound[v] < -1e-6:
            return  # relevance deficit can never be recovered
        key = (lab[1], lab[2])
        cur = labels[v].get(key)
        if cur is None:
            labels[v][key] = lab
            return
        c = _cmp_totals(net, lab, cur)
        if c < 0 or (c == 0 and _tiebreak(lab, cur) < 0):
            labels[v][key] = lab

    s = net.start
    offer(s, (u[s], r[s], 1, s, None))
    for v in order:
        if v in terminals:
            continue
        for lab in list(labels[v].values()):
            for w in net.successors[v]:
                offer(w, (lab[0] + u[w], lab[1] + r[w], lab[2] + 1, w, lab))
    out = []
    for t in net.terminals:
        out.extend(lab for lab in labels[t].values() if is_complete(lab[1], lab[2]))
    return out


def _pick(net, labels, ratio):
    if not labels:
        raise InfeasibleError("no goal-complete path exists")

    def key_cmp(a, b):
        if ratio:
            ta, tb = a[0] / a[2], b[0] / b[2]
            if abs(ta - tb) <= _NEAR * max(1.0, abs(ta), abs(tb)):
                ta, tb = _exact_total(net, a) / a[2], _exact_total(net, b) / b[2]
            c = (ta > tb) - (ta < tb)
        else:
            c = _cmp_totals(net, a, b)
        if c:
            return c
        return _tiebreak(a, b)

    winner = labels[0]
    for lab in labels[1:]:
        if key_cmp(lab, winner) < 0:
            winner = lab
    return make_result(net, _label_path(winner))


def min_info_complete_path(net):
    """Goal-complete walk with the least total information (intrinsic complexity)."""
    return _pick(net, _complete_labels(net), ratio=False)


def optimal_planning_path(net):
    """Goal-complete walk with the least information per node."""
    return _pick(net, _complete_labels(net), ratio=True)


def enumerate_all_paths(net, cap=100_000):
    """Every start-to-terminal walk in lexicographic order.

    Raises :class:`CapacityError` as soon as more than ``cap`` walks exist.
    """
    if net.topological_order() is None:
        raise InfeasibleError("network contains a cycle")
    out = []
    terminals = net.terminal_set
    stack = [(net.start,)]
    while stack:
        path = stack.pop()
        v = path[-1]
        if v in terminals:
            out.append(path)
            if len(out) > cap:
                raise CapacityError(f"more than {cap} start-to-terminal walks")
            continue
        for w in reversed(net.successors[v]):
            stack.append(path + (w,))
    return out


def brute_force_oracles(net, cap=100_000):
    """The three oracle results computed by exhaustive enumeration."""
    paths = enumerate_all_paths(net, cap)
    if not paths:
        raise InfeasibleError("no terminal reachable from start")
    keyed = [(path_total(net, p), len(p), p) for p in paths]
    best_max = min(keyed, key=lambda k: (-k[0], k[1], k[2]))
    complete = [k for k in keyed if is_complete(sum(net.nodes[v].r for v in k[2]), k[1])]
    if not complete:
        return make_result(net, best_max[2]), None, None
    best_min = min(complete, key=lambda k: (k[0], k[1], k[2]))
    best_norm = min(complete, key=lambda k: (k[0] / k[1], k[1], k[2]))
    return make_result(net, best_max[2]), make_result(net, best_min[2]), make_result(net, best_norm[2])


def max_info_walk(net, sources, max_nodes):
    """Most informative walk of at most ``max_nodes`` nodes beginning at one of ``sources``.

    Walks stop at terminals but need not reach one.  Used as the optimal
    sequence for a single planning segment.
    """
    if max_nodes < 1 or not sources:
        raise InfeasibleError("empty walk request")
    u = net.u_hat.tolist()
    terminals = net.terminal_set
    memo = {}

    def best(v, k):
        # returns (total, length, path) with ties: fewer nodes, then lexicographic
        key = (v, k)
        if key in memo:
            return memo[key]
        res = (u[v], 1, (v,))
        if k > 1 and v not in terminals:
            for w in net.successors[v]:
                t, n, p = best(w, k - 1)
                cand = (u[v] + t, n + 1, (v,) + p)
                if _walk_better(net, cand, res):
                    res = cand
        memo[key] = res
        return res

    winner = None
    for s in sorted(sources):
        cand = best(s, max_nodes)
        if winner is None or _walk_better(net, cand, winner):
            winner = cand
    return make_result(net, winner[2])


def _walk_better(net, a, b):
    ta, tb = a[0], b[0]
    if abs(ta - tb) <= _NEAR * max(1.0, abs(ta), abs(tb)):
        ta, tb = path_total(net, a[2]), path_total(net, b[2])
    if ta != tb:
        return ta > tb
    return (a[1], a[2]) < (b[1], b[2])


def segment_oracles(net, traj):
    """One optimal-sequence result per planning segment of ``traj``.

    The first segment competes against walks from the start node; later
    segments against walks from any successor of the node visited just
    before the segment, with the same number of nodes as were executed.
    """
    out = []
    visits = traj.visits
    bounds = [seg.start_index for seg in traj.plan_segments] + [len(visits)]
    for seg, lo, hi in zip(traj.plan_segments, bounds, bounds[1:]):
        length = hi - lo
        if length <= 0:
            continue
        if lo == 0:
            sources = (net.start,)
        else:
            sources = net.successors[visits[lo - 1].node]
        out.append(max_info_walk(net, sources, length))
    return out


def max_relevance_weighted_path(net, weights, cap=100_000):
    """Brute-force start-to-terminal walk maximizing ``sum(r * w) / len`` over its non-start nodes.

    ``weights[v]`` is the planner's predicted gain at node ``v``.  Ties go to
    the lexicographically smallest walk.  This is the reference a planner
    with unlimited horizon must reproduce.
    """
    best = None
    for p in enumerate_all_paths(net, cap):
        tail = p[1:]
        score = (sum(net.nodes[v].r * weights[v] for v in tail) / len(tail)) if tail else 0.0
        key = (-score, tail)
        if best is None or key < best[0]:
            best = (key, p)
    if best is None:
        raise InfeasibleError("no terminal reachable from start")
    return best[1]
