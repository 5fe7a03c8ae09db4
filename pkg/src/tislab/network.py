"""Goals as directed acyclic networks of subgoal nodes.

Each node carries the potential information ``u_hat`` (bits) available at
that subgoal and its relevance ``r`` to goal completion.  A network has a
single start node, a set of terminals, an optional accuracy threshold
``goal_threshold_w`` (bits) and a feature vector describing the goal class.

The module also holds validation, a seeded random generator used by the
experiments, and the ``tis-net v1`` text format.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ParameterError

RELEVANCE_TOL = 1e-12
FORMAT_HEADER = "tis-net v1"


@dataclass(frozen=True)
class SubgoalNode:
    id: int
    u_hat: float
    r: float


@dataclass(frozen=True)
class Violation:
    rule: str
    where: str

    def __str__(self):
        return f"{self.rule} ({self.where})"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self):
        return not self.violations

    @property
    def rules(self):
        return {v.rule for v in self.violations}

    def __bool__(self):
        return self.ok


@dataclass(frozen=True, eq=True)
class GoalNetwork:
    nodes: tuple
    edges: tuple
    start: int = 0
    terminals: tuple = ()
    goal_threshold_w: float | None = None
    feature_vector: tuple = (0.0, 0.0)

    def __post_init__(self):
        # canonical ordering so equality and serialization do not depend on input order
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(sorted({(int(a), int(b)) for a, b in self.edges})))
        object.__setattr__(self, "terminals", tuple(sorted({int(t) for t in self.terminals})))
        object.__setattr__(self, "feature_vector", tuple(float(x) for x in self.feature_vector))

    @classmethod
    def from_arrays(cls, u_hat, r, edges, start=0, terminals=None, goal_threshold_w=None,
                    feature_vector=(0.0, 0.0)):
        """Build a network from parallel ``u_hat``/``r`` lists.

        When ``terminals`` is omitted every node without successors is a terminal.
        """
        nodes = tuple(SubgoalNode(i, float(u), float(rr)) for i, (u, rr) in enumerate(zip(u_hat, r)))
        if terminals is None:
            sources = {a for a, _ in edges}
            terminals = [i for i in range(len(nodes)) if i not in sources]
        return cls(nodes, tuple(edges), start, tuple(terminals), goal_threshold_w, feature_vector)

    def __len__(self):
        return len(self.nodes)

    def __getstate__(self):
        return {k: getattr(self, k) for k in
                ("nodes", "edges", "start", "terminals", "goal_threshold_w", "feature_vector")}

    def __setstate__(self, state):
        for k, v in state.items():
            object.__setattr__(self, k, v)

    @cached_property
    def successors(self):
        succ = [[] for _ in self.nodes]
        for a, b in self.edges:
            if 0 <= a < len(succ) and 0 <= b < len(succ):
                succ[a].append(b)
        return tuple(tuple(sorted(s)) for s in succ)

    @cached_property
    def terminal_set(self):
        return frozenset(self.terminals)

    @cached_property
    def u_hat(self):
        return np.array([n.u_hat for n in self.nodes], dtype=float)

    @cached_property
    def relevance(self):
        return np.array([n.r for n in self.nodes], dtype=float)

    def topological_order(self):
        """Kahn's algorithm with the smallest ready id first; ``None`` if cyclic."""
        import heapq

        indeg = [0] * len(self.nodes)
        for _, b in self.edges:
            indeg[b] += 1
        ready = [i for i, d in enumerate(indeg) if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for w in self.successors[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(ready, w)
        return order if len(order) == len(self.nodes) else None

    def reachable_from(self, source):
        seen = {source}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in self.successors[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen

    def with_threshold(self, w):
        return GoalNetwork(self.nodes, self.edges, self.start, self.terminals, w, self.feature_vector)


def validate_network(net):
    """Check every structural invariant; returns a report instead of raising."""
    out = []
    n = len(net.nodes)
    if n == 0:
        return ValidationReport((Violation("non-empty", "nodes"),))
    for i, node in enumerate(net.nodes):
        if node.id != i:
            out.append(Violation("dense ids", f"node at position {i} has id {node.id}"))
        if not node.u_hat >= 0 or not math.isfinite(node.u_hat):
            out.append(Violation("u_hat >= 0", f"node {node.id}: u_hat={node.u_hat}"))
        if not node.r >= 0 or not math.isfinite(node.r):
            out.append(Violation("r >= 0", f"node {node.id}: r={node.r}"))
    bad_edges = [(a, b) for a, b in net.edges if not (0 <= a < n and 0 <= b < n)]
    for a, b in bad_edges:
        out.append(Violation("edge endpoints", f"edge {a} -> {b}"))
    for a, b in net.edges:
        if a == b:
            out.append(Violation("acyclic", f"self-loop {a} -> {b}"))
    if not 0 <= net.start < n:
        out.append(Violation("start", f"start {net.start} not a node"))
        return ValidationReport(tuple(out))
    if bad_edges:
        return ValidationReport(tuple(out))
    if net.topological_order() is None:
        out.append(Violation("acyclic", "edge relation contains a cycle"))
    reach = net.reachable_from(net.start)
    for i in range(n):
        if i not in reach:
            out.append(Violation("reachable", f"node {i} unreachable from start {net.start}"))
    if not net.terminals:
        out.append(Violation("terminals", "no terminal nodes"))
    for t in net.terminals:
        if not 0 <= t < n:
            out.append(Violation("terminals", f"terminal {t} not a node"))
        elif t not in reach:
            out.append(Violation("terminal reachable", f"terminal {t}"))
    w = net.goal_threshold_w
    if w is not None and not (w >= 0 and math.isfinite(w)):
        out.append(Violation("goal_threshold_w >= 0", f"w={w}"))
    return ValidationReport(tuple(out))


def relevance_ratio(net, path):
    return sum(net.nodes[v].r for v in path) / len(path) if path else 0.0


def validate_path(net, path):
    """Walk constraints plus the relevance condition sum(r)/N <= 1."""
    path = tuple(path)
    out = []
    n = len(net.nodes)
    if not path:
        return ValidationReport((Violation("non-empty", "path"),))
    for v in path:
        if not 0 <= v < n:
            return ValidationReport((Violation("node exists", f"node {v}"),))
    if path[0] != net.start:
        out.append(Violation("start", f"path begins at {path[0]}, start is {net.start}"))
    if len(set(path)) != len(path):
        out.append(Violation("no repeated node", f"path {list(path)}"))
    for a, b in zip(path, path[1:]):
        if b not in net.successors[a]:
            out.append(Violation("edge", f"no edge {a} -> {b}"))
    ratio = relevance_ratio(net, path)
    if ratio > 1 + RELEVANCE_TOL:
        out.append(Violation("relevance condition", f"sum(r)/N = {ratio:g} > 1"))
    return ValidationReport(tuple(out))


def is_complete(sum_r, length):
    """Goal-complete: sum(r)/G equals one."""
    return length > 0 and abs(sum_r - length) <= 1e-9 * length


# -- generator -------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorParams:
    """Parameters of the random goal-network generator.

    ``decoy_fraction`` of the nodes become decoys (r = 0, u_hat drawn above
    the normal range, from ``[u_hat_max, decoy_scale * u_hat_max]``).  The
    remaining nodes form a relevant spine of at least ``min_depth`` nodes plus
    side branches whose relevance is drawn from ``[relevance_budget, 1]``.
    Spine nodes carry r = 1, so the spine is always goal-complete.
    """
    nodes: int = 12
    branching: int = 2
    u_hat_min: float = 1.0
    u_hat_max: float = 8.0
    relevance_budget: float = 1.0
    decoy_fraction: float = 0.0
    decoy_scale: float = 1.5
    min_depth: int = 4
    max_branch_len: int = 3
    skip_prob: float = 0.3
    threshold_w: float | None = None
    features: tuple = (0.0, 0.0)
    feature_spread: float = 0.0

    def check(self):
        if not isinstance(self.nodes, (int, np.integer)) or not 2 <= self.nodes <= 10_000:
            raise ParameterError("nodes", f"must be an integer in [2, 10000], got {self.nodes}")
        if self.branching < 1:
            raise ParameterError("branching", f"must be >= 1, got {self.branching}")
        if not 0 < self.u_hat_min <= self.u_hat_max:
            raise ParameterError("u_hat_min", "need 0 < u_hat_min <= u_hat_max")
        if not 0 < self.relevance_budget <= 1:
            raise ParameterError("relevance_budget", "must be in (0, 1]")
        if not 0 <= self.decoy_fraction <= 1:
            raise ParameterError("decoy_fraction", "must be in [0, 1]")
        if self.decoy_scale < 1:
            raise ParameterError("decoy_scale", "must be >= 1")
        if self.min_depth < 2:
            raise ParameterError("min_depth", "must be >= 2")
        if self.max_branch_len < 1:
            raise ParameterError("max_branch_len", "must be >= 1")
        if not 0 <= self.skip_prob <= 1:
            raise ParameterError("skip_prob", "must be in [0, 1]")
        if self.threshold_w is not None and self.threshold_w < 0:
            raise ParameterError("threshold_w", "must be >= 0")
        if self.feature_spread < 0:
            raise ParameterError("feature_spread", "must be >= 0")


def decoy_count(params):
    n = params.nodes
    want = int(math.floor(params.decoy_fraction * n + 0.5))
    return min(want, n - min(n, params.min_depth))


def _split_branches(total, max_len, capacity, rng):
    lengths = []
    left = total
    while left > 0:
        k = int(rng.integers(1, min(max_len, left) + 1))
        lengths.append(k)
        left -= k
    if len(lengths) > capacity:
        # too many branches for the spine's free out-degree: merge into longer ones
        lengths = [total // capacity + (1 if i < total % capacity else 0) for i in range(capacity)]
        lengths = [k for k in lengths if k > 0]
    return lengths


def generate_network(params, seed):
    """Deterministic random network for ``(params, seed)``."""
    params.check()
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & ((1 << 64) - 1)))
    n = params.nodes
    n_decoy = decoy_count(params)
    n_rel = n - n_decoy
    spine_len = max(min(n_rel, params.min_depth), math.ceil(n_rel / 2), 2)
    n_side = n_rel - spine_len

    # node records: (position, kind, u_hat, r)
    records = []
    for i in range(spine_len):
        records.append([float(i), "spine", float(rng.uniform(params.u_hat_min, params.u_hat_max)), 1.0])
    spine = list(range(spine_len))
    out_free = [params.branching] * spine_len
    out_free[-1] = 0
    edges = [(i, i + 1) for i in range(spine_len - 1)]

    def attach(lengths, kind):
        for k in lengths:
            sources = [i for i in range(spine_len - 1) if out_free[i] > 0]
            if not sources:
                return
            a = int(rng.choice(sources))
            b = int(rng.integers(a + 1, min(spine_len - 1, a + k + 1) + 1))
            out_free[a] -= 1
            prev = a
            for j in range(k):
                pos = a + (j + 1) / (k + 1) * (b - a)
                if kind == "decoy":
                    u = float(rng.uniform(params.u_hat_max, params.decoy_scale * params.u_hat_max))
                    r = 0.0
                else:
                    u = float(rng.uniform(params.u_hat_min, params.u_hat_max))
                    r = 1.0 if params.relevance_budget >= 1 else float(rng.uniform(params.relevance_budget, 1.0))
                records.append([pos, kind, u, r])
                idx = len(records) - 1
                edges.append((prev, idx))
                prev = idx
            edges.append((prev, b))

    capacity = sum(out_free)
    decoy_cap = side_cap = capacity
    if n_decoy and n_side:
        # both kinds present implies spine_len >= 3, hence capacity >= 2
        decoy_cap = max(1, capacity * n_decoy // (n_decoy + n_side))
        side_cap = capacity - decoy_cap
    decoy_lengths = _split_branches(n_decoy, params.max_branch_len, decoy_cap, rng)
    side_lengths = _split_branches(n_side, params.max_branch_len, side_cap, rng)
    # interleave so neither kind monopolises the early spine nodes
    order = [("decoy", k) for k in decoy_lengths] + [("side", k) for k in side_lengths]
    rng.shuffle(order)
    for kind, k in order:
        attach([k], kind)
    for i in range(spine_len - 2):
        if out_free[i] > 0 and rng.random() < params.skip_prob:
            b = int(rng.integers(i + 2, min(spine_len - 1, i + 3) + 1))
            edges.append((i, b))
            out_free[i] -= 1

    if len(records) != n:
        raise AssertionError(f"generator placed {len(records)} of {n} nodes")
    order_idx = sorted(range(n), key=lambda i: (records[i][0], i))
    relabel = {old: new for new, old in enumerate(order_idx)}
    nodes = tuple(SubgoalNode(relabel[old], records[old][2], records[old][3]) for old in order_idx)
    new_edges = tuple((relabel[a], relabel[b]) for a, b in edges)
    feats = np.asarray(params.features, dtype=float)
    if params.feature_spread > 0:
        feats = feats + rng.normal(0.0, params.feature_spread, size=feats.shape)
    return GoalNetwork(nodes, new_edges, relabel[0], (relabel[spine_len - 1],),
                       params.threshold_w, tuple(feats.tolist()))


# -- tis-net v1 text format ---------------------------------------------------

def _fmt(x):
    return repr(float(x))


def serialize_network(net):
    lines = [FORMAT_HEADER,
             f"start = {net.start}",
             "terminals = " + " ".join(str(t) for t in net.terminals),
             "threshold = " + ("none" if net.goal_threshold_w is None else _fmt(net.goal_threshold_w)),
             "features = " + " ".join(_fmt(x) for x in net.feature_vector),
             "[nodes]"]
    lines += [f"{n.id} {_fmt(n.u_hat)} {_fmt(n.r)}" for n in net.nodes]
    lines.append("[edges]")
    lines += [f"{a} -> {b}" for a, b in net.edges]
    return "\n".join(lines) + "\n"


def parse_network(text):
    """Inverse of :func:`serialize_network`.  ``#`` starts a comment."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != FORMAT_HEADER:
        raise ValueError(f"expected header {FORMAT_HEADER!r}")
    keys = {}
    nodes = []
    edges = []
    section = None
    for lineno, ln in enumerate(lines[1:], start=2):
        if ln in ("[nodes]", "[edges]"):
            section = ln[1:-1]
            continue
        if section is None:
            key, sep, value = ln.partition("=")
            if not sep:
                raise ValueError(f"line {lineno}: expected 'key = value'")
            keys[key.strip()] = value.strip()
        elif section == "nodes":
            parts = ln.split()
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: node line needs 'id u_hat r'")
            nodes.append(SubgoalNode(int(parts[0]), float(parts[1]), float(parts[2])))
        else:
            a, sep, b = ln.partition("->")
            if not sep:
                raise ValueError(f"line {lineno}: edge line needs 'from -> to'")
            edges.append((int(a), int(b)))
    for key in ("start", "terminals"):
        if key not in keys:
            raise ValueError(f"missing key {key!r}")
    threshold = keys.get("threshold", "none")
    nodes.sort(key=lambda nd: nd.id)
    return GoalNetwork(
        tuple(nodes), tuple(edges), int(keys["start"]),
        tuple(int(t) for t in keys["terminals"].split()),
        None if threshold == "none" else float(threshold),
        tuple(float(x) for x in keys.get("features", "").split()),
    )


def read_network(path):
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def write_network(net, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_network(net))
