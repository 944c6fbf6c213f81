"""Exchange graphs, directed and bidirectional flows, and diagnostics.

The directed builder reads capacities at a single point x; the bidirectional
builder keeps an arc (e, e') only when the exchange is simultaneously
feasible at x and, reversed, at y.  Feasibility verdicts for transshipment
run on integer-scaled capacities so they never hinge on float drift.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass

from .errors import ConflictingStrategies, ExchangeNotFound, NotInPolytope
from .flows import FlowNetwork, decompose_paths
from .polymatroid import (TOL, GroundSet, LoadVector, SubmodularOracle,
                          capacity_table, greedy_vertex, in_base_polytope)

FLOW_SCALE = 10 ** 9          # rational scaling for exact feasibility verdicts
CONFLICT_RESIDUAL = 1e-6      # unmet demand above this means "conflicting"


@dataclass(frozen=True)
class ExchangeGraph:
    kind: str  # "directed" | "bidirectional"
    ground: GroundSet
    arcs: tuple[tuple[str, str, float], ...]

    def capacity(self, e: str, e_prime: str) -> float:
        for u, v, c in self.arcs:
            if u == e and v == e_prime:
                return c
        return 0.0

    def arc_pairs(self) -> set[tuple[str, str]]:
        return {(u, v) for u, v, _ in self.arcs}

    def to_dot(self, supplies: dict[str, float] | None = None) -> str:
        lines = [f"digraph exchange_{self.kind} {{"]
        for e in self.ground:
            label = e
            if supplies and abs(supplies.get(e, 0.0)) > TOL:
                label = f"{e}\\n{supplies[e]:+g}"
            lines.append(f'  "{e}" [label="{label}"];')
        for u, v, c in self.arcs:
            lines.append(f'  "{u}" -> "{v}" [label="{c:g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Flow:
    arc_flows: dict[tuple[str, str], float]
    trace: tuple[tuple[str, str, float], ...] | None = None

    def balance(self, element: str) -> float:
        out = sum(f for (u, _), f in self.arc_flows.items() if u == element)
        inc = sum(f for (_, v), f in self.arc_flows.items() if v == element)
        return out - inc


@dataclass(frozen=True)
class ConflictCut:
    """Min-cut witness: supplies trapped on the source side exceed the
    demand reachable there."""
    source_side: tuple[str, ...]
    trapped_supply: tuple[str, ...]
    reachable_demand: tuple[str, ...]
    deficit: float


@dataclass(frozen=True)
class BidirectionalOutcome:
    feasible: bool
    flow: Flow | None = None
    certificate: ConflictCut | None = None


@dataclass(frozen=True)
class TransshipmentProblem:
    """Supplies x_e - y_e (positive = surplus, negative = demand) to be routed
    through an exchange graph; total supply is zero whenever both points lie
    in the same base polytope."""

    graph: ExchangeGraph
    supply: dict[str, float]

    @classmethod
    def between(cls, oracle: SubmodularOracle, x: LoadVector, y: LoadVector,
                tol: float = TOL) -> "TransshipmentProblem":
        graph = build_bidirectional(oracle, x, y, tol)
        return cls(graph, {e: x[e] - y[e] for e in oracle.ground})

    def solve(self, tol: float = TOL) -> BidirectionalOutcome:
        ground = self.graph.ground
        arcs = [(ground.index[u], ground.index[v], c) for u, v, c in self.graph.arcs]
        supply = [self.supply.get(e, 0.0) for e in ground.elements]
        return _solve_transshipment(ground, arcs, supply, tol)


def _require_member(oracle: SubmodularOracle, x: LoadVector, tol: float, tag: str) -> None:
    if not in_base_polytope(oracle, x, tol):
        raise NotInPolytope(f"{tag} is not in the base polytope")


def build_directed(oracle: SubmodularOracle, x: LoadVector, tol: float = TOL) -> ExchangeGraph:
    _require_member(oracle, x, tol, "x")
    ground = oracle.ground
    caps = capacity_table(oracle, x)
    arcs = [(ground.elements[i], ground.elements[j], caps[i][j])
            for i in range(ground.size) for j in range(ground.size)
            if i != j and caps[i][j] > tol]
    return ExchangeGraph("directed", ground, tuple(arcs))


def build_bidirectional(oracle: SubmodularOracle, x: LoadVector, y: LoadVector,
                        tol: float = TOL) -> ExchangeGraph:
    _require_member(oracle, x, tol, "x")
    _require_member(oracle, y, tol, "y")
    ground = oracle.ground
    cx = capacity_table(oracle, x)
    cy = capacity_table(oracle, y)
    arcs = []
    for i in range(ground.size):
        for j in range(ground.size):
            if i != j:
                cap = min(cx[i][j], cy[j][i])
                if cap > tol:
                    arcs.append((ground.elements[i], ground.elements[j], cap))
    return ExchangeGraph("bidirectional", ground, tuple(arcs))


def _targeted_capacity(table: list[float], sums: list[float], vals: tuple[float, ...],
                       m: int, i: int, j: int) -> float:
    """Exchange capacity from element i to element j given precomputed tables."""
    bit_i, bit_j = 1 << i, 1 << j
    cap = vals[i]
    for mask in range(1 << m):
        if mask & bit_j and not mask & bit_i:
            slack = table[mask] - sums[mask]
            if slack < cap:
                cap = slack
    return max(cap, 0.0)


def directed_flow(oracle: SubmodularOracle, x: LoadVector, y: LoadVector,
                  tol: float = TOL) -> Flow:
    """Transform y into x by strong exchanges, recording a flow in D(x).

    Steps, with smallest-index choices for determinism:
      1. start from the zero flow;
      2. stop once y equals x;
      3. pick the first e with x_e > y_e;
      4. pick the first e' with x_e' < y_e' whose exchange is feasible at x
         and, reversed, at the current y; move
         alpha = min(c_x(e,e'), c_y(e',e), x_e - y_e, y_e' - x_e')
         onto arc (e,e') and update y;
      5. repeat step 4 until e is settled, then go back to step 2.

    A missing e' in step 4 contradicts the strong exchange property and is
    reported as ExchangeNotFound (the oracle is not submodular).
    """
    _require_member(oracle, x, tol, "x")
    _require_member(oracle, y, tol, "y")
    ground = oracle.ground
    m = ground.size
    table = oracle.table()
    cx = capacity_table(oracle, x)
    xv = x.values
    yv = list(y.values)
    arc_flows: dict[tuple[str, str], float] = {}
    trace: list[tuple[str, str, float]] = []
    max_steps = max(1, (m * m) // 4) + m  # algorithm bound plus float slack
    for _ in range(max_steps + 1):
        e_idx = next((i for i in range(m) if xv[i] - yv[i] > tol), None)
        if e_idx is None:
            break
        y_cur = LoadVector(ground, yv)
        y_sums = y_cur.subset_sums()
        found = None
        for j in range(m):
            if yv[j] - xv[j] > tol and cx[e_idx][j] > tol:
                c_back = _targeted_capacity(table, y_sums, y_cur.values, m, j, e_idx)
                if c_back > tol:
                    found = (j, c_back)
                    break
        if found is None:
            raise ExchangeNotFound(
                "no strong-exchange partner; oracle violates submodularity")
        j, c_back = found
        alpha = min(cx[e_idx][j], c_back, xv[e_idx] - yv[e_idx], yv[j] - xv[j])
        yv[e_idx] += alpha
        yv[j] -= alpha
        e, e_prime = ground.elements[e_idx], ground.elements[j]
        arc_flows[(e, e_prime)] = arc_flows.get((e, e_prime), 0.0) + alpha
        trace.append((e, e_prime, alpha))
    else:
        raise ExchangeNotFound("exchange count exceeded the m^2/4 bound")
    return Flow(dict(arc_flows), tuple(trace))


def _solve_transshipment(ground: GroundSet, arcs: list[tuple[int, int, float]],
                         supply: list[float], tol: float) -> BidirectionalOutcome:
    """Exact feasibility via max-flow on integer-scaled capacities."""
    m = ground.size
    if all(abs(s) <= tol for s in supply):
        return BidirectionalOutcome(True, Flow({}))
    src, snk = m, m + 1
    net = FlowNetwork(m + 2)
    arc_ids = []
    for i, j, cap in arcs:
        arc_ids.append(((ground.elements[i], ground.elements[j]),
                        net.add_arc(i, j, round(cap * FLOW_SCALE))))
    total_supply = 0
    for i in range(m):
        if supply[i] > tol:
            amt = round(supply[i] * FLOW_SCALE)
            net.add_arc(src, i, amt)
            total_supply += amt
        elif supply[i] < -tol:
            net.add_arc(i, snk, round(-supply[i] * FLOW_SCALE))
    sent = net.max_flow(src, snk)
    deficit = (total_supply - sent) / FLOW_SCALE
    if deficit > CONFLICT_RESIDUAL:
        reachable = net.residual_reachable(src)
        side = tuple(ground.elements[i] for i in range(m) if i in reachable)
        trapped = tuple(ground.elements[i] for i in range(m)
                        if i in reachable and supply[i] > tol)
        reachable_demand = tuple(ground.elements[i] for i in range(m)
                                 if i in reachable and supply[i] < -tol)
        return BidirectionalOutcome(False, certificate=ConflictCut(
            side, trapped, reachable_demand, deficit))
    flows = {}
    for (u, v), idx in arc_ids:
        f = net.flow_on(idx)
        if f:
            flows[(u, v)] = f / FLOW_SCALE
    return BidirectionalOutcome(True, Flow(flows))


def _feasibility_from_tables(ground: GroundSet, cx: list[list[float]],
                             cy: list[list[float]], supply: list[float],
                             tol: float) -> BidirectionalOutcome:
    """Transshipment feasibility given precomputed one-sided capacity tables."""
    m = ground.size
    arcs = []
    for i in range(m):
        row_x = cx[i]
        for j in range(m):
            if i != j:
                cap = min(row_x[j], cy[j][i])
                if cap > tol:
                    arcs.append((i, j, cap))
    return _solve_transshipment(ground, arcs, supply, tol)


def bidirectional_flow(oracle: SubmodularOracle, x: LoadVector, y: LoadVector,
                       tol: float = TOL) -> BidirectionalOutcome:
    """Feasibility of the transshipment with supplies x_e - y_e on D(x, y).

    Solved as a max-flow between a super source over the supplies and a super
    sink under the demands; on failure the residual cut is returned.
    """
    _require_member(oracle, x, tol, "x")
    _require_member(oracle, y, tol, "y")
    cx = capacity_table(oracle, x)
    cy = capacity_table(oracle, y)
    m = oracle.ground.size
    supply = [x.values[i] - y.values[i] for i in range(m)]
    return _feasibility_from_tables(oracle.ground, cx, cy, supply, tol)


@dataclass(frozen=True)
class ProbeReport:
    pairs_tested: int
    conflicts: tuple[tuple[dict[str, float], dict[str, float], ConflictCut], ...]
    vertices_used: int
    samples: int
    seed: int

    @property
    def clean(self) -> bool:
        return not self.conflicts


def sample_vertices(oracle: SubmodularOracle, rng: random.Random,
                    perm_cap: int = 720) -> list[LoadVector]:
    """Greedy vertices over all permutations when feasible, else a sample."""
    ground = oracle.ground
    elems = list(ground.elements)
    seen: dict[tuple, LoadVector] = {}
    if math.factorial(len(elems)) <= perm_cap:
        perms = itertools.permutations(elems)
    else:
        def random_perms():
            for _ in range(perm_cap):
                p = elems[:]
                rng.shuffle(p)
                yield tuple(p)
        perms = random_perms()
    for order in perms:
        v = greedy_vertex(oracle, order)
        key = tuple(round(val, 12) for val in v.values)
        seen.setdefault(key, v)
    return list(seen.values())


def _interior_point(vertices: list[LoadVector], rng: random.Random) -> LoadVector:
    k = min(len(vertices), rng.randint(2, 4))
    picks = rng.sample(vertices, k)
    weights = [rng.gammavariate(1.0, 1.0) for _ in range(k)]
    total = sum(weights) or 1.0
    ground = picks[0].ground
    vals = [0.0] * ground.size
    for w, v in zip(weights, picks):
        for i, val in enumerate(v.values):
            vals[i] += (w / total) * val
    return LoadVector(ground, vals)


def probe_bidirectional_property(oracle: SubmodularOracle, samples: int = 200,
                                 seed: int = 42, vertices: list[LoadVector] | None = None,
                                 perm_cap: int = 720, tol: float = TOL) -> ProbeReport:
    """Search for conflicting pairs: every deduplicated vertex pair plus
    `samples` random interior pairs (Dirichlet mixes of up to 4 vertices).

    A clean report is evidence, not proof; the property quantifies over a
    continuum of pairs.
    """
    rng = random.Random(seed)
    verts = sample_vertices(oracle, rng, perm_cap)
    if vertices:
        keyed = {tuple(round(v, 12) for v in lv.values): lv for lv in verts}
        for lv in vertices:
            keyed.setdefault(tuple(round(v, 12) for v in lv.values), lv)
        verts = list(keyed.values())
    pairs: list[tuple[LoadVector, LoadVector]] = []
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            pairs.append((verts[i], verts[j]))
    for _ in range(samples):
        pairs.append((_interior_point(verts, rng), _interior_point(verts, rng)))
    # one capacity table per distinct point; pairs then cost one max-flow each
    tables: dict[int, list[list[float]]] = {}

    def table_of(point: LoadVector) -> list[list[float]]:
        key = id(point)
        tab = tables.get(key)
        if tab is None:
            tab = capacity_table(oracle, point)
            tables[key] = tab
        return tab

    conflicts = []
    for x, y in pairs:
        supply = [a - b for a, b in zip(x.values, y.values)]
        outcome = _feasibility_from_tables(oracle.ground, table_of(x), table_of(y),
                                           supply, tol)
        if not outcome.feasible:
            conflicts.append((x.as_dict(), y.as_dict(), outcome.certificate))
    return ProbeReport(len(pairs), tuple(conflicts), len(verts), samples, seed)


@dataclass(frozen=True)
class DiagnosticGraph:
    """Bidirectional exchange graph of one player wrapped with a super source
    feeding the overloaded resources and a super sink draining the
    underloaded ones."""
    inner: ExchangeGraph
    source_arcs: tuple[tuple[str, float], ...]  # s -> e, e locally overloaded
    sink_arcs: tuple[tuple[str, float], ...]    # e -> t, e locally underloaded

    def to_dot(self) -> str:
        lines = ["digraph diagnostic {", '  "s" [shape=diamond];', '  "t" [shape=diamond];']
        for e in self.inner.ground:
            lines.append(f'  "{e}";')
        for e, c in self.source_arcs:
            lines.append(f'  "s" -> "{e}" [label="{c:g}"];')
        for u, v, c in self.inner.arcs:
            lines.append(f'  "{u}" -> "{v}" [label="{c:g}"];')
        for e, c in self.sink_arcs:
            lines.append(f'  "{e}" -> "t" [label="{c:g}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FlowPath:
    resources: tuple[str, ...]
    amount: float


def build_diagnostic(oracle: SubmodularOracle, x: LoadVector, y: LoadVector,
                     tol: float = TOL) -> tuple[DiagnosticGraph, tuple[FlowPath, ...]]:
    """Diagnostic graph of a single player plus a path decomposition of the
    flow induced by a bidirectional flow between x and y."""
    outcome = bidirectional_flow(oracle, x, y, tol)
    if not outcome.feasible:
        raise ConflictingStrategies("x and y admit no bidirectional flow")
    ground = oracle.ground
    inner = build_bidirectional(oracle, x, y, tol)
    over = [(e, x[e] - y[e]) for e in ground if x[e] - y[e] > tol]
    under = [(e, y[e] - x[e]) for e in ground if y[e] - x[e] > tol]
    diag = DiagnosticGraph(inner, tuple(over), tuple(under))
    # flow from the bidirectional solution, extended over the source/sink arcs
    node_id = {e: i for i, e in enumerate(ground.elements)}
    m = ground.size
    arc_flows = {(node_id[u], node_id[v]): f for (u, v), f in outcome.flow.arc_flows.items()}
    for e, c in over:
        arc_flows[(m, node_id[e])] = c
    for e, c in under:
        arc_flows[(node_id[e], m + 1)] = c
    raw = decompose_paths(m + 2, arc_flows, m, m + 1)
    paths = tuple(FlowPath(tuple(ground.elements[i] for i in nodes[1:-1]), amount)
                  for nodes, amount in raw)
    return diag, paths
