"""Builders for the bundled reference instances and counterexample machinery.

Covers the three-player triangle game with two equilibria, its k-cycle
generalization, symmetric queueing games, the K4 conflicting-strategy pair,
non-matroid witness search, the counterexample embedding, and the no-long-
cycle test for undirected graphs.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import (GroundTooLarge, InvalidK, NotNonMatroid, Unstable,
                     WitnessNotFound)
from .game import (CostFunction, Game, Player, PolymatroidSpace, SetSystemSpace,
                   StrategyProfile, pure_profile)
from .matroids import MultiGraph, make_graphic, oracle_from_matroid
from .polymatroid import GroundSet, LoadVector, SubmodularOracle

BIG_COST = 100.0  # "sufficiently large"; anything above 8 blocks the detours


def _poly_x3() -> CostFunction:
    return CostFunction.polynomial((0.0, 0.0, 0.0, 1.0))


def _poly_x_plus_1() -> CostFunction:
    return CostFunction.polynomial((1.0, 1.0))


def triangle_game() -> Game:
    """Three players on resources {e, f, g}; each has a one-resource route and
    the complementary two-resource route.  The route costs make both the
    all-direct and the all-indirect profile an exact equilibrium."""
    ground = GroundSet(["e", "f", "g"])
    direct = {"1": "e", "2": "f", "3": "g"}
    others = {"1": ("f", "g"), "2": ("e", "g"), "3": ("e", "f")}
    players = []
    for pid in ("1", "2", "3"):
        costs = {el: _poly_x_plus_1() for el in ("e", "f", "g")}
        costs[direct[pid]] = _poly_x3()
        players.append(Player(
            id=pid, demand=1.0,
            space=SetSystemSpace.of([(direct[pid],), others[pid]]),
            costs=costs))
    return Game(ground, players)


def triangle_profiles(game: Game) -> tuple[StrategyProfile, StrategyProfile]:
    """(all-direct, all-indirect) pure profiles."""
    direct = pure_profile(game, {"1": ("e",), "2": ("f",), "3": ("g",)})
    indirect = pure_profile(game, {"1": ("f", "g"), "2": ("e", "g"), "3": ("e", "f")})
    return direct, indirect


def cycle_game(k: int, big: float = BIG_COST) -> Game:
    """Three players routing between adjacent vertices of a k-cycle.

    Edge c_j joins v_j and v_{j+1}; each player either takes its single direct
    edge or the rest of the cycle.  Detour edges shared by the long routes
    carry costs scaled by 1/(k-2), keeping both orientations in equilibrium.
    Off-cycle resources (which would get cost x + big) never enter a best
    response and are omitted from the strategy systems; `big` is kept for the
    generic JSON route.
    """
    if k < 3:
        raise InvalidK("cycle games need k >= 3")
    edges = [f"c{j}" for j in range(1, k + 1)]  # c_j = (v_j, v_{j+1 mod k})
    ground = GroundSet(edges)
    scale = 1.0 / (k - 2)
    rest = edges[2:]  # the cycle minus c1, c2

    def scaled_linear() -> CostFunction:
        return CostFunction.affine_scaled(scale, 1.0)

    def scaled_cubic() -> CostFunction:
        return CostFunction.polynomial((0.0, 0.0, 0.0, scale))

    routes = {
        "1": (("c1",), tuple(sorted(["c2"] + rest))),
        "2": (("c2",), tuple(sorted(["c1"] + rest))),
        "3": (tuple(sorted(rest)), ("c1", "c2")),
    }
    costs = {
        "1": {"c1": _poly_x3(), "c2": _poly_x_plus_1(),
              **{e: scaled_linear() for e in rest}},
        "2": {"c1": _poly_x_plus_1(), "c2": _poly_x3(),
              **{e: scaled_linear() for e in rest}},
        "3": {"c1": _poly_x_plus_1(), "c2": _poly_x_plus_1(),
              **{e: scaled_cubic() for e in rest}},
    }
    players = [Player(id=pid, demand=1.0, space=SetSystemSpace.of(routes[pid]),
                      costs=costs[pid]) for pid in ("1", "2", "3")]
    return Game(ground, players)


def cycle_profiles(game: Game) -> tuple[StrategyProfile, StrategyProfile]:
    """(clockwise, counterclockwise) pure profiles of a cycle game."""
    edges = sorted(game.ground.elements, key=lambda e: int(e[1:]))
    rest = tuple(sorted(edges[2:]))
    clockwise = pure_profile(game, {"1": ("c1",), "2": ("c2",), "3": rest})
    counter = pure_profile(game, {
        "1": tuple(sorted(["c2", *rest])),
        "2": tuple(sorted(["c1", *rest])),
        "3": ("c1", "c2")})
    return clockwise, counter


def queueing_game(mus: list[float], demands: list[float],
                  allowed: list[list[str]] | None = None) -> Game:
    """Queueing game: queue q_j has delay 1/(mu_j - x); each player spreads
    its arrival rate over its allowed queues (a rank-1 polymatroid)."""
    queues = [f"q{j + 1}" for j in range(len(mus))]
    ground = GroundSet(queues)
    if allowed is None:
        allowed = [list(queues) for _ in demands]
    if len(allowed) != len(demands):
        raise ValueError("allowed sets must match the demand list")
    total_demand = sum(demands)
    for queue_set in allowed:
        if total_demand >= sum(mus[queues.index(q)] for q in queue_set):
            raise Unstable("total demand must stay below the allowed service capacity")
    players = []
    for i, (d, queue_set) in enumerate(zip(demands, allowed)):
        # rank-1 uniform matroid on the allowed queues, scaled by the demand
        idx = ground.mask_of(queue_set)
        oracle = SubmodularOracle(
            ground, mask_fn=lambda mask, d=d, idx=idx: d * min(1, (mask & idx).bit_count()))
        costs = {q: CostFunction.queue(mus[queues.index(q)]) for q in queue_set}
        players.append(Player(id=str(i + 1), demand=float(d),
                              space=PolymatroidSpace(oracle), costs=costs))
    return Game(ground, players)


def queueing_start(game: Game) -> StrategyProfile:
    """Feasible start: demand split proportionally to the service rates, which
    keeps every queue strictly below capacity under the stability guard."""
    loads = {}
    for p in game.players:
        usable = game.usable(p.id)
        rates = {q: p.costs[q].mu for q in usable}
        total = sum(rates.values())
        loads[p.id] = LoadVector.from_dict(
            game.ground, {q: p.demand * rates[q] / total for q in usable})
    return StrategyProfile(loads, {})


def k4_graph() -> MultiGraph:
    """K4 with the edge numbering used by the conflicting pair: 1=(v1,v2),
    2=(v2,v3), 3=(v3,v1), 4=(v1,v4), 5=(v2,v4), 6=(v3,v4)."""
    return MultiGraph.create(
        ["v1", "v2", "v3", "v4"],
        [("1", "v1", "v2"), ("2", "v2", "v3"), ("3", "v3", "v1"),
         ("4", "v1", "v4"), ("5", "v2", "v4"), ("6", "v3", "v4")])


def k4_conflict_pair() -> tuple[SubmodularOracle, LoadVector, LoadVector]:
    """Graphic rank of K4 with the spanning-tree indicators (1,1,0,0,0,1) and
    (0,0,1,1,1,0): a pair admitting no bidirectional flow."""
    matroid = make_graphic(k4_graph())
    oracle = oracle_from_matroid(matroid)
    x = LoadVector.from_dict(oracle.ground, {"1": 1.0, "2": 1.0, "6": 1.0})
    y = LoadVector.from_dict(oracle.ground, {"3": 1.0, "4": 1.0, "5": 1.0})
    return oracle, x, y


WITNESS_GROUND_MAX = 10


def _check_antichain(sets: list[frozenset]) -> bool:
    return all(not (a < b or b < a) for a, b in combinations(sets, 2))


def is_matroid_base_family(family) -> bool:
    """True iff the sets are equicardinal and satisfy base exchange:
    for all B, B' and e in B - B' there is f in B' - B with B - e + f present."""
    sets = [frozenset(s) for s in family]
    if not sets:
        raise ValueError("family must be nonempty")
    universe = frozenset().union(*sets)
    if len(universe) > WITNESS_GROUND_MAX:
        raise GroundTooLarge(f"base-family check needs <= {WITNESS_GROUND_MAX} elements")
    if len({len(s) for s in sets}) != 1:
        return False
    pool = set(sets)
    for b in sets:
        for b2 in sets:
            for e in b - b2:
                if not any((b - {e}) | {f} in pool for f in b2 - b):
                    return False
    return True


@dataclass(frozen=True)
class NonMatroidWitness:
    x_set: tuple[str, ...]
    y_set: tuple[str, ...]
    a: str
    b: str
    c: str


def find_nonmatroid_witness(family) -> NonMatroidWitness:
    """First (lexicographic) witness (X, Y, a, b, c): a, b, c lie in the
    symmetric difference of X and Y and every allowable Z inside X | Y
    contains a or both of b, c.  Existence is guaranteed for anti-chains
    that are not matroid base families; otherwise WitnessNotFound."""
    sets = sorted({frozenset(s) for s in family}, key=lambda s: tuple(sorted(s)))
    universe = frozenset().union(*sets) if sets else frozenset()
    if len(universe) > WITNESS_GROUND_MAX:
        raise GroundTooLarge(f"witness search needs <= {WITNESS_GROUND_MAX} elements")
    if not _check_antichain(sets):
        raise WitnessNotFound("input is not an anti-chain")
    for x_set in sets:
        for y_set in sets:
            if x_set == y_set:
                continue
            union = x_set | y_set
            inside = [z for z in sets if z <= union]
            delta = sorted(x_set ^ y_set)
            for a in delta:
                rest = [e for e in delta if e != a]
                for b, c in combinations(rest, 2):
                    if all(a in z or (b in z and c in z) for z in inside):
                        return NonMatroidWitness(tuple(sorted(x_set)),
                                                 tuple(sorted(y_set)), a, b, c)
    raise WitnessNotFound("no witness: family is a matroid base family "
                          "or not an anti-chain")


@dataclass(frozen=True)
class Embedding:
    """Per-player injective maps from private element names into the shared
    ground set."""
    maps: dict[str, dict[str, str]]


@dataclass(frozen=True)
class EmbeddedCounterexample:
    game: Game
    embedding: Embedding
    profile_direct: StrategyProfile
    profile_indirect: StrategyProfile


def embed_counterexample(systems) -> EmbeddedCounterexample:
    """Embed >= 3 non-matroid set systems into one ground set so the induced
    game has (at least) two equilibria.

    Player i's witness elements are glued onto shared resources {e, f, g}
    with the role rotation a_1 -> e, a_2 -> f, a_3 -> g; the remaining
    witness-union elements get zero cost, everything else cost x + 100.
    Players beyond the third get demand 0 and zero costs.
    """
    systems = [sorted({tuple(sorted(s)) for s in sys_i}) for sys_i in systems]
    if len(systems) < 3:
        raise NotNonMatroid("need at least three set systems")
    witnesses = []
    for sys_i in systems[:3]:
        if is_matroid_base_family(sys_i):
            raise NotNonMatroid("set system is a matroid base family")
        witnesses.append(find_nonmatroid_witness(sys_i))
    shared_of = [  # player index -> {witness element -> shared resource}
        {witnesses[0].a: "e", witnesses[0].b: "f", witnesses[0].c: "g"},
        {witnesses[1].a: "f", witnesses[1].b: "e", witnesses[1].c: "g"},
        {witnesses[2].a: "g", witnesses[2].b: "f", witnesses[2].c: "e"},
    ]
    maps: dict[str, dict[str, str]] = {}
    ground_elements: set[str] = {"e", "f", "g"}
    players = []
    direct_choice = {}
    indirect_choice = {}
    for i, sys_i in enumerate(systems):
        pid = str(i + 1)
        elements = sorted({el for s in sys_i for el in s})
        if i < 3:
            tau = {el: shared_of[i].get(el, f"p{pid}.{el}") for el in elements}
        else:
            tau = {el: f"p{pid}.{el}" for el in elements}
        maps[pid] = tau
        ground_elements.update(tau.values())
        mapped_sets = [tuple(sorted(tau[el] for el in s)) for s in sys_i]
        if i < 3:
            wit = witnesses[i]
            union = set(wit.x_set) | set(wit.y_set)
            table1 = {
                shared_of[i][wit.a]: _poly_x3(),
                shared_of[i][wit.b]: _poly_x_plus_1(),
                shared_of[i][wit.c]: _poly_x_plus_1(),
            }
            costs = {}
            for el in elements:
                target = tau[el]
                if target in table1:
                    costs[target] = table1[target]
                elif el in union:
                    costs[target] = CostFunction.zero()
                else:
                    costs[target] = CostFunction.polynomial((BIG_COST, 1.0))
            demand = 1.0
            # the witness pair itself provides the two route analogues:
            # one of X, Y contains a (and neither b nor c), the other has b, c
            x_has_a = wit.a in wit.x_set
            a_side = wit.x_set if x_has_a else wit.y_set
            bc_side = wit.y_set if x_has_a else wit.x_set
            direct_choice[pid] = tuple(sorted(tau[el] for el in a_side))
            indirect_choice[pid] = tuple(sorted(tau[el] for el in bc_side))
        else:
            costs = {tau[el]: CostFunction.zero() for el in elements}
            demand = 0.0
            direct_choice[pid] = mapped_sets[0]
            indirect_choice[pid] = mapped_sets[0]
        players.append(Player(id=pid, demand=demand,
                              space=SetSystemSpace.of(mapped_sets), costs=costs))
    game = Game(GroundSet(sorted(ground_elements)), players)
    direct = pure_profile(game, direct_choice)
    indirect = pure_profile(game, indirect_choice)
    return EmbeddedCounterexample(game, Embedding(maps), direct, indirect)


def graph_uniqueness_property(g: MultiGraph) -> bool:
    """True iff the graph has no simple cycle on three or more vertices, i.e.
    collapsing parallel edges and dropping loops leaves a forest."""
    simple = set()
    for _, u, v in g.edges:
        if u != v:
            simple.add((u, v) if u <= v else (v, u))
    parent = {v: v for v in g.vertices}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in sorted(simple):
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[ru] = rv
    return True
