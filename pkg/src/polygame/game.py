"""Game model, marginal costs, best responses, and equilibrium search.

Players either distribute a demand over an explicit family of resource
subsets or pick any point of a private polymatroid base polytope.  Both
variants expose the same load-vector view, so verification and search share
one marginal-cost vocabulary.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import NoConvergence, QueueOverload
from .polymatroid import (TOL, GroundSet, LoadVector, SubmodularOracle,
                          capacity_table, certify_polymatroid, greedy_vertex,
                          in_base_polytope, minimize_linear)

SET_SYSTEM_MAX = 10_000
CERTIFY_AT_BUILD_MAX = 12
QUEUE_MARGIN = 1e-6


@dataclass(frozen=True)
class CostFunction:
    """Nonnegative, increasing, differentiable, convex cost of aggregate load.

    Forms: polynomial with nonnegative coefficients, M/M/1 queueing delay
    1/(mu - x) for x < mu, or the scaled affine c*(x + b).
    """

    kind: str  # "poly" | "queue" | "affine_scaled"
    coeffs: tuple[float, ...] = ()
    mu: float = 0.0
    scale: float = 0.0
    offset: float = 0.0

    @classmethod
    def polynomial(cls, coeffs: Iterable[float]) -> "CostFunction":
        cs = tuple(float(c) for c in coeffs) or (0.0,)
        if any(c < 0 for c in cs):
            raise ValueError("polynomial costs need nonnegative coefficients")
        return cls("poly", coeffs=cs)

    @classmethod
    def queue(cls, mu: float) -> "CostFunction":
        if mu <= 0:
            raise ValueError("queue service rate must be positive")
        return cls("queue", mu=float(mu))

    @classmethod
    def affine_scaled(cls, scale: float, offset: float) -> "CostFunction":
        if scale < 0 or offset < 0:
            raise ValueError("affine_scaled costs need scale >= 0 and offset >= 0")
        return cls("affine_scaled", scale=float(scale), offset=float(offset))

    @classmethod
    def zero(cls) -> "CostFunction":
        return cls.polynomial((0.0,))

    def value(self, x: float) -> float:
        if self.kind == "poly":
            acc = 0.0
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        if self.kind == "queue":
            if x >= self.mu:
                raise QueueOverload(f"queue load {x:g} reached service rate {self.mu:g}")
            return 1.0 / (self.mu - x)
        return self.scale * (x + self.offset)

    def deriv(self, x: float) -> float:
        if self.kind == "poly":
            acc = 0.0
            for j in range(len(self.coeffs) - 1, 0, -1):
                acc = acc * x + j * self.coeffs[j]
            return acc
        if self.kind == "queue":
            if x >= self.mu:
                raise QueueOverload(f"queue load {x:g} reached service rate {self.mu:g}")
            return 1.0 / (self.mu - x) ** 2
        return self.scale

    @property
    def domain_cap(self) -> float | None:
        """Upper bound on admissible aggregate load, if any."""
        return self.mu if self.kind == "queue" else None

    @property
    def strictly_increasing(self) -> bool:
        if self.kind == "poly":
            return any(c > 0 for c in self.coeffs[1:])
        if self.kind == "queue":
            return True
        return self.scale > 0


@dataclass(frozen=True)
class SetSystemSpace:
    """Demand split over an explicit family of allowable resource subsets."""

    sets: tuple[tuple[str, ...], ...]

    @classmethod
    def of(cls, sets: Iterable[Iterable[str]]) -> "SetSystemSpace":
        canon = sorted({tuple(sorted(set(s))) for s in sets})
        return cls(tuple(canon))


@dataclass(frozen=True)
class PolymatroidSpace:
    """Strategies are the points of a polymatroid base polytope."""

    oracle: SubmodularOracle


Space = SetSystemSpace | PolymatroidSpace


@dataclass(frozen=True)
class Player:
    id: str
    demand: float
    space: Space
    costs: dict[str, CostFunction]


class Game:
    """Immutable game: shared ground set, players with demands, spaces, costs."""

    def __init__(self, ground: GroundSet, players: Sequence[Player]):
        self.ground = ground
        self.players = tuple(players)
        ids = [p.id for p in self.players]
        if len(set(ids)) != len(ids):
            raise ValueError("player ids must be unique")
        self._by_id = {p.id: p for p in self.players}
        for p in self.players:
            if p.demand < 0:
                raise ValueError(f"player {p.id}: demand must be nonnegative")
            if isinstance(p.space, SetSystemSpace):
                if not p.space.sets:
                    raise ValueError(f"player {p.id}: empty set system")
                if len(p.space.sets) > SET_SYSTEM_MAX:
                    raise ValueError(f"player {p.id}: set system exceeds "
                                     f"{SET_SYSTEM_MAX} subsets")
                for s in p.space.sets:
                    if not s:
                        raise ValueError(f"player {p.id}: subsets must be nonempty")
                    for e in s:
                        if e not in ground:
                            raise ValueError(f"player {p.id}: unknown element {e!r}")
            else:
                if p.space.oracle.ground != ground:
                    raise ValueError(f"player {p.id}: oracle ground mismatch")
                if ground.size <= CERTIFY_AT_BUILD_MAX:
                    cert = certify_polymatroid(p.space.oracle)
                    if not cert.ok:
                        raise ValueError(f"player {p.id}: oracle fails "
                                         f"{cert.violation.kind} axiom")
            missing = [e for e in self.usable(p.id) if e not in p.costs]
            if missing:
                raise ValueError(f"player {p.id}: missing costs for {missing}")

    def player(self, player_id: str) -> Player:
        return self._by_id[player_id]

    def usable(self, player_id: str) -> tuple[str, ...]:
        """Elements the player can put load on."""
        p = self._by_id[player_id]
        if isinstance(p.space, SetSystemSpace):
            used = set()
            for s in p.space.sets:
                used.update(s)
            return tuple(sorted(used))
        oracle = p.space.oracle
        return tuple(e for e in self.ground
                     if oracle.eval_mask(1 << self.ground.index[e]) > TOL)


DistMap = dict[tuple[str, ...], float]


@dataclass
class StrategyProfile:
    """Per-player loads; set-system players also carry their distribution."""

    loads: dict[str, LoadVector]
    dists: dict[str, DistMap] = field(default_factory=dict)

    def copy(self) -> "StrategyProfile":
        return StrategyProfile(dict(self.loads),
                               {pid: dict(d) for pid, d in self.dists.items()})

    def load_matrix(self) -> dict[str, dict[str, float]]:
        return {pid: lv.as_dict() for pid, lv in self.loads.items()}


def loads_from_dist(ground: GroundSet, dist: Mapping[tuple[str, ...], float]) -> LoadVector:
    vals = [0.0] * ground.size
    for subset, w in dist.items():
        for e in subset:
            vals[ground.index[e]] += w
    return LoadVector(ground, vals)


def profile_from_dists(game: Game, dists: Mapping[str, Mapping]) -> StrategyProfile:
    """Build a profile for a game whose players are all set-system players."""
    loads: dict[str, LoadVector] = {}
    clean: dict[str, DistMap] = {}
    for p in game.players:
        dist = {tuple(sorted(s)): float(w) for s, w in dists.get(p.id, {}).items()}
        clean[p.id] = dist
        loads[p.id] = loads_from_dist(game.ground, dist)
    return StrategyProfile(loads, clean)


def pure_profile(game: Game, choice: Mapping[str, Iterable[str]]) -> StrategyProfile:
    """Every player puts its full demand on a single subset."""
    return profile_from_dists(
        game, {pid: {tuple(sorted(s)): game.player(pid).demand}
               for pid, s in choice.items()})


def aggregate_loads(game: Game, profile: StrategyProfile) -> LoadVector:
    vals = [0.0] * game.ground.size
    for p in game.players:
        lv = profile.loads[p.id]
        for i, v in enumerate(lv.values):
            vals[i] += v
    return LoadVector(game.ground, vals)


def validate_profile(game: Game, profile: StrategyProfile, tol: float = 1e-6) -> list[str]:
    """Feasibility diagnostics; an empty list means the profile is feasible."""
    problems = []
    for p in game.players:
        lv = profile.loads.get(p.id)
        if lv is None:
            problems.append(f"player {p.id}: no loads")
            continue
        if lv.ground != game.ground:
            problems.append(f"player {p.id}: ground mismatch")
            continue
        if isinstance(p.space, SetSystemSpace):
            dist = profile.dists.get(p.id)
            if dist is None:
                problems.append(f"player {p.id}: set-system player without distribution")
                continue
            allowed = set(p.space.sets)
            for s, w in dist.items():
                if s not in allowed:
                    problems.append(f"player {p.id}: weight on unknown subset {s}")
                if w < -tol:
                    problems.append(f"player {p.id}: negative weight on {s}")
            total = sum(dist.values())
            if abs(total - p.demand) > tol:
                problems.append(f"player {p.id}: distribution sums to {total:g}, "
                                f"demand is {p.demand:g}")
            induced = loads_from_dist(game.ground, dist)
            drift = max(abs(a - b) for a, b in zip(induced.values, lv.values))
            if drift > tol:
                problems.append(f"player {p.id}: loads do not match distribution "
                                f"(drift {drift:g})")
        else:
            if not in_base_polytope(p.space.oracle, lv, tol):
                problems.append(f"player {p.id}: loads outside the base polytope")
    return problems


def total_cost(game: Game, profile: StrategyProfile, player_id: str) -> float:
    p = game.player(player_id)
    agg = aggregate_loads(game, profile)
    own = profile.loads[player_id]
    out = 0.0
    for e, cost in p.costs.items():
        x_ie = own[e]
        if x_ie != 0.0:
            out += cost.value(agg[e]) * x_ie
    return out


def marginal_cost(game: Game, profile: StrategyProfile, player_id: str, element: str) -> float:
    p = game.player(player_id)
    cost = p.costs.get(element)
    if cost is None:
        raise ValueError(f"player {player_id} has no cost on {element!r}")
    agg = aggregate_loads(game, profile)
    x_e = agg[element]
    return cost.value(x_e) + profile.loads[player_id][element] * cost.deriv(x_e)


@dataclass(frozen=True)
class EquilibriumReport:
    is_equilibrium: bool
    worst_violation: float
    per_player: dict[str, float]
    load_matrix: dict[str, dict[str, float]]
    aggregate: dict[str, float]


def is_equilibrium(game: Game, profile: StrategyProfile, tol: float = TOL) -> EquilibriumReport:
    """Marginal-cost stability check.

    Polymatroid players: every loaded resource must have marginal cost at
    most that of any resource reachable by a positive single-strategy
    exchange.  Set-system players: every supported subset's marginal sum must
    be minimal among all allowable subsets.
    """
    agg = aggregate_loads(game, profile)
    per_player: dict[str, float] = {}
    for p in game.players:
        own = profile.loads[p.id]
        worst = 0.0
        if isinstance(p.space, SetSystemSpace):
            dist = profile.dists.get(p.id, {})
            sums = {}
            for s in p.space.sets:
                sums[s] = sum(p.costs[e].value(agg[e]) + own[e] * p.costs[e].deriv(agg[e])
                              for e in s)
            best = min(sums.values()) if sums else 0.0
            for s, w in dist.items():
                if w > tol:
                    worst = max(worst, sums[s] - best)
        else:
            oracle = p.space.oracle
            caps = capacity_table(oracle, own)
            marg = {}
            for e in game.usable(p.id):
                cost = p.costs[e]
                marg[e] = cost.value(agg[e]) + own[e] * cost.deriv(agg[e])
            idx = game.ground.index
            for e in game.ground:
                if own[e] > tol:
                    row = caps[idx[e]]
                    for e2 in game.ground:
                        if e2 != e and row[idx[e2]] > tol:
                            worst = max(worst, marg[e] - marg[e2])
        per_player[p.id] = worst
    worst_violation = max(per_player.values()) if per_player else 0.0
    return EquilibriumReport(
        is_equilibrium=worst_violation <= tol,
        worst_violation=worst_violation,
        per_player=per_player,
        load_matrix=profile.load_matrix(),
        aggregate=aggregate_loads(game, profile).as_dict(),
    )


@dataclass(frozen=True)
class SolverParams:
    gap_tol: float = 1e-9
    away_tol: float = 1e-7   # max marginal excess tolerated on support atoms
    move_tol: float = 1e-8
    max_iters: int = 100_000
    damping: float = 0.5
    tol_distinct: float = 1e-4
    eq_tol: float = 1e-6
    max_sweeps: int = 5_000
    line_search_tol: float = 1e-12
    seed: int = 42


Atom = tuple[float, ...]
Weights = dict[Atom, float]


def _combine(weights: Weights, n: int) -> list[float]:
    out = [0.0] * n
    for atom, w in weights.items():
        for k in range(n):
            out[k] += w * atom[k]
    return out


def _away_frank_wolfe(n: int, grad_fn, lmo_fn, dirderiv_fn, gamma_cap_fn,
                      start: Weights, params: SolverParams):
    """Conditional gradient with pairwise steps over conv(atoms).

    Works on any atom decomposition whose atoms lie in the feasible set.
    A pairwise step moves weight from the worst support atom straight onto
    the linear-minimization vertex, which avoids the mass-shuttling plateau
    of plain steps on degenerate optimal faces.  Stops when the Frank-Wolfe
    gap is below params.gap_tol AND every support atom is within
    params.away_tol of optimal; the second condition drains near-zero support
    weights whose atoms are measurably suboptimal (their mass is too small to
    show up in the plain gap).
    Returns (point, weights, gap, iterations).
    """
    weights: Weights = {a: w for a, w in start.items() if w > 0}
    z = _combine(weights, n)
    gap = float("inf")
    for it in range(params.max_iters):
        g = grad_fn(z)
        s = lmo_fn(g)
        gz = sum(gk * zk for gk, zk in zip(g, z))
        gap = gz - sum(gk * sk for gk, sk in zip(g, s))
        away_atom = max(weights, key=lambda a: sum(gk * ak for gk, ak in zip(g, a)))
        away_gap = sum(gk * ak for gk, ak in zip(g, away_atom)) - gz
        if gap <= params.gap_tol and away_gap <= params.away_tol:
            return z, weights, gap, it
        if away_gap > gap and s != away_atom:
            direction = [sk - ak for sk, ak in zip(s, away_atom)]
            gamma_max = weights[away_atom]
            pairwise = True
        else:
            direction = [sk - zk for sk, zk in zip(s, z)]
            gamma_max = 1.0
            pairwise = False
        gamma_max = min(gamma_max, gamma_cap_fn(z, direction))
        if gamma_max <= 0.0:
            return z, weights, gap, it
        gamma = _line_search(dirderiv_fn, z, direction, gamma_max, params.line_search_tol)
        if gamma <= 0.0:
            return z, weights, gap, it
        if pairwise:
            weights[away_atom] -= gamma
            weights[s] = weights.get(s, 0.0) + gamma
        else:
            weights = {a: (1.0 - gamma) * w for a, w in weights.items()}
            weights[s] = weights.get(s, 0.0) + gamma
        weights = {a: w for a, w in weights.items() if w > 1e-15}
        total = sum(weights.values())
        if abs(total - 1.0) > 1e-12:
            weights = {a: w / total for a, w in weights.items()}
        z = _combine(weights, n)
    raise NoConvergence(f"best response: gap {gap:g} after {params.max_iters} iterations")


def _line_search(dirderiv_fn, z, direction, gamma_max, tol):
    """Exact step on the segment: bisection on the directional derivative,
    which is nondecreasing because the objective is convex."""
    if dirderiv_fn(z, direction, gamma_max) <= 0.0:
        return gamma_max
    lo, hi = 0.0, gamma_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if dirderiv_fn(z, direction, mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class BestResponse:
    loads: LoadVector
    dist: DistMap | None
    weights: Weights
    gap: float
    iterations: int


FW_FIRST_BUDGET = 1_500  # conditional-gradient iterations before the exact fallback


def _exact_polymatroid_response(oracle: SubmodularOracle, cost_of: dict,
                                opp: list[float]) -> list[float]:
    """Separable convex minimization over the base polytope by recursive
    tight-set decomposition.

    Water-fill the budget by equalizing marginals, locate the most violated
    subset exhaustively (the guard on oracle tables bounds 2^m), pin it tight,
    and recurse on the restriction and the contraction.  Callers certify the
    result with a Frank-Wolfe gap check, so this routine only needs to be
    right in exact arithmetic.
    """
    ground = oracle.ground
    m = ground.size
    table = oracle.table()

    def marginal(i: int, z: float) -> float:
        cost = cost_of.get(i)
        if cost is None:
            return 0.0
        x = opp[i] + z
        return cost.value(x) + z * cost.deriv(x)

    out = [0.0] * m

    def waterfill(members: list[int], budget: float) -> list[float]:
        if budget <= 0.0:
            return [0.0] * len(members)
        caps = []
        for i in members:
            cost = cost_of.get(i)
            cap = budget
            if cost is not None and cost.domain_cap is not None:
                cap = min(cap, cost.domain_cap - QUEUE_MARGIN - opp[i])
            caps.append(max(cap, 0.0))
        if sum(caps) <= budget:
            return caps

        def fill(lam: float) -> list[float]:
            zs = []
            for i, cap in zip(members, caps):
                if marginal(i, 0.0) >= lam:
                    zs.append(0.0)
                elif marginal(i, cap) <= lam:
                    zs.append(cap)
                else:
                    lo, hi = 0.0, cap
                    for _ in range(60):
                        mid = 0.5 * (lo + hi)
                        if marginal(i, mid) < lam:
                            lo = mid
                        else:
                            hi = mid
                    zs.append(0.5 * (lo + hi))
            return zs

        lo_l = min(marginal(i, 0.0) for i in members) - 1.0
        hi_l = max(marginal(i, cap) for i, cap in zip(members, caps)) + 1.0
        for _ in range(80):
            lam = 0.5 * (lo_l + hi_l)
            if sum(fill(lam)) < budget:
                lo_l = lam
            else:
                hi_l = lam
        zs = fill(0.5 * (lo_l + hi_l))
        residual = budget - sum(zs)
        for pos in sorted(range(len(members)), key=lambda p: caps[p] - zs[p],
                          reverse=True):
            room = caps[pos] - zs[pos]
            step = min(residual, room) if residual > 0 else max(residual, -zs[pos])
            zs[pos] += step
            residual -= step
            if abs(residual) <= 1e-15:
                break
        return zs

    def solve(mask: int, context: int) -> None:
        members = [i for i in range(m) if mask >> i & 1]
        rho_ctx = table[context]
        budget = table[mask | context] - rho_ctx
        zs = waterfill(members, budget)
        by_index = dict(zip(members, zs))
        best_v, best_excess = 0, float("-inf")
        sub = mask
        while sub:
            excess = (sum(by_index[i] for i in members if sub >> i & 1)
                      - (table[sub | context] - rho_ctx))
            if excess > best_excess + 1e-15:
                best_v, best_excess = sub, excess
            elif excess > best_excess - 1e-15 and sub.bit_count() > best_v.bit_count():
                best_v = sub  # maximal among (near-)maximizers
            sub = (sub - 1) & mask
        if best_excess <= 1e-10 or best_v == mask:
            for i, z in by_index.items():
                out[i] = z
            return
        solve(best_v, context)
        solve(mask ^ best_v, context | best_v)

    solve(ground.full_mask, 0)
    return out


def _marginal_terms(opp, z, idx_list):
    """marginal_e at player load z over opponents opp, for usable indices."""
    out = {}
    for i, cost in idx_list:
        x = opp[i] + z[i]
        out[i] = cost.value(x) + z[i] * cost.deriv(x)
    return out


def best_response(game: Game, profile: StrategyProfile, player_id: str,
                  params: SolverParams = SolverParams(),
                  warm: Weights | None = None) -> BestResponse:
    """Approximate cost minimizer for one player, opponents fixed.

    Conditional gradient over the player's polytope; the linear oracle is the
    base-polytope greedy (polymatroid) or the cheapest allowable subset by
    current marginal sums (set system).
    """
    p = game.player(player_id)
    ground = game.ground
    m = ground.size
    agg = aggregate_loads(game, profile)
    own = profile.loads[player_id]
    opp = [agg.values[i] - own.values[i] for i in range(m)]
    cost_by_idx = [(ground.index[e], p.costs[e]) for e in game.usable(player_id)]
    queue_caps = [(i, c.domain_cap) for i, c in cost_by_idx if c.domain_cap is not None]

    if isinstance(p.space, PolymatroidSpace):
        oracle = p.space.oracle

        def grad_fn(z):
            terms = _marginal_terms(opp, z, cost_by_idx)
            return [terms.get(i, 0.0) for i in range(m)]

        def lmo_fn(g):
            v = minimize_linear(oracle, dict(zip(ground.elements, g)))
            return v.values

        def dirderiv_fn(z, d, gamma):
            out = 0.0
            for i, cost in cost_by_idx:
                if d[i] != 0.0:
                    x = opp[i] + z[i] + gamma * d[i]
                    out += d[i] * (cost.value(x) + (z[i] + gamma * d[i]) * cost.deriv(x))
            return out

        def gamma_cap_fn(z, d):
            cap = float("inf")
            for i, mu in queue_caps:
                if d[i] > 1e-15:
                    cap = min(cap, (mu - QUEUE_MARGIN - opp[i] - z[i]) / d[i])
            return max(cap, 0.0)

        start: Weights = warm if warm else {own.values: 1.0}
        first = SolverParams(**{**params.__dict__,
                                "max_iters": min(params.max_iters, FW_FIRST_BUDGET)})
        try:
            z, weights, gap, iters = _away_frank_wolfe(
                m, grad_fn, lmo_fn, dirderiv_fn, gamma_cap_fn, start, first)
        except NoConvergence:
            # degenerate optimal faces can make the conditional gradient crawl;
            # solve the separable problem exactly and certify with one gap check
            exact = _exact_polymatroid_response(oracle, dict(cost_by_idx), opp)
            g = grad_fn(exact)
            v = lmo_fn(g)
            gap = sum(gk * (zk - vk) for gk, zk, vk in zip(g, exact, v))
            if abs(gap) <= params.gap_tol:
                return BestResponse(LoadVector(ground, exact), None,
                                    {tuple(exact): 1.0}, max(gap, 0.0),
                                    FW_FIRST_BUDGET)
            z, weights, gap, iters = _away_frank_wolfe(
                m, grad_fn, lmo_fn, dirderiv_fn, gamma_cap_fn,
                {tuple(exact): 1.0}, params)
        return BestResponse(LoadVector(ground, z), None, weights, gap, iters)

    sets = p.space.sets
    n = len(sets)
    incidence = [[ground.index[e] for e in s] for s in sets]

    def loads_of(w):
        vals = [0.0] * m
        for k, members in enumerate(incidence):
            wk = w[k]
            if wk:
                for i in members:
                    vals[i] += wk
        return vals

    def grad_fn(w):
        loads = loads_of(w)
        terms = _marginal_terms(opp, loads, cost_by_idx)
        return [sum(terms[i] for i in members) for members in incidence]

    def lmo_fn(g):
        best = min(range(n), key=lambda k: (g[k], sets[k]))
        vertex = [0.0] * n
        vertex[best] = p.demand
        return tuple(vertex)

    def dirderiv_fn(w, d, gamma):
        base = loads_of(w)
        dload = loads_of(d)
        out = 0.0
        for i, cost in cost_by_idx:
            if dload[i] != 0.0:
                x = opp[i] + base[i] + gamma * dload[i]
                out += dload[i] * (cost.value(x) + (base[i] + gamma * dload[i]) * cost.deriv(x))
        return out

    def gamma_cap_fn(w, d):
        if not queue_caps:
            return float("inf")
        base = loads_of(w)
        dload = loads_of(d)
        cap = float("inf")
        for i, mu in queue_caps:
            if dload[i] > 1e-15:
                cap = min(cap, (mu - QUEUE_MARGIN - opp[i] - base[i]) / dload[i])
        return max(cap, 0.0)

    if warm:
        start = warm
    else:
        dist = profile.dists.get(player_id, {})
        start = {tuple(dist.get(s, 0.0) for s in sets): 1.0}
    w, weights, gap, iters = _away_frank_wolfe(
        n, grad_fn, lmo_fn, dirderiv_fn, gamma_cap_fn, start, params)
    dist_out: DistMap = {sets[k]: w[k] for k in range(n) if w[k] > 1e-15}
    return BestResponse(LoadVector(ground, loads_of(w)), dist_out, weights, gap, iters)


def find_equilibrium(game: Game, start: StrategyProfile,
                     params: SolverParams = SolverParams()) -> StrategyProfile:
    """Damped best-response dynamics, round-robin over players.

    Stops when no player moved more than params.move_tol in one sweep, then
    verifies the result at params.eq_tol; raises NoConvergence otherwise.
    """
    problems = validate_profile(game, start)
    if problems:
        raise ValueError("infeasible start: " + "; ".join(problems))
    profile = start.copy()
    lam = params.damping
    order = sorted(p.id for p in game.players)
    decomps: dict[str, Weights] = {}
    for pid in order:
        p = game.player(pid)
        if isinstance(p.space, SetSystemSpace):
            dist = profile.dists[pid]
            decomps[pid] = {tuple(dist.get(s, 0.0) for s in p.space.sets): 1.0}
        else:
            decomps[pid] = {profile.loads[pid].values: 1.0}
    for _ in range(params.max_sweeps):
        movement = 0.0
        for pid in order:
            p = game.player(pid)
            if p.demand <= TOL and isinstance(p.space, SetSystemSpace):
                continue
            br = best_response(game, profile, pid, params, warm=dict(decomps[pid]))
            if isinstance(p.space, SetSystemSpace):
                sets = p.space.sets
                cur_point = [sum(a[k] * w for a, w in decomps[pid].items())
                             for k in range(len(sets))]
                br_point = [sum(a[k] * w for a, w in br.weights.items())
                            for k in range(len(sets))]
                new_point = [(1 - lam) * c + lam * b
                             for c, b in zip(cur_point, br_point)]
                movement = max(movement, max(
                    (abs(a - b) for a, b in zip(new_point, cur_point)), default=0.0))
                merged: Weights = {a: (1 - lam) * w for a, w in decomps[pid].items()}
                for a, w in br.weights.items():
                    merged[a] = merged.get(a, 0.0) + lam * w
                decomps[pid] = {a: w for a, w in merged.items() if w > 1e-15}
                dist = {sets[k]: new_point[k] for k in range(len(sets))
                        if new_point[k] > 1e-15}
                profile.dists[pid] = dist
                profile.loads[pid] = loads_from_dist(game.ground, dist)
            else:
                cur = profile.loads[pid].values
                new_vals = [(1 - lam) * c + lam * b
                            for c, b in zip(cur, br.loads.values)]
                movement = max(movement, max(
                    (abs(a - b) for a, b in zip(new_vals, cur)), default=0.0))
                merged = {a: (1 - lam) * w for a, w in decomps[pid].items()}
                for a, w in br.weights.items():
                    merged[a] = merged.get(a, 0.0) + lam * w
                decomps[pid] = {a: w for a, w in merged.items() if w > 1e-15}
                profile.loads[pid] = LoadVector(game.ground, new_vals)
        if movement <= params.move_tol:
            report = is_equilibrium(game, profile, params.eq_tol)
            if not report.is_equilibrium:
                raise NoConvergence(
                    f"dynamics settled but residual {report.worst_violation:g} "
                    f"exceeds eq_tol {params.eq_tol:g}")
            return profile
    raise NoConvergence(f"no convergence after {params.max_sweeps} sweeps")


@dataclass
class MultiplicityReport:
    equilibria: list[StrategyProfile]
    reports: list[EquilibriumReport]
    start_of: list[int]
    failures: list[tuple[int, str]]
    distinct_aggregates: int

    @property
    def count(self) -> int:
        return len(self.equilibria)


def probe_multiplicity(game: Game, starts: Sequence[StrategyProfile],
                       params: SolverParams = SolverParams(),
                       tol_distinct: float | None = None,
                       jobs: int = 1) -> MultiplicityReport:
    """Run the dynamics from every start and deduplicate the limits by the
    full load matrix (max-norm); aggregate-load distinctness is reported
    separately since equilibria may coincide there while differing per player.

    Starts are independent; with jobs > 1 they fan out over a thread pool and
    the outcomes are merged in start order, so reports stay deterministic.
    """
    tol_d = params.tol_distinct if tol_distinct is None else tol_distinct
    outcomes: list[StrategyProfile | Exception] = [None] * len(starts)  # type: ignore
    if jobs > 1 and len(starts) > 1:
        from concurrent.futures import ThreadPoolExecutor

        def run(start):
            try:
                return find_equilibrium(game, start, params)
            except NoConvergence as exc:
                return exc

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run, starts))
    else:
        for idx, start in enumerate(starts):
            try:
                outcomes[idx] = find_equilibrium(game, start, params)
            except NoConvergence as exc:
                outcomes[idx] = exc
    equilibria: list[StrategyProfile] = []
    reports: list[EquilibriumReport] = []
    start_of: list[int] = []
    failures: list[tuple[int, str]] = []
    for idx, outcome in enumerate(outcomes):
        if isinstance(outcome, Exception):
            failures.append((idx, str(outcome)))
            continue
        prof = outcome
        if all(_matrix_dist(prof, known, game) > tol_d for known in equilibria):
            equilibria.append(prof)
            reports.append(is_equilibrium(game, prof, params.eq_tol))
            start_of.append(idx)
    aggs = [aggregate_loads(game, prof).values for prof in equilibria]
    distinct_aggs = 0
    for i, a in enumerate(aggs):
        if all(max(abs(x - y) for x, y in zip(a, b)) > tol_d for b in aggs[:i]):
            distinct_aggs += 1
    return MultiplicityReport(equilibria, reports, start_of, failures, distinct_aggs)


def _matrix_dist(p1: StrategyProfile, p2: StrategyProfile, game: Game) -> float:
    worst = 0.0
    for p in game.players:
        a, b = p1.loads[p.id], p2.loads[p.id]
        worst = max(worst, max((abs(x - y) for x, y in zip(a.values, b.values)),
                               default=0.0))
    return worst


def canonical_start(game: Game) -> StrategyProfile:
    """Deterministic feasible start: an even split over the allowable subsets,
    or the lexicographic greedy vertex for polymatroid players."""
    loads: dict[str, LoadVector] = {}
    dists: dict[str, DistMap] = {}
    for p in game.players:
        if isinstance(p.space, SetSystemSpace):
            share = p.demand / len(p.space.sets)
            dist = {s: share for s in p.space.sets}
            dists[p.id] = dist
            loads[p.id] = loads_from_dist(game.ground, dist)
        else:
            loads[p.id] = greedy_vertex(p.space.oracle, game.ground.elements)
    return StrategyProfile(loads, dists)


def random_profile(game: Game, rng: random.Random) -> StrategyProfile:
    """Random feasible profile: Dirichlet weights over subsets, or a Dirichlet
    mix of random greedy vertices for polymatroid players."""
    loads: dict[str, LoadVector] = {}
    dists: dict[str, DistMap] = {}
    for p in game.players:
        if isinstance(p.space, SetSystemSpace):
            raw = [rng.gammavariate(1.0, 1.0) for _ in p.space.sets]
            total = sum(raw) or 1.0
            dist = {s: p.demand * r / total for s, r in zip(p.space.sets, raw)}
            dist = {s: w for s, w in dist.items() if w > 0}
            dists[p.id] = dist
            loads[p.id] = loads_from_dist(game.ground, dist)
        else:
            oracle = p.space.oracle
            k = rng.randint(1, 4)
            verts = []
            elems = list(game.ground.elements)
            for _ in range(k):
                order = elems[:]
                rng.shuffle(order)
                verts.append(greedy_vertex(oracle, order))
            raw = [rng.gammavariate(1.0, 1.0) for _ in range(k)]
            total = sum(raw) or 1.0
            vals = [0.0] * game.ground.size
            for w, v in zip(raw, verts):
                for i, val in enumerate(v.values):
                    vals[i] += (w / total) * val
            loads[p.id] = LoadVector(game.ground, vals)
    return StrategyProfile(loads, dists)
