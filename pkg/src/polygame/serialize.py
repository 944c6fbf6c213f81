"""JSON schemas for games, profiles, matroids, oracles, and graphs.

All files carry "schema_version": 1.  Subset keys inside distribution and
oracle-table maps are comma-joined sorted element names ("f,g"); the empty
subset is the empty string.  See docs/formats.md.
"""
from __future__ import annotations

import json
from typing import Any, Mapping

from .errors import FormatError
from .exchange import ConflictCut, ExchangeGraph, Flow, ProbeReport
from .game import (CostFunction, EquilibriumReport, Game, Player,
                   PolymatroidSpace, SetSystemSpace, StrategyProfile,
                   loads_from_dist)
from .matroids import (GammoidSpec, Matroid, MultiGraph, make_explicit,
                       make_gammoid, make_graphic, make_laminar, make_partition,
                       make_transversal, make_uniform, oracle_from_matroid)
from .polymatroid import GroundSet, LoadVector, SubmodularOracle, oracle_from_table

SCHEMA_VERSION = 1


def dumps(payload: Any) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def subset_key(subset) -> str:
    return ",".join(sorted(subset))


def parse_subset_key(key: str) -> tuple[str, ...]:
    return tuple(k for k in key.split(",") if k) if key else ()


def _need(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise FormatError(f"{where}: missing {key!r}")
    return obj[key]


# ---------------------------------------------------------------- matroids

def matroid_from_dict(data: Mapping) -> Matroid:
    if not isinstance(data, Mapping):
        raise FormatError("matroid: expected an object")
    cls = _need(data, "class", "matroid")
    try:
        if cls == "uniform":
            elements = data.get("elements")
            m = int(data["m"]) if "m" in data else len(elements)
            return make_uniform(m, int(_need(data, "k", "uniform matroid")),
                                elements=elements)
        if cls == "partition":
            blocks = [(b["elements"], int(b["capacity"]))
                      for b in _need(data, "blocks", "partition matroid")]
            return make_partition(blocks)
        if cls == "laminar":
            sets = [(s["elements"], int(s["capacity"]))
                    for s in _need(data, "sets", "laminar matroid")]
            return make_laminar(sets, ground=data.get("elements"))
        if cls == "transversal":
            return make_transversal(_need(data, "sets", "transversal matroid"),
                                    ground=data.get("elements"))
        if cls == "graphic":
            graph = MultiGraph.create(_need(data, "vertices", "graphic matroid"),
                                      _need(data, "edges", "graphic matroid"))
            return make_graphic(graph)
        if cls == "gammoid":
            spec = GammoidSpec(
                vertices=tuple(_need(data, "vertices", "gammoid")),
                arcs=tuple((a[0], a[1]) for a in _need(data, "arcs", "gammoid")),
                targets=tuple(data.get("sources", data.get("targets", ()))),
                ground=tuple(_need(data, "ground", "gammoid")))
            return make_gammoid(spec)
        if cls == "explicit":
            return make_explicit(_need(data, "elements", "explicit matroid"),
                                 _need(data, "bases", "explicit matroid"))
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"matroid: {exc}") from exc
    raise FormatError(f"matroid: unknown class {cls!r}")


def gammoid_to_dict(spec: GammoidSpec) -> dict:
    return {
        "class": "gammoid",
        "vertices": list(spec.vertices),
        "arcs": [list(a) for a in spec.arcs],
        "sources": list(spec.targets),
        "ground": list(spec.ground),
    }


# ----------------------------------------------------------------- oracles

def oracle_from_dict(data: Mapping) -> SubmodularOracle:
    if not isinstance(data, Mapping):
        raise FormatError("oracle: expected an object")
    if "matroid" in data:
        matroid = matroid_from_dict(data["matroid"])
        scale = float(data.get("scale", 1.0))
        if scale < 0:
            raise FormatError("oracle: scale must be nonnegative")
        return oracle_from_matroid(matroid, scale)
    ground = GroundSet(_need(data, "ground", "oracle"))
    raw = _need(data, "values", "oracle")
    try:
        values = {parse_subset_key(k): float(v) for k, v in raw.items()}
        return oracle_from_table(ground, values)
    except ValueError as exc:
        raise FormatError(f"oracle: {exc}") from exc


def load_vector_from_dict(ground: GroundSet, data: Mapping) -> LoadVector:
    if not isinstance(data, Mapping):
        raise FormatError("load vector: expected an object")
    try:
        return LoadVector.from_dict(ground, {k: float(v) for k, v in data.items()})
    except ValueError as exc:
        raise FormatError(f"load vector: {exc}") from exc


# ------------------------------------------------------------------- costs

def cost_from_dict(data: Mapping) -> CostFunction:
    if not isinstance(data, Mapping) or len(data) != 1:
        raise FormatError('cost: expected exactly one of "poly" | "queue" | "affine_scaled"')
    try:
        if "poly" in data:
            return CostFunction.polynomial(data["poly"])
        if "queue" in data:
            return CostFunction.queue(float(data["queue"]["mu"]))
        if "affine_scaled" in data:
            spec = data["affine_scaled"]
            return CostFunction.affine_scaled(float(spec["c"]), float(spec["b"]))
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"cost: {exc}") from exc
    raise FormatError(f"cost: unknown form {sorted(data)!r}")


def cost_to_dict(cost: CostFunction) -> dict:
    if cost.kind == "poly":
        return {"poly": list(cost.coeffs)}
    if cost.kind == "queue":
        return {"queue": {"mu": cost.mu}}
    return {"affine_scaled": {"c": cost.scale, "b": cost.offset}}


# ------------------------------------------------------------------- games

def game_from_dict(data: Mapping) -> Game:
    if not isinstance(data, Mapping):
        raise FormatError("game: expected an object")
    ground = GroundSet(_need(data, "ground", "game"))
    players = []
    for entry in _need(data, "players", "game"):
        pid = str(_need(entry, "id", "player"))
        demand = float(_need(entry, "demand", f"player {pid}"))
        space_spec = _need(entry, "space", f"player {pid}")
        kind = _need(space_spec, "kind", f"player {pid} space")
        if kind == "set_system":
            space = SetSystemSpace.of(_need(space_spec, "sets", f"player {pid} space"))
        elif kind == "matroid":
            matroid = matroid_from_dict({k: v for k, v in space_spec.items()
                                         if k not in ("kind", "scale")})
            if matroid.ground.elements != ground.elements:
                # rank oracle extended by zero outside its own ground
                inner = matroid
                sub_idx = [ground.index[e] for e in inner.ground.elements]

                def lifted(mask: int, inner=inner, sub_idx=sub_idx) -> int:
                    sub_mask = 0
                    for pos, i in enumerate(sub_idx):
                        if mask >> i & 1:
                            sub_mask |= 1 << pos
                    return inner.rank_of_mask(sub_mask)

                oracle = SubmodularOracle(
                    ground,
                    mask_fn=lambda mask, f=lifted, s=float(space_spec.get("scale", 1.0)):
                        s * f(mask))
            else:
                oracle = oracle_from_matroid(matroid, float(space_spec.get("scale", 1.0)))
            space = PolymatroidSpace(oracle)
        elif kind == "oracle":
            oracle = oracle_from_dict({k: v for k, v in space_spec.items() if k != "kind"})
            if oracle.ground != ground:
                raise FormatError(f"player {pid}: oracle ground must match the game")
            space = PolymatroidSpace(oracle)
        else:
            raise FormatError(f"player {pid}: unknown space kind {kind!r}")
        costs = {e: cost_from_dict(c) for e, c in _need(entry, "costs", f"player {pid}").items()}
        players.append(Player(id=pid, demand=demand, space=space, costs=costs))
    try:
        return Game(ground, players)
    except ValueError as exc:
        raise FormatError(f"game: {exc}") from exc


def game_to_dict(game: Game, space_specs: Mapping[str, dict] | None = None) -> dict:
    """Game JSON; polymatroid spaces need their constructor spec passed in
    (oracles do not serialize themselves)."""
    players = []
    for p in game.players:
        if isinstance(p.space, SetSystemSpace):
            space = {"kind": "set_system", "sets": [list(s) for s in p.space.sets]}
        else:
            if space_specs is None or p.id not in space_specs:
                raise ValueError(f"player {p.id}: no serializable space spec")
            space = space_specs[p.id]
        players.append({
            "id": p.id,
            "demand": p.demand,
            "space": space,
            "costs": {e: cost_to_dict(c) for e, c in sorted(p.costs.items())},
        })
    return {"schema_version": SCHEMA_VERSION,
            "ground": list(game.ground.elements),
            "players": players}


# ---------------------------------------------------------------- profiles

def profile_from_dict(game: Game, data: Mapping) -> StrategyProfile:
    if not isinstance(data, Mapping):
        raise FormatError("profile: expected an object")
    loads_raw = _need(data, "loads", "profile")
    dists_raw = data.get("distributions", {})
    loads: dict[str, LoadVector] = {}
    dists: dict[str, dict[tuple[str, ...], float]] = {}
    for p in game.players:
        if p.id in dists_raw:
            dist = {parse_subset_key(k): float(v) for k, v in dists_raw[p.id].items()}
            dists[p.id] = dist
            if p.id in loads_raw:
                loads[p.id] = load_vector_from_dict(game.ground, loads_raw[p.id])
            else:
                loads[p.id] = loads_from_dist(game.ground, dist)
        elif p.id in loads_raw:
            loads[p.id] = load_vector_from_dict(game.ground, loads_raw[p.id])
        else:
            raise FormatError(f"profile: player {p.id} missing")
    return StrategyProfile(loads, dists)


def profile_to_dict(profile: StrategyProfile) -> dict:
    out: dict = {"schema_version": SCHEMA_VERSION,
                 "loads": {pid: lv.as_dict() for pid, lv in profile.loads.items()}}
    if profile.dists:
        out["distributions"] = {
            pid: {subset_key(s): w for s, w in sorted(dist.items())}
            for pid, dist in profile.dists.items()}
    return out


# ------------------------------------------------------------------ graphs

def graph_from_dict(data: Mapping) -> MultiGraph:
    if not isinstance(data, Mapping):
        raise FormatError("graph: expected an object")
    try:
        return MultiGraph.create(_need(data, "vertices", "graph"),
                                 _need(data, "edges", "graph"))
    except (TypeError, IndexError) as exc:
        raise FormatError(f"graph: {exc}") from exc


def graph_to_dict(g: MultiGraph) -> dict:
    return {"vertices": list(g.vertices), "edges": [list(e) for e in g.edges]}


# ----------------------------------------------------------------- reports

def report_to_dict(report: EquilibriumReport) -> dict:
    return {
        "is_equilibrium": report.is_equilibrium,
        "worst_violation": report.worst_violation,
        "per_player": dict(report.per_player),
        "load_matrix": report.load_matrix,
        "aggregate": report.aggregate,
    }


def flow_to_dict(flow: Flow) -> dict:
    out: dict = {"arcs": {f"{u}->{v}": f for (u, v), f in sorted(flow.arc_flows.items())}}
    if flow.trace is not None:
        out["trace"] = [[e, e2, a] for e, e2, a in flow.trace]
    return out


def cut_to_dict(cut: ConflictCut) -> dict:
    return {
        "source_side": list(cut.source_side),
        "trapped_supply": list(cut.trapped_supply),
        "reachable_demand": list(cut.reachable_demand),
        "deficit": cut.deficit,
    }


def exchange_graph_to_dict(graph: ExchangeGraph) -> dict:
    return {
        "kind": graph.kind,
        "nodes": list(graph.ground.elements),
        "arcs": [[u, v, c] for u, v, c in graph.arcs],
    }


def probe_report_to_dict(report: ProbeReport) -> dict:
    return {
        "pairs_tested": report.pairs_tested,
        "vertices_used": report.vertices_used,
        "samples": report.samples,
        "seed": report.seed,
        "clean": report.clean,
        "conflicts": [
            {"x": x, "y": y, "certificate": cut_to_dict(cert)}
            for x, y, cert in report.conflicts
        ],
    }
