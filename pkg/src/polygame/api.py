"""Handlers shared by the CLI and the HTTP service.

Every handler takes parsed JSON payloads, returns (payload, exit_code):
0 success, 1 verdict-negative, 3 non-convergence.  Malformed input raises
FormatError, which the frontends map to exit code 2 / HTTP 400.
"""
from __future__ import annotations

import random
from typing import Mapping

from . import serialize
from .errors import FormatError, GroundTooLarge, NotInPolytope
from .exchange import (build_bidirectional, build_directed, bidirectional_flow,
                       directed_flow, probe_bidirectional_property)
from .game import (SolverParams, canonical_start, is_equilibrium,
                   probe_multiplicity, random_profile, validate_profile)
from .instances import (cycle_game, cycle_profiles, graph_uniqueness_property,
                        k4_conflict_pair, k4_graph, queueing_game,
                        queueing_start, triangle_game, triangle_profiles)
from .matroids import enumerate_bases, is_base_orderable, matroid_axiom_report
from .polymatroid import in_base_polytope

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_NO_CONVERGENCE = 3


def make_params(damping: float | None = None, seed: int | None = None,
                tol: float | None = None, max_iters: int | None = None) -> SolverParams:
    kwargs = {}
    if damping is not None:
        kwargs["damping"] = float(damping)
    if seed is not None:
        kwargs["seed"] = int(seed)
    if tol is not None:
        kwargs["eq_tol"] = float(tol)
    if max_iters is not None:
        kwargs["max_iters"] = int(max_iters)
    return SolverParams(**kwargs)


def _starts_for(game, count: int, seed: int):
    starts = [canonical_start(game)]
    rng = random.Random(seed)
    while len(starts) < count:
        starts.append(random_profile(game, rng))
    return starts[:count]


def _multiplicity_payload(game, report) -> dict:
    return {
        "equilibria": [serialize.report_to_dict(r) for r in report.reports],
        "count": report.count,
        "distinct_aggregates": report.distinct_aggregates,
        "profiles": [serialize.profile_to_dict(p) for p in report.equilibria],
        "converged_from_start": report.start_of,
        "failures": [{"start": i, "reason": msg} for i, msg in report.failures],
    }


def run_solve(game_data: Mapping, starts: int = 1, damping: float | None = None,
              seed: int = 42, max_iters: int | None = None,
              jobs: int = 1) -> tuple[dict, int]:
    game = serialize.game_from_dict(game_data)
    params = make_params(damping=damping, seed=seed, max_iters=max_iters)
    report = probe_multiplicity(game, _starts_for(game, starts, seed), params, jobs=jobs)
    payload = {"schema_version": serialize.SCHEMA_VERSION,
               "command": "solve", **_multiplicity_payload(game, report)}
    if report.count == 0:
        payload["status"] = "no_convergence"
        return payload, EXIT_NO_CONVERGENCE
    payload["status"] = "ok"
    return payload, EXIT_OK


def run_verify(game_data: Mapping, profile_data: Mapping,
               tol: float = 1e-9) -> tuple[dict, int]:
    game = serialize.game_from_dict(game_data)
    profile = serialize.profile_from_dict(game, profile_data)
    problems = validate_profile(game, profile)
    if problems:
        return ({"schema_version": serialize.SCHEMA_VERSION, "command": "verify",
                 "status": "infeasible", "problems": problems}, EXIT_INPUT)
    report = is_equilibrium(game, profile, tol)
    payload = {"schema_version": serialize.SCHEMA_VERSION, "command": "verify",
               "status": "ok" if report.is_equilibrium else "not_equilibrium",
               "tol": tol, **serialize.report_to_dict(report)}
    return payload, EXIT_OK if report.is_equilibrium else EXIT_NEGATIVE


def run_probe(game_data: Mapping, starts: int = 10, seed: int = 42,
              max_iters: int | None = None, jobs: int = 1) -> tuple[dict, int]:
    game = serialize.game_from_dict(game_data)
    params = make_params(seed=seed, max_iters=max_iters)
    report = probe_multiplicity(game, _starts_for(game, starts, seed), params, jobs=jobs)
    payload = {"schema_version": serialize.SCHEMA_VERSION, "command": "probe",
               "starts": starts, "seed": seed,
               **_multiplicity_payload(game, report)}
    if report.count == 0:
        payload["status"] = "no_convergence"
        return payload, EXIT_NO_CONVERGENCE
    payload["status"] = "ok"
    return payload, EXIT_OK


def run_matroid_check(matroid_data: Mapping) -> tuple[dict, int]:
    matroid = serialize.matroid_from_dict(matroid_data)
    axioms = matroid_axiom_report(matroid)
    payload: dict = {
        "schema_version": serialize.SCHEMA_VERSION,
        "command": "matroid_check",
        "class": matroid.class_tag,
        "ground": list(matroid.ground.elements),
        "rank": matroid.full_rank,
        "axioms": axioms,
    }
    ok = all(axioms.values())
    try:
        bases = enumerate_bases(matroid)
        payload["base_count"] = len(bases)
        cert = is_base_orderable(matroid)
        payload["base_orderable"] = cert.ok
        if not cert.ok:
            payload["witness_pair"] = [list(cert.witness[0]), list(cert.witness[1])]
        ok = ok and cert.ok
    except GroundTooLarge as exc:
        payload["base_orderable"] = None
        payload["note"] = str(exc)
    payload["status"] = "ok" if ok else "negative"
    return payload, EXIT_OK if ok else EXIT_NEGATIVE


def run_exchange(oracle_data: Mapping, x_data: Mapping,
                 y_data: Mapping | None = None,
                 want_dot: bool = False) -> tuple[dict, int]:
    oracle = serialize.oracle_from_dict(oracle_data)
    x = serialize.load_vector_from_dict(oracle.ground, x_data)
    payload: dict = {"schema_version": serialize.SCHEMA_VERSION, "command": "exchange"}
    try:
        directed = build_directed(oracle, x)
    except NotInPolytope as exc:
        raise FormatError(f"x: {exc}") from exc
    payload["directed_graph"] = serialize.exchange_graph_to_dict(directed)
    if want_dot:
        payload["dot"] = {"directed": directed.to_dot()}
    if y_data is None:
        payload["status"] = "ok"
        return payload, EXIT_OK
    y = serialize.load_vector_from_dict(oracle.ground, y_data)
    try:
        bidirectional = build_bidirectional(oracle, x, y)
    except NotInPolytope as exc:
        raise FormatError(f"y: {exc}") from exc
    supplies = {e: x[e] - y[e] for e in oracle.ground}
    payload["bidirectional_graph"] = serialize.exchange_graph_to_dict(bidirectional)
    payload["supplies"] = supplies
    payload["directed_flow"] = serialize.flow_to_dict(directed_flow(oracle, x, y))
    outcome = bidirectional_flow(oracle, x, y)
    if outcome.feasible:
        payload["bidirectional_flow"] = serialize.flow_to_dict(outcome.flow)
        payload["status"] = "ok"
        code = EXIT_OK
    else:
        payload["bidirectional_flow"] = None
        payload["conflict"] = serialize.cut_to_dict(outcome.certificate)
        payload["status"] = "conflicting"
        code = EXIT_NEGATIVE
    if want_dot:
        payload["dot"]["bidirectional"] = bidirectional.to_dot(supplies)
    return payload, code


def _reproduce_triangle() -> tuple[dict, int]:
    game = triangle_game()
    direct, indirect = triangle_profiles(game)
    rep_d = is_equilibrium(game, direct, 1e-9)
    rep_i = is_equilibrium(game, indirect, 1e-9)
    multi = probe_multiplicity(game, [direct, indirect])
    checks = {
        "all_direct_is_equilibrium": rep_d.is_equilibrium,
        "all_indirect_is_equilibrium": rep_i.is_equilibrium,
        "two_equilibria": multi.count == 2,
        "aggregates_distinct": multi.distinct_aggregates == 2,
    }
    payload = {
        "target": "triangle",
        "game": serialize.game_to_dict(game),
        "profiles": {"all_direct": serialize.profile_to_dict(direct),
                     "all_indirect": serialize.profile_to_dict(indirect)},
        "reports": {"all_direct": serialize.report_to_dict(rep_d),
                    "all_indirect": serialize.report_to_dict(rep_i)},
        "multiplicity": _multiplicity_payload(game, multi),
        "expected": {"equilibria": 2, "residual": 0.0,
                     "aggregates": [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]},
        "self_check": checks,
    }
    return payload, EXIT_OK if all(checks.values()) else EXIT_NEGATIVE


def _reproduce_k4() -> tuple[dict, int]:
    oracle, x, y = k4_conflict_pair()
    flow = directed_flow(oracle, x, y)
    outcome = bidirectional_flow(oracle, x, y)
    balance_ok = all(abs(flow.balance(e) - (x[e] - y[e])) <= 1e-9 for e in oracle.ground)
    checks = {
        "x_in_polytope": in_base_polytope(oracle, x),
        "y_in_polytope": in_base_polytope(oracle, y),
        "directed_flow_feasible": balance_ok,
        "conflicting": not outcome.feasible,
        "cut_isolates_1_6": (not outcome.feasible
                             and set(outcome.certificate.trapped_supply) == {"1", "6"}
                             and set(outcome.certificate.reachable_demand) == {"4"}),
    }
    payload = {
        "target": "k4",
        "matroid": {"class": "graphic",
                    "vertices": list(k4_graph().vertices),
                    "edges": [list(e) for e in k4_graph().edges]},
        "x": x.as_dict(),
        "y": y.as_dict(),
        "directed_flow": serialize.flow_to_dict(flow),
        "conflict": None if outcome.feasible else serialize.cut_to_dict(outcome.certificate),
        "expected": {"verdict": "conflicting", "trapped_supply": ["1", "6"],
                     "reachable_demand": ["4"]},
        "self_check": checks,
    }
    return payload, EXIT_OK if all(checks.values()) else EXIT_NEGATIVE


def _reproduce_cycle(k: int) -> tuple[dict, int]:
    game = cycle_game(k)
    clockwise, counter = cycle_profiles(game)
    rep_c = is_equilibrium(game, clockwise, 1e-9)
    rep_cc = is_equilibrium(game, counter, 1e-9)
    multi = probe_multiplicity(game, [clockwise, counter])
    checks = {
        "clockwise_is_equilibrium": rep_c.is_equilibrium,
        "counterclockwise_is_equilibrium": rep_cc.is_equilibrium,
        "two_equilibria": multi.count == 2,
    }
    payload = {
        "target": f"cycle:{k}",
        "game": serialize.game_to_dict(game),
        "profiles": {"clockwise": serialize.profile_to_dict(clockwise),
                     "counterclockwise": serialize.profile_to_dict(counter)},
        "reports": {"clockwise": serialize.report_to_dict(rep_c),
                    "counterclockwise": serialize.report_to_dict(rep_cc)},
        "multiplicity": _multiplicity_payload(game, multi),
        "expected": {"equilibria": 2, "residual": 0.0},
        "self_check": checks,
    }
    return payload, EXIT_OK if all(checks.values()) else EXIT_NEGATIVE


def _reproduce_queueing() -> tuple[dict, int]:
    game = queueing_game([3.0, 3.0], [1.0, 1.0])
    params = SolverParams()
    starts = [queueing_start(game)]
    rng = random.Random(params.seed)
    while len(starts) < 5:
        starts.append(random_profile(game, rng))
    multi = probe_multiplicity(game, starts, params)
    symmetric = (multi.count >= 1 and all(
        abs(v - 0.5) <= 1e-6
        for lv in multi.equilibria[0].loads.values() for v in lv.values))
    checks = {"unique_equilibrium": multi.count == 1, "symmetric_split": symmetric}
    payload = {
        "target": "queueing",
        "service_rates": [3.0, 3.0],
        "demands": [1.0, 1.0],
        "multiplicity": _multiplicity_payload(game, multi),
        "expected": {"equilibria": 1, "loads": 0.5},
        "self_check": checks,
    }
    return payload, EXIT_OK if all(checks.values()) else EXIT_NEGATIVE


def run_reproduce(target: str) -> tuple[dict, int]:
    base = {"schema_version": serialize.SCHEMA_VERSION, "command": "reproduce"}
    if target == "triangle":
        payload, code = _reproduce_triangle()
    elif target == "k4":
        payload, code = _reproduce_k4()
    elif target.startswith("cycle:"):
        try:
            k = int(target.split(":", 1)[1])
        except ValueError as exc:
            raise FormatError(f"bad cycle target {target!r}") from exc
        payload, code = _reproduce_cycle(k)
    elif target == "queueing":
        payload, code = _reproduce_queueing()
    else:
        raise FormatError(f"unknown reproduce target {target!r}")
    payload.update(base)
    payload["status"] = "ok" if code == EXIT_OK else "self_check_failed"
    return payload, code


def run_property_bidir(oracle_data: Mapping, samples: int = 200,
                       seed: int = 42) -> tuple[dict, int]:
    oracle = serialize.oracle_from_dict(oracle_data)
    report = probe_bidirectional_property(oracle, samples=samples, seed=seed)
    payload = {"schema_version": serialize.SCHEMA_VERSION,
               "command": "property_bidir",
               **serialize.probe_report_to_dict(report),
               "status": "ok" if report.clean else "conflicts_found"}
    return payload, EXIT_OK if report.clean else EXIT_NEGATIVE


def run_property_graph(graph_data: Mapping) -> tuple[dict, int]:
    graph = serialize.graph_from_dict(graph_data)
    verdict = graph_uniqueness_property(graph)
    payload = {"schema_version": serialize.SCHEMA_VERSION,
               "command": "property_graph",
               "uniqueness_property": verdict,
               "status": "ok" if verdict else "negative"}
    return payload, EXIT_OK if verdict else EXIT_NEGATIVE
